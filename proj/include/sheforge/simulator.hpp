#pragma once

#include "sheforge/harmonics.hpp"

#include <span>
#include <string>
#include <vector>

namespace sheforge {

/// Cascaded H-bridge inverter with a resistive load. Defaults are the
/// nine-level test rig: four 10 V sources, 50 Hz, 5 kHz carriers, 100 ohm.
struct InverterConfig {
  int bridges = 4;
  std::vector<double> vdc{10.0, 10.0, 10.0, 10.0};
  double f0 = 50.0;
  double carrier_freq = 5000.0;
  double load_resistance = 100.0;

  void validate() const;
  int levels() const { return 2 * bridges + 1; }
  double total_vdc() const;
  bool equal_sources() const;
};

InverterConfig config_from_json(const std::string &text);
std::string config_to_json(const InverterConfig &config);

/// Velocity-form PI acting on the modulation index once per fundamental
/// cycle. m_initial is the index used for the first cycle.
struct PiGains {
  double kp = 0.005;
  double ki = 1.2;
  double m_min = 0.0;
  double m_max = 1.0;
  double m_initial = 0.5;

  void validate() const;
};

struct SimulationTrace {
  double sample_rate = 0.0;
  double f0 = 0.0;
  double load_resistance = 0.0;
  std::vector<double> time;
  std::vector<double> voltage;
  std::vector<double> current;
  std::vector<int> level;
  std::vector<double> m; // modulation index in force at each sample

  std::size_t size() const { return voltage.size(); }
  // Samples of the last n_cycles complete fundamental cycles.
  std::vector<double> tail_cycles(int n_cycles) const;
};

// Trace CSV: t_s,v_out_V,i_out_A,level,m
std::string trace_csv(const SimulationTrace &trace);
SimulationTrace parse_trace_csv(const std::string &text, double f0);

/// Level in [-s, s] of phase-disposition SPWM: 2s in-phase unit triangular
/// carriers tiling [-s, s] compared against m s sin(2 pi f0 t).
int spwm_level(double m, double t, const InverterConfig &config);

SimulationTrace simulate_open_loop_spwm(const InverterConfig &config, double m, double duration,
                                        double sample_rate = 2e5);

/// Per-bridge quarter-wave gating: bridge k conducts +vdc_k on
/// (theta_k, pi - theta_k) and -vdc_k on the mirrored half cycle.
SimulationTrace simulate_she(const InverterConfig &config, const SwitchingAngleSet &angles,
                             double duration, double sample_rate = 2e5);

/// PI closed loop on the cycle RMS of the output voltage. After every
/// fundamental cycle: e = v_ref - v_rms, m += kp (e - e_prev) + ki T0 e,
/// clamped to [m_min, m_max].
SimulationTrace simulate_closed_loop_pi(const InverterConfig &config, double v_ref_rms,
                                        const PiGains &gains, double duration,
                                        double sample_rate = 2e5);

double rms(std::span<const double> x);

} // namespace sheforge

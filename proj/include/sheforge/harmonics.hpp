#pragma once

#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace sheforge {

inline constexpr double kHalfPi = std::numbers::pi / 2.0;

inline constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Firing angles of the s bridges over the first quarter cycle, in radians.
///
/// A strict set has 0 < a1 < a2 < ... < as < pi/2, which is what the solver
/// and the ANN produce and what the waveform synthesizers require. A relaxed
/// set admits the closed interval and ties so that degenerate cases (the
/// square wave, all angles zero) can still be fed to the closed-form
/// evaluators.
class SwitchingAngleSet {
public:
  static SwitchingAngleSet strict(std::vector<double> radians);
  static SwitchingAngleSet relaxed(std::vector<double> radians);
  static SwitchingAngleSet from_degrees(std::span<const double> degrees);

  std::span<const double> radians() const { return angles_; }
  std::vector<double> degrees() const;
  int size() const { return static_cast<int>(angles_.size()); }
  double operator[](int k) const { return angles_[static_cast<std::size_t>(k)]; }
  bool is_strict() const { return strict_; }

  // True when the values satisfy the strict interior/ordering invariant.
  static bool satisfies_strict(std::span<const double> radians);

  friend bool operator==(const SwitchingAngleSet &, const SwitchingAngleSet &) = default;

private:
  SwitchingAngleSet(std::vector<double> a, bool strict) : angles_(std::move(a)), strict_(strict) {}
  std::vector<double> angles_;
  bool strict_ = false;
};

/// Uniformly sampled voltage record. Sample i sits at t = i / sample_rate.
struct WaveformTrace {
  double sample_rate = 0.0;
  double fundamental_freq = 0.0;
  std::vector<double> samples;

  double time(std::size_t i) const { return static_cast<double>(i) / sample_rate; }
};

// 2s + 1 output levels for s series bridges.
int level_count(int bridges);
// Bridges needed for an odd level count >= 3.
int bridges_for_levels(int levels);

/// Peak amplitude of harmonic n of the quarter-wave staircase:
/// 4 vdc / (n pi) * sum_k cos(n theta_k) for odd n, exactly 0 for even n.
/// The sign is kept.
double harmonic_amplitude(const SwitchingAngleSet &angles, double vdc, int n);

/// Per-unit modulation index m = pi V1 / (4 s vdc), so that m = 1 is the
/// largest fundamental a staircase of s steps can produce.
double modulation_index_from_fundamental(double v1, double vdc, int bridges);
double fundamental_from_modulation_index(double m, double vdc, int bridges);

/// Stair level (0..s) of the staircase at sample i of a record with
/// samples_per_cycle samples per fundamental period, signed by half-cycle.
int staircase_level_at(std::span<const double> angles, double samples_per_cycle, std::int64_t i);

/// Samples the staircase over n_cycles fundamental periods. sample_rate must
/// be at least 200 f0 and an integer multiple of f0.
WaveformTrace synthesize_staircase(const SwitchingAngleSet &angles, double vdc, double f0,
                                   double sample_rate, int n_cycles);

// Waveform CSV: t_s,v_out_V
std::string waveform_csv(const WaveformTrace &trace);

/// sqrt(sum_{n=2..max_order} h(n)^2) / |h(1)|, independent of vdc.
double analytic_thd(const SwitchingAngleSet &angles, int max_order);

} // namespace sheforge

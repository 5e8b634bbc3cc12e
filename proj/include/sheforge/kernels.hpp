#pragma once

// Data-parallel inner loops. Each kernel has an OpenMP version used by the
// library and a serial reference kept for tests and the benchmark. Both
// compute every output element with the same arithmetic, so their results
// are bit-identical regardless of thread count.

#include <cstdint>
#include <span>

namespace sheforge::kernels {

struct PdCarrierParams {
  double m = 0.0;            // per-unit modulation index
  int bridges = 1;           // s
  double f0 = 50.0;          // reference frequency, Hz
  double carrier_freq = 5e3; // Hz
  double sample_rate = 2e5;  // Hz
};

// Signed staircase level for samples [first, first + out.size()).
void staircase_levels(std::span<const double> angles, double samples_per_cycle,
                      std::int64_t first, std::span<int> out);
void staircase_levels_serial(std::span<const double> angles, double samples_per_cycle,
                             std::int64_t first, std::span<int> out);

// Phase-disposition multicarrier SPWM level for samples [first, first + out.size()).
void pd_spwm_levels(const PdCarrierParams &p, std::int64_t first, std::span<int> out);
void pd_spwm_levels_serial(const PdCarrierParams &p, std::int64_t first, std::span<int> out);

// Level for a reference phase and carrier phase, both as fractions of a
// period in [0, 1). Shared by every SPWM path.
int pd_spwm_level(double m, int bridges, double ref_phase, double carrier_phase);
int pd_spwm_level_at(const PdCarrierParams &p, std::int64_t i);

// Synchronous projection of x onto cos/sin of n * cycles_per_sample * 2 pi i
// for n = 1..cos_part.size(). Outputs are the raw sums (not normalized).
void harmonic_projection(std::span<const double> x, double cycles_per_sample,
                         std::span<double> cos_part, std::span<double> sin_part);
void harmonic_projection_serial(std::span<const double> x, double cycles_per_sample,
                                std::span<double> cos_part, std::span<double> sin_part);

} // namespace sheforge::kernels

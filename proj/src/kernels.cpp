#include "sheforge/kernels.hpp"

#include "sheforge/harmonics.hpp"

#include <cmath>
#include <numbers>

namespace sheforge::kernels {

namespace {

// Fractional part of a * b for a non-negative integer a.
double cycle_fraction(std::int64_t a, double b) {
  const double x = static_cast<double>(a) * b;
  return x - std::floor(x);
}

void project_order(std::span<const double> x, double cycles_per_sample, int order, double &c,
                   double &s) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double acc_c = 0.0;
  double acc_s = 0.0;
  const std::int64_t n = static_cast<std::int64_t>(x.size());
  for (std::int64_t i = 0; i < n; ++i) {
    const double ph = two_pi * cycle_fraction(static_cast<std::int64_t>(order) * i, cycles_per_sample);
    acc_c += x[static_cast<std::size_t>(i)] * std::cos(ph);
    acc_s += x[static_cast<std::size_t>(i)] * std::sin(ph);
  }
  c = acc_c;
  s = acc_s;
}

} // namespace

void staircase_levels(std::span<const double> angles, double samples_per_cycle,
                      std::int64_t first, std::span<int> out) {
  const std::int64_t n = static_cast<std::int64_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] = staircase_level_at(angles, samples_per_cycle, first + i);
}

void staircase_levels_serial(std::span<const double> angles, double samples_per_cycle,
                             std::int64_t first, std::span<int> out) {
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = staircase_level_at(angles, samples_per_cycle, first + static_cast<std::int64_t>(i));
}

int pd_spwm_level(double m, int bridges, double ref_phase, double carrier_phase) {
  const double ref = m * bridges * std::sin(2.0 * std::numbers::pi * ref_phase);
  // Unit triangle, 0 at the start of each carrier period and 1 at mid-period.
  const double tri = 1.0 - std::abs(2.0 * carrier_phase - 1.0);

  int level = 0;
  for (int band = 0; band < bridges; ++band) {
    // Band [band, band+1] above zero, band [-band-1, -band] below.
    if (ref > band + tri)
      ++level;
    if (ref < -(band + 1) + tri)
      --level;
  }
  return level;
}

int pd_spwm_level_at(const PdCarrierParams &p, std::int64_t i) {
  return pd_spwm_level(p.m, p.bridges, cycle_fraction(i, p.f0 / p.sample_rate),
                       cycle_fraction(i, p.carrier_freq / p.sample_rate));
}

void pd_spwm_levels(const PdCarrierParams &p, std::int64_t first, std::span<int> out) {
  const std::int64_t n = static_cast<std::int64_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] = pd_spwm_level_at(p, first + i);
}

void pd_spwm_levels_serial(const PdCarrierParams &p, std::int64_t first, std::span<int> out) {
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = pd_spwm_level_at(p, first + static_cast<std::int64_t>(i));
}

void harmonic_projection(std::span<const double> x, double cycles_per_sample,
                         std::span<double> cos_part, std::span<double> sin_part) {
  const int orders = static_cast<int>(cos_part.size());
  // One order per iteration; the sum over samples stays sequential so the
  // reduction order never depends on the thread count.
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < orders; ++k)
    project_order(x, cycles_per_sample, k + 1, cos_part[static_cast<std::size_t>(k)],
                  sin_part[static_cast<std::size_t>(k)]);
}

void harmonic_projection_serial(std::span<const double> x, double cycles_per_sample,
                                std::span<double> cos_part, std::span<double> sin_part) {
  for (std::size_t k = 0; k < cos_part.size(); ++k)
    project_order(x, cycles_per_sample, static_cast<int>(k) + 1, cos_part[k], sin_part[k]);
}

} // namespace sheforge::kernels

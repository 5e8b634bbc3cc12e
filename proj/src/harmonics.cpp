#include "sheforge/harmonics.hpp"

#include "sheforge/csv.hpp"
#include "sheforge/error.hpp"
#include "sheforge/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

namespace sheforge {

namespace {

void require_nonempty_finite(std::span<const double> a) {
  if (a.empty())
    throw DomainError("switching angle set must contain at least one angle");
  for (double v : a)
    if (!std::isfinite(v))
      throw DomainError("switching angle is not finite");
}

} // namespace

bool SwitchingAngleSet::satisfies_strict(std::span<const double> a) {
  if (a.empty())
    return false;
  double prev = 0.0;
  for (double v : a) {
    if (!(v > prev) || !(v < kHalfPi))
      return false;
    prev = v;
  }
  return true;
}

SwitchingAngleSet SwitchingAngleSet::strict(std::vector<double> radians) {
  require_nonempty_finite(radians);
  if (!satisfies_strict(radians))
    throw DomainError("switching angles must be strictly ascending inside (0, pi/2)");
  return SwitchingAngleSet(std::move(radians), true);
}

SwitchingAngleSet SwitchingAngleSet::relaxed(std::vector<double> radians) {
  require_nonempty_finite(radians);
  double prev = 0.0;
  for (double v : radians) {
    if (v < prev || v > kHalfPi)
      throw DomainError("switching angles must be non-decreasing inside [0, pi/2]");
    prev = v;
  }
  const bool s = satisfies_strict(radians);
  return SwitchingAngleSet(std::move(radians), s);
}

SwitchingAngleSet SwitchingAngleSet::from_degrees(std::span<const double> degrees) {
  std::vector<double> r;
  r.reserve(degrees.size());
  for (double d : degrees)
    r.push_back(deg_to_rad(d));
  return relaxed(std::move(r));
}

std::vector<double> SwitchingAngleSet::degrees() const {
  std::vector<double> d;
  d.reserve(angles_.size());
  for (double a : angles_)
    d.push_back(rad_to_deg(a));
  return d;
}

int level_count(int bridges) {
  if (bridges < 1)
    throw DomainError("bridge count must be >= 1");
  return 2 * bridges + 1;
}

int bridges_for_levels(int levels) {
  if (levels < 3 || levels % 2 == 0)
    throw DomainError("level count must be odd and >= 3, got " + std::to_string(levels));
  return (levels - 1) / 2;
}

double harmonic_amplitude(const SwitchingAngleSet &angles, double vdc, int n) {
  if (n < 1)
    throw DomainError("harmonic order must be >= 1, got " + std::to_string(n));
  if (!(vdc > 0.0))
    throw DomainError("vdc must be positive");
  if (n % 2 == 0)
    return 0.0;
  double sum = 0.0;
  for (double a : angles.radians())
    sum += std::cos(n * a);
  return 4.0 * vdc / (n * std::numbers::pi) * sum;
}

double modulation_index_from_fundamental(double v1, double vdc, int bridges) {
  if (!(vdc > 0.0) || bridges < 1 || v1 < 0.0)
    throw DomainError("modulation index needs vdc > 0, s >= 1, v1 >= 0");
  return std::numbers::pi * v1 / (4.0 * bridges * vdc);
}

double fundamental_from_modulation_index(double m, double vdc, int bridges) {
  if (!(vdc > 0.0) || bridges < 1 || m < 0.0)
    throw DomainError("fundamental needs vdc > 0, s >= 1, m >= 0");
  return 4.0 * bridges * vdc * m / std::numbers::pi;
}

int staircase_level_at(std::span<const double> angles, double samples_per_cycle, std::int64_t i) {
  const double period = samples_per_cycle;
  const double half = 0.5 * period;
  double j = std::fmod(static_cast<double>(i), period);
  int sign = 1;
  if (j >= half) {
    j -= half;
    sign = -1;
  }
  // Distance into the half cycle, folded about the quarter point.
  const double q = std::min(j, half - j);
  const double x = 2.0 * std::numbers::pi * q / period;
  int steps = 0;
  for (double a : angles)
    if (a <= x)
      ++steps;
  return sign * steps;
}

WaveformTrace synthesize_staircase(const SwitchingAngleSet &angles, double vdc, double f0,
                                   double sample_rate, int n_cycles) {
  if (!angles.is_strict())
    throw DomainError("staircase synthesis requires strictly ordered interior angles");
  if (!(vdc > 0.0) || !(f0 > 0.0))
    throw DomainError("vdc and f0 must be positive");
  if (n_cycles < 1)
    throw DomainError("n_cycles must be >= 1");
  if (sample_rate < 200.0 * f0)
    throw DomainError("sample_rate must be at least 200 * f0");
  const double per_cycle = sample_rate / f0;
  if (std::abs(per_cycle - std::round(per_cycle)) > 1e-9 * per_cycle)
    throw DomainError("sample_rate must be an integer multiple of f0");

  const auto samples_per_cycle = static_cast<std::int64_t>(std::llround(per_cycle));
  const std::size_t n = static_cast<std::size_t>(samples_per_cycle * n_cycles);
  std::vector<int> levels(n);
  kernels::staircase_levels(angles.radians(), static_cast<double>(samples_per_cycle), 0, levels);

  WaveformTrace trace{sample_rate, f0, std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i)
    trace.samples[i] = vdc * levels[i];
  return trace;
}

std::string waveform_csv(const WaveformTrace &trace) {
  std::ostringstream out;
  out << "t_s,v_out_V\n";
  for (std::size_t i = 0; i < trace.samples.size(); ++i)
    out << csv::format_double(trace.time(i)) << ',' << csv::format_double(trace.samples[i]) << '\n';
  return out.str();
}

double analytic_thd(const SwitchingAngleSet &angles, int max_order) {
  if (max_order < 1)
    throw DomainError("max_order must be >= 1");
  const double h1 = harmonic_amplitude(angles, 1.0, 1);
  // Rounding leaves cos(pi/2) ~ 6e-17, so compare against a small multiple of s.
  if (std::abs(h1) <= 1e-12 * angles.size())
    throw DegenerateFundamentalError("fundamental amplitude is zero");
  double sq = 0.0;
  for (int n = 2; n <= max_order; ++n) {
    const double h = harmonic_amplitude(angles, 1.0, n);
    sq += h * h;
  }
  return std::sqrt(sq) / std::abs(h1);
}

} // namespace sheforge

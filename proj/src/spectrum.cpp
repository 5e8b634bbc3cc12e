#include "sheforge/spectrum.hpp"

#include "sheforge/csv.hpp"
#include "sheforge/error.hpp"
#include "sheforge/harmonics.hpp"
#include "sheforge/kernels.hpp"

#include <cmath>
#include <sstream>
#include <string>

namespace sheforge {

namespace {

using ProjectionFn = void (*)(std::span<const double>, double, std::span<double>, std::span<double>);

HarmonicSpectrum project(std::span<const double> samples, double sample_rate, double f0,
                         int max_order, ProjectionFn fn) {
  if (samples.empty())
    throw DomainError("cannot analyze an empty record");
  if (!(sample_rate > 0.0) || !(f0 > 0.0))
    throw DomainError("sample_rate and f0 must be positive");
  if (max_order < 1)
    throw DomainError("max_order must be >= 1");
  const double n = static_cast<double>(samples.size());
  const double cycles = n * f0 / sample_rate;
  if (std::abs(cycles - std::round(cycles)) > 1e-6 || std::round(cycles) < 1.0)
    throw DomainError("record spans " + std::to_string(cycles) +
                      " fundamental cycles; an integer count is required");
  if (!(sample_rate > 2.0 * f0 * max_order))
    throw DomainError("sample_rate too low for max_order " + std::to_string(max_order));

  std::vector<double> c(static_cast<std::size_t>(max_order));
  std::vector<double> s(static_cast<std::size_t>(max_order));
  fn(samples, f0 / sample_rate, c, s);

  HarmonicSpectrum out;
  out.f0 = f0;
  double dc = 0.0;
  for (double v : samples)
    dc += v;
  out.dc = dc / n;
  out.magnitudes.resize(c.size());
  out.phases.resize(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double a = 2.0 * c[k] / n;
    const double b = 2.0 * s[k] / n;
    out.magnitudes[k] = std::hypot(a, b);
    out.phases[k] = std::atan2(a, b); // phase of a sine: x = h sin(n w t + phase)
  }
  return out;
}

} // namespace

HarmonicSpectrum harmonic_spectrum(std::span<const double> samples, double sample_rate, double f0,
                                   int max_order) {
  return project(samples, sample_rate, f0, max_order, &kernels::harmonic_projection);
}

HarmonicSpectrum harmonic_spectrum(const WaveformTrace &trace, int max_order) {
  return harmonic_spectrum(trace.samples, trace.sample_rate, trace.fundamental_freq, max_order);
}

HarmonicSpectrum harmonic_spectrum_serial(std::span<const double> samples, double sample_rate,
                                          double f0, int max_order) {
  return project(samples, sample_rate, f0, max_order, &kernels::harmonic_projection_serial);
}

double thd(const HarmonicSpectrum &spectrum, int max_order) {
  if (max_order < 1 || max_order > spectrum.max_order())
    throw DomainError("thd max_order " + std::to_string(max_order) + " outside computed range");
  const double h1 = spectrum.magnitude(1);
  if (!(h1 > 0.0))
    throw DegenerateFundamentalError("fundamental magnitude is zero");
  double sq = 0.0;
  for (int n = 2; n <= max_order; ++n)
    sq += spectrum.magnitude(n) * spectrum.magnitude(n);
  return std::sqrt(sq) / h1;
}

std::string spectrum_csv(const HarmonicSpectrum &spectrum, int thd_order) {
  std::ostringstream out;
  out << "order,freq_hz,magnitude\n";
  for (int n = 1; n <= spectrum.max_order(); ++n)
    out << n << ',' << csv::format_double(n * spectrum.f0) << ',' << csv::format_double(spectrum.magnitude(n)) << '\n';
  out << "# thd_pct=" << csv::format_double(100.0 * thd(spectrum, thd_order)) << ",max_order=" << thd_order << '\n';
  return out.str();
}

} // namespace sheforge

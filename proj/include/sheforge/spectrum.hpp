#pragma once

#include <span>
#include <string>
#include <vector>

namespace sheforge {

struct WaveformTrace;

/// Peak-amplitude harmonic magnitudes of a cycle-exact record.
/// magnitudes[n-1] and phases[n-1] belong to harmonic order n.
struct HarmonicSpectrum {
  double f0 = 0.0;
  double dc = 0.0;
  std::vector<double> magnitudes;
  std::vector<double> phases;

  int max_order() const { return static_cast<int>(magnitudes.size()); }
  double magnitude(int order) const { return magnitudes.at(static_cast<std::size_t>(order - 1)); }
};

/// Synchronous Fourier projection of samples onto the harmonics of f0, using
/// a rectangular window over the whole record. The record must span an
/// integer number of f0 cycles and sample_rate must exceed 2 f0 max_order.
HarmonicSpectrum harmonic_spectrum(std::span<const double> samples, double sample_rate,
                                   double f0, int max_order);
HarmonicSpectrum harmonic_spectrum(const WaveformTrace &trace, int max_order);

// Same result through the serial reference kernel.
HarmonicSpectrum harmonic_spectrum_serial(std::span<const double> samples, double sample_rate,
                                          double f0, int max_order);

/// sqrt(sum_{n=2..max_order} h_n^2) / h_1.
double thd(const HarmonicSpectrum &spectrum, int max_order);

// Spectrum CSV: order,freq_hz,magnitude plus a "# thd_pct=...,max_order=N" footer.
std::string spectrum_csv(const HarmonicSpectrum &spectrum, int thd_order);

} // namespace sheforge

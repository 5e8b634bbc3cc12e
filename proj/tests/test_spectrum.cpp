#include "sheforge/error.hpp"
#include "sheforge/harmonics.hpp"
#include "sheforge/spectrum.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace sheforge;

namespace {

std::vector<double> sine(double amp, double f0, double fs, int cycles, double offset = 0.0) {
  const auto n = static_cast<std::size_t>(std::llround(fs / f0 * cycles));
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = offset + amp * std::sin(2.0 * std::numbers::pi * f0 * static_cast<double>(i) / fs);
  return x;
}

std::vector<double> square(double amp, std::size_t per_cycle, int cycles) {
  std::vector<double> x(per_cycle * static_cast<std::size_t>(cycles));
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::size_t j = i % per_cycle;
    x[i] = (j == 0 || j == per_cycle / 2) ? 0.0 : (j < per_cycle / 2 ? amp : -amp);
  }
  return x;
}

} // namespace

TEST_CASE("pure sine: amplitude at order 1, nothing elsewhere") {
  const auto x = sine(10.0, 50.0, 20e3, 10);
  const auto sp = harmonic_spectrum(x, 20e3, 50.0, 150);
  CHECK(std::abs(sp.magnitude(1) - 10.0) < 1e-9);
  for (int n = 2; n <= 150; ++n)
    CHECK(sp.magnitude(n) < 1e-9);
  CHECK(std::abs(sp.dc) < 1e-9);
  CHECK(thd(sp, 150) < 1e-10);
}

TEST_CASE("square wave third harmonic ratio") {
  const auto x = square(40.0, 200000, 1);
  const auto sp = harmonic_spectrum(x, 1e7, 50.0, 3);
  CHECK(std::abs(sp.magnitude(3) / sp.magnitude(1) - 1.0 / 3.0) < 1e-6);
  CHECK(sp.magnitude(1) == doctest::Approx(160.0 / std::numbers::pi).epsilon(1e-6));
}

TEST_CASE("DC offset leaves harmonics unchanged") {
  const auto a = sine(7.0, 50.0, 20e3, 4);
  const auto b = sine(7.0, 50.0, 20e3, 4, 3.25);
  const auto sa = harmonic_spectrum(a, 20e3, 50.0, 50);
  const auto sb = harmonic_spectrum(b, 20e3, 50.0, 50);
  CHECK(sb.dc == doctest::Approx(3.25));
  for (int n = 1; n <= 50; ++n)
    CHECK(std::abs(sa.magnitude(n) - sb.magnitude(n)) < 1e-9);
}

TEST_CASE("record preconditions") {
  const auto x = sine(1.0, 50.0, 20e3, 10);
  std::vector<double> partial(x.begin(), x.end() - 100);
  CHECK_THROWS_AS(harmonic_spectrum(partial, 20e3, 50.0, 10), DomainError);
  CHECK_THROWS_AS(harmonic_spectrum(x, 20e3, 50.0, 200), DomainError);
  CHECK_NOTHROW(harmonic_spectrum(x, 20e3, 50.0, 199));
  CHECK_THROWS_AS(harmonic_spectrum(x, 20e3, 50.0, 0), DomainError);
  CHECK_THROWS_AS(harmonic_spectrum(std::vector<double>{}, 20e3, 50.0, 1), DomainError);
}

TEST_CASE("thd definition") {
  HarmonicSpectrum sp;
  sp.f0 = 50.0;
  sp.magnitudes = {1.0, 0.0, 0.0, 0.0};
  sp.phases.assign(4, 0.0);
  CHECK(thd(sp, 4) == 0.0);
  sp.magnitudes = {1.0, 0.0, 1.0, 0.0};
  CHECK(thd(sp, 4) == doctest::Approx(1.0));
  CHECK(thd(sp, 2) == 0.0);
  sp.magnitudes = {0.0, 0.0, 1.0, 0.0};
  CHECK_THROWS_AS(thd(sp, 4), DegenerateFundamentalError);
  CHECK_THROWS_AS(thd(sp, 5), DomainError);
}

TEST_CASE("Bessel inequality and scale invariance on a random record") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise(0.0, 1.0);
  const std::size_t per = 1000;
  std::vector<double> x(per * 3);
  for (double &v : x)
    v = noise(rng);
  const auto sp = harmonic_spectrum(x, 50e3, 50.0, 400);
  double power = sp.dc * sp.dc;
  for (double h : sp.magnitudes)
    power += 0.5 * h * h;
  double ms = 0.0;
  for (double v : x)
    ms += v * v;
  ms /= static_cast<double>(x.size());
  CHECK(power <= ms * (1.0 + 1e-9));

  std::vector<double> y(x);
  for (double &v : y)
    v *= -4.5;
  const auto sy = harmonic_spectrum(y, 50e3, 50.0, 400);
  CHECK(thd(sy, 400) == doctest::Approx(thd(sp, 400)).epsilon(1e-12));
}

TEST_CASE("SHE staircase: numerical THD agrees with the closed form") {
  const auto a = SwitchingAngleSet::strict(
      {0.17175564972544963, 0.3557476303038789, 0.670301448414287, 1.0544650829502735});
  const auto w = synthesize_staircase(a, 10.0, 50.0, 2e5, 10);
  const auto sp = harmonic_spectrum(w, 200);
  CHECK(std::abs(100.0 * (thd(sp, 49) - analytic_thd(a, 49))) < 0.2);
  for (int n = 2; n <= 200; n += 2)
    CHECK(sp.magnitude(n) < 1e-6 * sp.magnitude(1));
  for (int n : {5, 7, 11})
    CHECK(sp.magnitude(n) < 0.005 * sp.magnitude(1));
}

TEST_CASE("spectrum CSV layout") {
  const auto x = sine(2.0, 50.0, 20e3, 2);
  const auto sp = harmonic_spectrum(x, 20e3, 50.0, 3);
  const std::string csv = spectrum_csv(sp, 3);
  CHECK(csv.rfind("order,freq_hz,magnitude\n1,50,", 0) == 0);
  CHECK(csv.find("\n3,150,") != std::string::npos);
  CHECK(csv.find("# thd_pct=") != std::string::npos);
  CHECK(csv.substr(csv.size() - 13) == ",max_order=3\n");
}

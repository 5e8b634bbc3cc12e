#include "sheforge/error.hpp"
#include "sheforge/harmonics.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

using namespace sheforge;

namespace {

const std::vector<double> kSolved08{0.17175564972544963, 0.3557476303038789, 0.670301448414287,
                                    1.0544650829502735};

// Fourier sine coefficient of the quarter-wave staircase by midpoint
// integration over the positive half cycle: b_n = (2/pi) int_0^pi f sin(nx).
double integrate_harmonic(const std::vector<double> &angles, double vdc, int n) {
  const int steps = 400000;
  const double dx = std::numbers::pi / steps;
  double sum = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double x = (i + 0.5) * dx;
    int level = 0;
    for (double a : angles)
      level += (x > a && x < std::numbers::pi - a);
    sum += vdc * level * std::sin(n * x);
  }
  return 2.0 / std::numbers::pi * sum * dx;
}

} // namespace

TEST_CASE("level count and bridge count") {
  CHECK(level_count(4) == 9);
  CHECK(level_count(1) == 3);
  CHECK(bridges_for_levels(9) == 4);
  CHECK_THROWS_AS(bridges_for_levels(8), DomainError);
  CHECK_THROWS_AS(level_count(0), DomainError);
}

TEST_CASE("strict angle sets reject boundary and unordered values") {
  CHECK_NOTHROW(SwitchingAngleSet::strict({0.1, 0.2, 0.3}));
  CHECK_THROWS_AS(SwitchingAngleSet::strict({0.2, 0.1}), DomainError);
  CHECK_THROWS_AS(SwitchingAngleSet::strict({0.0, 0.1}), DomainError);
  CHECK_THROWS_AS(SwitchingAngleSet::strict({0.1, kHalfPi}), DomainError);
  CHECK_THROWS_AS(SwitchingAngleSet::strict({0.1, 0.1}), DomainError);
  CHECK_THROWS_AS(SwitchingAngleSet::strict({}), DomainError);
  CHECK_NOTHROW(SwitchingAngleSet::relaxed({0.0, 0.0, 0.0}));
  const std::vector<double> deg{10.0, 20.0};
  const auto s = SwitchingAngleSet::from_degrees(deg);
  CHECK(s.degrees()[1] == doctest::Approx(20.0).epsilon(1e-14));
}

TEST_CASE("harmonic amplitude matches numerical Fourier integration") {
  const auto a = SwitchingAngleSet::strict(kSolved08);
  for (int n : {1, 3, 5, 7, 9, 11, 13, 49}) {
    CAPTURE(n);
    CHECK(std::abs(harmonic_amplitude(a, 10.0, n) - integrate_harmonic(kSolved08, 10.0, n)) < 1e-4);
  }
  for (int n : {2, 4, 6, 10, 50})
    CHECK(harmonic_amplitude(a, 10.0, n) == 0.0);
  CHECK_THROWS_AS(harmonic_amplitude(a, 10.0, 0), DomainError);
}

TEST_CASE("square wave: all angles zero gives 4 s vdc / (n pi)") {
  const auto sq = SwitchingAngleSet::relaxed({0.0, 0.0, 0.0, 0.0});
  for (int n = 1; n < 30; n += 2)
    CHECK(harmonic_amplitude(sq, 10.0, n) == doctest::Approx(160.0 / (n * std::numbers::pi)).epsilon(1e-14));
  // THD of the odd partial sum: sqrt(sum_{n=3,5..49} 1/n^2).
  double sum = 0.0;
  for (int n = 3; n <= 49; n += 2)
    sum += 1.0 / (n * n);
  CHECK(analytic_thd(sq, 49) == doctest::Approx(std::sqrt(sum)).epsilon(1e-13));
  CHECK(analytic_thd(sq, 49) == doctest::Approx(0.473).epsilon(1e-3));
}

TEST_CASE("analytic THD properties") {
  const auto a = SwitchingAngleSet::strict(kSolved08);
  double last = 0.0;
  for (int n = 1; n <= 99; ++n) {
    const double t = analytic_thd(a, n);
    CHECK(t >= last);
    last = t;
  }
  CHECK(analytic_thd(a, 1) == 0.0);
  // Up to order 11 only the triplens 3 and 9 survive.
  const double h1 = harmonic_amplitude(a, 1.0, 1);
  const double h3 = harmonic_amplitude(a, 1.0, 3);
  const double h9 = harmonic_amplitude(a, 1.0, 9);
  CHECK(analytic_thd(a, 11) == doctest::Approx(std::hypot(h3, h9) / h1).epsilon(1e-12));
  // A single step at 90 degrees has no fundamental.
  CHECK_THROWS_AS(analytic_thd(SwitchingAngleSet::relaxed({kHalfPi}), 49), DegenerateFundamentalError);
}

TEST_CASE("modulation index conversion round-trips") {
  for (double m : {0.1, 0.55, 0.8, 1.0}) {
    const double v1 = fundamental_from_modulation_index(m, 10.0, 4);
    CHECK(v1 == doctest::Approx(4.0 * 4 * 10.0 * m / std::numbers::pi));
    CHECK(modulation_index_from_fundamental(v1, 10.0, 4) == doctest::Approx(m).epsilon(1e-15));
  }
  // Fundamental of the solved set equals the requested index.
  const auto a = SwitchingAngleSet::strict(kSolved08);
  CHECK(modulation_index_from_fundamental(harmonic_amplitude(a, 10.0, 1), 10.0, 4) ==
        doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("staircase synthesis") {
  const auto a = SwitchingAngleSet::strict(kSolved08);
  const WaveformTrace w = synthesize_staircase(a, 10.0, 50.0, 2e5, 10);
  REQUIRE(w.samples.size() == 40000);
  CHECK(w.time(4000) == doctest::Approx(0.02));

  std::set<double> values(w.samples.begin(), w.samples.end());
  CHECK(values.size() == 9);
  CHECK(*values.begin() == -40.0);
  CHECK(*values.rbegin() == 40.0);

  // Half-wave antisymmetry and quarter-wave symmetry, sample-exact.
  const std::size_t P = 4000;
  for (std::size_t i = 0; i < P / 2; ++i) {
    CHECK(w.samples[i + P / 2] == -w.samples[i]);
    if (i > 0)
      CHECK(w.samples[i] == w.samples[P / 2 - i]);
  }
  // Periodic over cycles.
  for (std::size_t i = 0; i < P; ++i)
    CHECK(w.samples[i] == w.samples[i + 7 * P]);

  // Level by direct angle comparison at the sample's phase.
  for (std::size_t i = 0; i < P; i += 37) {
    const double x = 2.0 * std::numbers::pi * static_cast<double>(i) / P;
    const double y = std::fmod(x, std::numbers::pi);
    int level = 0;
    for (double t : kSolved08)
      level += (y >= t && y <= std::numbers::pi - t);
    if (x >= std::numbers::pi)
      level = -level;
    CHECK(staircase_level_at(kSolved08, P, static_cast<std::int64_t>(i)) == level);
  }

  // Scaling vdc scales every sample.
  const WaveformTrace w2 = synthesize_staircase(a, 25.0, 50.0, 2e5, 10);
  for (std::size_t i = 0; i < w.samples.size(); i += 101)
    CHECK(w2.samples[i] == doctest::Approx(2.5 * w.samples[i]));
}

TEST_CASE("staircase synthesis preconditions") {
  const auto a = SwitchingAngleSet::strict(kSolved08);
  CHECK_THROWS_AS(synthesize_staircase(a, 10.0, 50.0, 9000.0, 10), DomainError);
  CHECK_THROWS_AS(synthesize_staircase(a, 10.0, 50.0, 200010.5, 10), DomainError);
  CHECK_THROWS_AS(synthesize_staircase(a, 10.0, 50.0, 2e5, 0), DomainError);
  CHECK_THROWS_AS(synthesize_staircase(SwitchingAngleSet::relaxed({0.0, 0.1, 0.2, 0.3}), 10.0, 50.0, 2e5, 1),
                  DomainError);
}

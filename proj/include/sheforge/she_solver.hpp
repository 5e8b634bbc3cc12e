#pragma once

#include "sheforge/harmonics.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sheforge {

/// Harmonic orders driven to zero, one per bridge beyond the first.
class HarmonicSet {
public:
  explicit HarmonicSet(std::vector<int> orders);
  static HarmonicSet default_set() { return HarmonicSet({5, 7, 11}); }
  static HarmonicSet triplen_set() { return HarmonicSet({3, 5, 7}); }
  // Parses "5,7,11".
  static HarmonicSet parse(const std::string &text);

  std::span<const int> orders() const { return orders_; }
  int size() const { return static_cast<int>(orders_.size()); }
  int bridges() const { return size() + 1; }
  std::string to_string() const;

private:
  std::vector<int> orders_;
};

struct AngleSolution {
  double m = 0.0;
  std::vector<double> angles; // radians; best iterate when not converged
  double residual_norm = 0.0; // infinity norm
  int iterations = 0;
  bool converged = false;

  SwitchingAngleSet angle_set() const { return SwitchingAngleSet::relaxed(angles); }
};

struct NewtonOptions {
  double tol = 1e-10;
  int max_iter = 50;
  int restarts = 20;
  std::uint64_t seed = 42;
};

/// r0 = sum cos(theta_k) - s m, r_i = sum cos(n_i theta_k).
std::vector<double> residual_vector(std::span<const double> angles, double m, const HarmonicSet &hset);

/// Row-major s x s Jacobian of residual_vector with respect to the angles.
std::vector<double> jacobian(std::span<const double> angles, const HarmonicSet &hset);

// Natural-sampling starting point arcsin((2k-1)/(2s)).
std::vector<double> default_guess(int bridges);

/// Newton-Raphson from a single starting point: damped steps, projected
/// onto [eps, pi/2 - eps] and re-sorted after every update. Never throws for
/// non-convergence; the result carries the best iterate.
AngleSolution newton_iterate(double m, const HarmonicSet &hset, std::vector<double> start,
                             const NewtonOptions &opt);

/// Full solve: the given (or default) guess, then seeded jittered restarts,
/// then a coarse grid scan. Throws InfeasibleError unless 0 < m < 1.
AngleSolution newton_solve(double m, const HarmonicSet &hset,
                           std::optional<std::vector<double>> guess = std::nullopt,
                           const NewtonOptions &opt = {});

// Solves the dense system a x = b in place by partial-pivot elimination.
// Returns false when a pivot vanishes.
bool solve_linear(std::vector<double> &a, std::vector<double> &b, int n);

} // namespace sheforge

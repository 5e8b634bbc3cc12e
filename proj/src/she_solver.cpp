#include "sheforge/she_solver.hpp"

#include "sheforge/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace sheforge {

namespace {

constexpr double kEdge = 1e-6; // projection margin, rad

double inf_norm(std::span<const double> v) {
  double n = 0.0;
  for (double x : v) {
    if (!std::isfinite(x))
      return std::numeric_limits<double>::infinity();
    n = std::max(n, std::abs(x));
  }
  return n;
}

void project(std::vector<double> &x) {
  for (double &v : x)
    v = std::clamp(v, kEdge, kHalfPi - kEdge);
  std::sort(x.begin(), x.end());
}

void check_dims(std::span<const double> angles, const HarmonicSet &hset) {
  if (static_cast<int>(angles.size()) != hset.bridges())
    throw DomainError("harmonic set of " + std::to_string(hset.size()) + " orders needs " +
                      std::to_string(hset.bridges()) + " angles, got " +
                      std::to_string(angles.size()));
}

// Picks grid resolution so that the number of ascending combinations stays
// manageable for larger bridge counts.
int grid_points_for(int s) {
  int g = 44;
  auto combos = [](int n, int k) {
    double c = 1.0;
    for (int i = 0; i < k; ++i)
      c = c * (n - i) / (i + 1);
    return c;
  };
  while (g > s && combos(g, s) > 2e5)
    --g;
  return g;
}

// Enumerates ascending grid combinations and keeps the `keep` points with the
// smallest residual norm. Cosines are tabulated once per grid value.
std::vector<std::vector<double>> grid_candidates(double m, const HarmonicSet &hset, int keep) {
  const int s = hset.bridges();
  const int g = std::max(grid_points_for(s), s);
  const auto G = static_cast<std::size_t>(g);
  std::vector<double> grid(G);
  for (std::size_t i = 0; i < G; ++i)
    grid[i] = kHalfPi * static_cast<double>(i + 1) / (g + 1);

  // table[row * G + i]: row 0 is the fundamental, row j the j-th eliminated order.
  const auto rows = static_cast<std::size_t>(s);
  std::vector<double> table(rows * G);
  for (std::size_t i = 0; i < G; ++i) {
    table[i] = std::cos(grid[i]);
    for (std::size_t j = 1; j < rows; ++j)
      table[j * G + i] = std::cos(hset.orders()[j - 1] * grid[i]);
  }

  std::vector<std::pair<double, std::vector<int>>> best;
  std::vector<int> idx(rows);
  for (std::size_t k = 0; k < rows; ++k)
    idx[k] = static_cast<int>(k);
  while (true) {
    double n = 0.0;
    for (std::size_t j = 0; j < rows; ++j) {
      double acc = j == 0 ? -s * m : 0.0;
      for (int i : idx)
        acc += table[j * G + static_cast<std::size_t>(i)];
      n = std::max(n, std::abs(acc));
      if (static_cast<int>(best.size()) == keep && n >= best.back().first)
        break;
    }
    if (static_cast<int>(best.size()) < keep || n < best.back().first) {
      auto pos = std::upper_bound(best.begin(), best.end(), n,
                                  [](double v, const auto &b) { return v < b.first; });
      best.emplace(pos, n, idx);
      if (static_cast<int>(best.size()) > keep)
        best.pop_back();
    }
    int k = s - 1;
    while (k >= 0 && idx[static_cast<std::size_t>(k)] == g - s + k)
      --k;
    if (k < 0)
      break;
    ++idx[static_cast<std::size_t>(k)];
    for (int j = k + 1; j < s; ++j)
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
  std::vector<std::vector<double>> out;
  for (const auto &b : best) {
    std::vector<double> x;
    for (int i : b.second)
      x.push_back(grid[static_cast<std::size_t>(i)]);
    out.push_back(std::move(x));
  }
  return out;
}

} // namespace

HarmonicSet::HarmonicSet(std::vector<int> orders) : orders_(std::move(orders)) {
  std::sort(orders_.begin(), orders_.end());
  for (std::size_t i = 0; i < orders_.size(); ++i) {
    if (orders_[i] < 2)
      throw DomainError("eliminated harmonic orders must be >= 2");
    if (i > 0 && orders_[i] == orders_[i - 1])
      throw DomainError("duplicate harmonic order " + std::to_string(orders_[i]));
  }
}

HarmonicSet HarmonicSet::parse(const std::string &text) {
  std::vector<int> v;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty())
      continue;
    try {
      std::size_t pos = 0;
      v.push_back(std::stoi(tok, &pos));
      if (pos != tok.size())
        throw std::invalid_argument(tok);
    } catch (const std::exception &) {
      throw DomainError("bad harmonic order '" + tok + "'");
    }
  }
  return HarmonicSet(std::move(v));
}

std::string HarmonicSet::to_string() const {
  std::string s;
  for (std::size_t i = 0; i < orders_.size(); ++i) {
    if (i)
      s += ',';
    s += std::to_string(orders_[i]);
  }
  return s;
}

std::vector<double> residual_vector(std::span<const double> angles, double m, const HarmonicSet &hset) {
  check_dims(angles, hset);
  const int s = hset.bridges();
  std::vector<double> r(static_cast<std::size_t>(s), 0.0);
  for (double a : angles)
    r[0] += std::cos(a);
  r[0] -= s * m;
  for (int i = 0; i < hset.size(); ++i) {
    const int n = hset.orders()[static_cast<std::size_t>(i)];
    double sum = 0.0;
    for (double a : angles)
      sum += std::cos(n * a);
    r[static_cast<std::size_t>(i + 1)] = sum;
  }
  return r;
}

std::vector<double> jacobian(std::span<const double> angles, const HarmonicSet &hset) {
  check_dims(angles, hset);
  const auto s = static_cast<std::size_t>(hset.bridges());
  std::vector<double> j(s * s);
  for (std::size_t k = 0; k < s; ++k)
    j[k] = -std::sin(angles[k]);
  for (std::size_t i = 1; i < s; ++i) {
    const double n = hset.orders()[i - 1];
    for (std::size_t k = 0; k < s; ++k)
      j[i * s + k] = -n * std::sin(n * angles[k]);
  }
  return j;
}

std::vector<double> default_guess(int bridges) {
  std::vector<double> g(static_cast<std::size_t>(bridges));
  for (int k = 1; k <= bridges; ++k)
    g[static_cast<std::size_t>(k - 1)] = std::asin((2.0 * k - 1.0) / (2.0 * bridges));
  return g;
}

bool solve_linear(std::vector<double> &a, std::vector<double> &b, int n) {
  const auto N = static_cast<std::size_t>(n);
  for (std::size_t col = 0; col < N; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < N; ++r)
      if (std::abs(a[r * N + col]) > std::abs(a[piv * N + col]))
        piv = r;
    if (!(std::abs(a[piv * N + col]) > 1e-14))
      return false;
    if (piv != col) {
      for (std::size_t c = 0; c < N; ++c)
        std::swap(a[col * N + c], a[piv * N + c]);
      std::swap(b[col], b[piv]);
    }
    for (std::size_t r = col + 1; r < N; ++r) {
      const double f = a[r * N + col] / a[col * N + col];
      for (std::size_t c = col; c < N; ++c)
        a[r * N + c] -= f * a[col * N + c];
      b[r] -= f * b[col];
    }
  }
  for (std::size_t i = N; i-- > 0;) {
    double acc = b[i];
    for (std::size_t c = i + 1; c < N; ++c)
      acc -= a[i * N + c] * b[c];
    b[i] = acc / a[i * N + i];
  }
  return true;
}

AngleSolution newton_iterate(double m, const HarmonicSet &hset, std::vector<double> start,
                             const NewtonOptions &opt) {
  check_dims(start, hset);
  const int s = hset.bridges();
  std::vector<double> x = std::move(start);
  project(x);
  std::vector<double> r = residual_vector(x, m, hset);
  double norm = inf_norm(r);

  AngleSolution sol{m, x, norm, 0, false};
  for (int it = 0; it <= opt.max_iter; ++it) {
    sol.iterations = it;
    if (norm < opt.tol && SwitchingAngleSet::satisfies_strict(x)) {
      sol.angles = x;
      sol.residual_norm = norm;
      sol.converged = true;
      return sol;
    }
    if (it == opt.max_iter || !std::isfinite(norm))
      break;

    std::vector<double> jac = jacobian(x, hset);
    std::vector<double> step(r.size());
    for (std::size_t i = 0; i < r.size(); ++i)
      step[i] = -r[i];
    if (!solve_linear(jac, step, s))
      break;

    double scale = 1.0;
    bool accepted = false;
    for (int halving = 0; halving <= 10; ++halving, scale *= 0.5) {
      std::vector<double> trial = x;
      for (std::size_t k = 0; k < trial.size(); ++k)
        trial[k] += scale * step[k];
      project(trial);
      std::vector<double> rt = residual_vector(trial, m, hset);
      const double nt = inf_norm(rt);
      if (nt < norm) {
        x = std::move(trial);
        r = std::move(rt);
        norm = nt;
        accepted = true;
        break;
      }
    }
    if (!accepted)
      break;
    sol.angles = x;
    sol.residual_norm = norm;
  }
  sol.angles = x;
  sol.residual_norm = norm;
  return sol;
}

AngleSolution newton_solve(double m, const HarmonicSet &hset, std::optional<std::vector<double>> guess,
                           const NewtonOptions &opt) {
  if (!(m > 0.0) || !(m < 1.0))
    throw InfeasibleError("modulation index " + std::to_string(m) +
                          " outside (0, 1): sum of interior cosines cannot reach s*m");
  if (!(opt.tol > 0.0) || opt.max_iter < 1)
    throw DomainError("newton_solve needs tol > 0 and max_iter >= 1");
  const int s = hset.bridges();

  AngleSolution best;
  best.m = m;
  best.residual_norm = std::numeric_limits<double>::infinity();
  int total_iter = 0;
  auto attempt = [&](std::vector<double> start) {
    AngleSolution r = newton_iterate(m, hset, std::move(start), opt);
    total_iter += r.iterations;
    if (r.converged || r.residual_norm < best.residual_norm || best.angles.empty())
      best = r;
    best.iterations = total_iter;
    return best.converged;
  };

  if (attempt(guess ? *guess : default_guess(s)))
    return best;

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> jitter(-0.2, 0.2);
  const std::vector<double> base = default_guess(s);
  for (int k = 0; k < opt.restarts; ++k) {
    std::vector<double> g = base;
    for (double &v : g)
      v += jitter(rng);
    if (attempt(std::move(g)))
      return best;
  }

  for (auto &g : grid_candidates(m, hset, 12))
    if (attempt(std::move(g)))
      return best;
  return best;
}

} // namespace sheforge

#pragma once

// Brute-force LP oracle: enumerates every active set of n constraints
// (rows and bounds), solves the square system, keeps feasible points and
// takes the best objective. Unboundedness is detected by adding a box
// |z| <= M at two sizes: a bounded LP has the same optimum for both.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "ofae/lpsolve.hpp"

namespace ofae::oracle {

struct OracleResult {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0.0;
};

namespace oracle_detail {

struct Halfspace {
  std::vector<double> a;  // a . z >= b
  double b = 0.0;
};

inline std::optional<std::vector<double>> solve_square(std::vector<std::vector<double>> m, std::vector<double> r) {
  const std::size_t n = r.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(m[i][k]) > std::abs(m[piv][k])) piv = i;
    if (std::abs(m[piv][k]) < 1e-10) return std::nullopt;
    std::swap(m[piv], m[k]);
    std::swap(r[piv], r[k]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = m[i][k] / m[k][k];
      for (std::size_t j = k; j < n; ++j) m[i][j] -= f * m[k][j];
      r[i] -= f * r[k];
    }
  }
  std::vector<double> z(n);
  for (std::size_t k = n; k-- > 0;) {
    double s = r[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= m[k][j] * z[j];
    z[k] = s / m[k][k];
  }
  return z;
}

inline std::optional<double> best_vertex(const std::vector<Halfspace>& hs, const std::vector<double>& c) {
  const std::size_t n = c.size();
  const std::size_t total = hs.size();
  if (total < n) return std::nullopt;
  std::optional<double> best;
  std::vector<std::size_t> pick(n);
  for (std::size_t i = 0; i < n; ++i) pick[i] = i;
  for (;;) {
    std::vector<std::vector<double>> m(n);
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = hs[pick[i]].a;
      r[i] = hs[pick[i]].b;
    }
    if (auto z = solve_square(std::move(m), std::move(r))) {
      bool feasible = true;
      for (const auto& h : hs) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += h.a[j] * (*z)[j];
        if (s < h.b - 1e-7 * (1.0 + std::abs(h.b))) {
          feasible = false;
          break;
        }
      }
      if (feasible) {
        double obj = 0.0;
        for (std::size_t j = 0; j < n; ++j) obj += c[j] * (*z)[j];
        if (!best || obj < *best) best = obj;
      }
    }
    // next combination
    std::size_t i = n;
    while (i > 0 && pick[i - 1] == total - n + (i - 1)) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < n; ++j) pick[j] = pick[j - 1] + 1;
  }
  return best;
}

inline std::vector<Halfspace> halfspaces(const LpProblem& p, double big) {
  const std::size_t n = p.objective.size();
  std::vector<Halfspace> hs;
  for (std::size_t i = 0; i < p.rhs.size(); ++i) {
    Halfspace h{std::vector<double>(n), p.rhs[i]};
    for (std::size_t j = 0; j < n; ++j) h.a[j] = p.rows(i, j);
    hs.push_back(std::move(h));
  }
  for (std::size_t j = 0; j < n; ++j) {
    const double lo = p.lower ? (*p.lower)[j] : 0.0;
    const double hi = p.upper ? (*p.upper)[j] : kInf;
    Halfspace l{std::vector<double>(n, 0.0), std::isfinite(lo) ? lo : -big};
    l.a[j] = 1.0;
    Halfspace u{std::vector<double>(n, 0.0), std::isfinite(hi) ? -hi : -big};
    u.a[j] = -1.0;
    hs.push_back(std::move(l));
    hs.push_back(std::move(u));
  }
  return hs;
}

}  // namespace oracle_detail

inline OracleResult vertex_enumeration(const LpProblem& p) {
  using namespace oracle_detail;
  const double m1 = 1e6;
  const double m2 = 2e6;
  const auto a = best_vertex(halfspaces(p, m1), p.objective);
  if (!a) return {LpStatus::Infeasible, 0.0};
  const auto b = best_vertex(halfspaces(p, m2), p.objective);
  if (!b || std::abs(*a - *b) > 1e-6 * (1.0 + std::abs(*a))) return {LpStatus::Unbounded, 0.0};
  return {LpStatus::Optimal, *a};
}

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

/// Random LP with up to 6 variables and 10 rows, entries in [-3, 3]. Every
/// third instance also gets mixed variable bounds.
inline LpProblem random_lp(Rng& rng, int instance) {
  const std::size_t n = 1 + rng.below(6);
  const std::size_t m = 1 + rng.below(10);
  LpProblem p;
  p.objective.resize(n);
  for (auto& c : p.objective) c = uniform(rng, -3, 3);
  p.rows = Matrix(m, n);
  p.rhs.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) p.rows(i, j) = uniform(rng, -3, 3);
    p.rhs[i] = uniform(rng, -3, 3);
  }
  if (instance % 3 == 2) {
    Vector lo(n), hi(n);
    for (std::size_t j = 0; j < n; ++j) {
      switch (rng.below(4)) {
        case 0: lo[j] = 0; hi[j] = kInf; break;
        case 1: lo[j] = -kInf; hi[j] = kInf; break;
        case 2: lo[j] = uniform(rng, -3, 0); hi[j] = lo[j] + uniform(rng, 0.5, 4); break;
        default: lo[j] = -kInf; hi[j] = uniform(rng, -1, 3); break;
      }
    }
    p.lower = lo;
    p.upper = hi;
  }
  return p;
}

}  // namespace ofae::oracle

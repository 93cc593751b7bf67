#pragma once

// Dense two-phase simplex and the L1 decode built on it.
//
// Problem form:  minimize c^T z  subject to  G z >= h,  lower <= z <= upper.
// Missing bounds default to lower = 0, upper = +inf; infinite entries are
// allowed (free variables are split internally).
//
// Fixed tolerances: pivot 1e-9, phase-1 residual / feasibility 1e-7.
// Entering variables follow Dantzig's rule; after a degenerate pivot the
// solver switches to Bland's rule until the objective moves again.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "ofae/error.hpp"
#include "ofae/numkit.hpp"

namespace ofae {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct LpProblem {
  Vector objective;
  Matrix rows;  // G
  Vector rhs;   // h, meaning G z >= h
  std::optional<Vector> lower;
  std::optional<Vector> upper;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

inline std::string_view to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "Optimal";
    case LpStatus::Infeasible: return "Infeasible";
    case LpStatus::Unbounded: return "Unbounded";
    case LpStatus::IterationLimit: return "IterationLimit";
  }
  return "?";
}

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  Vector z;
  double objective_value = 0.0;
  double max_violation = 0.0;
  Vector duals;  // one nonnegative multiplier per row of G (Optimal only)
  std::size_t iterations = 0;
};

namespace detail {

inline constexpr double kPivotTol = 1e-9;
inline constexpr double kFeasTol = 1e-7;

// Standard-form tableau:  A y (=) rhs with y >= 0, basis tracked per row.
class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols)
      : m_(rows), n_(cols), a_(rows * cols, 0.0), rhs_(rows, 0.0), basis_(rows, 0), obj_(cols, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return a_[r * n_ + c]; }
  double at(std::size_t r, std::size_t c) const { return a_[r * n_ + c]; }

  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }
  std::vector<double>& rhs() { return rhs_; }
  std::vector<std::size_t>& basis() { return basis_; }
  std::vector<double>& obj() { return obj_; }
  double& obj_value() { return obj_value_; }

  void pivot(std::size_t r, std::size_t c) {
    double* prow = &a_[r * n_];
    const double inv = 1.0 / prow[c];
    nz_.clear();
    for (std::size_t j = 0; j < n_; ++j) {
      if (prow[j] != 0.0) {
        prow[j] *= inv;
        nz_.push_back(j);
      }
    }
    prow[c] = 1.0;
    rhs_[r] *= inv;

    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* row = &a_[i * n_];
      const double f = row[c];
      if (f == 0.0) continue;
      for (std::size_t j : nz_) row[j] -= f * prow[j];
      row[c] = 0.0;
      rhs_[i] -= f * rhs_[r];
      if (rhs_[i] < 0.0 && rhs_[i] > -1e-12) rhs_[i] = 0.0;
    }
    const double f = obj_[c];
    if (f != 0.0) {
      for (std::size_t j : nz_) obj_[j] -= f * prow[j];
      obj_[c] = 0.0;
      obj_value_ -= f * rhs_[r];
    }
    basis_[r] = c;
  }

 private:
  std::size_t m_;
  std::size_t n_;
  std::vector<double> a_;
  std::vector<double> rhs_;
  std::vector<std::size_t> basis_;
  std::vector<double> obj_;  // reduced costs
  double obj_value_ = 0.0;   // negated objective, standard tableau convention
  std::vector<std::size_t> nz_;
};

enum class PhaseResult { Optimal, Unbounded, IterationLimit };

// Minimizes the tableau's objective row over columns < allowed_cols.
inline PhaseResult run_simplex(Tableau& t, std::size_t allowed_cols, std::size_t& iterations,
                               std::size_t max_iterations) {
  bool bland = false;
  for (;;) {
    auto& obj = t.obj();
    std::size_t enter = allowed_cols;
    double best = -kPivotTol;
    for (std::size_t j = 0; j < allowed_cols; ++j) {
      if (obj[j] < best) {
        enter = j;
        if (bland) break;
        best = obj[j];
      }
    }
    if (enter == allowed_cols) return PhaseResult::Optimal;
    if (iterations >= max_iterations) return PhaseResult::IterationLimit;

    auto& rhs = t.rhs();
    auto& basis = t.basis();
    std::size_t leave = t.rows();
    double best_ratio = kInf;
    for (std::size_t i = 0; i < t.rows(); ++i) {
      const double aij = t.at(i, enter);
      if (aij <= kPivotTol) continue;
      const double ratio = std::max(rhs[i], 0.0) / aij;
      if (leave == t.rows() || ratio < best_ratio - 1e-12 * (1.0 + best_ratio)) {
        leave = i;
        best_ratio = ratio;
      } else if (ratio <= best_ratio + 1e-12 * (1.0 + best_ratio)) {
        const bool take = bland ? basis[i] < basis[leave] : aij > t.at(leave, enter);
        if (take) {
          leave = i;
          best_ratio = std::min(best_ratio, ratio);
        }
      }
    }
    if (leave == t.rows()) return PhaseResult::Unbounded;

    bland = best_ratio <= 1e-12;
    t.pivot(leave, enter);
    ++iterations;
  }
}

// Internal standard-form image of one user variable.
struct VarMap {
  std::size_t col = 0;
  double sign = 1.0;  // z = shift + sign * y_col (- y_col2 when split)
  double shift = 0.0;
  std::optional<std::size_t> neg_col;
};

}  // namespace detail

inline LpSolution solve_lp(const LpProblem& prob) {
  const std::size_t n = prob.objective.size();
  const std::size_t m = prob.rhs.size();
  if (prob.rows.rows() != m || (m > 0 && prob.rows.cols() != n) ||
      (prob.lower && prob.lower->size() != n) || (prob.upper && prob.upper->size() != n)) {
    throw Error(ErrorKind::DimensionMismatch, "solve_lp: inconsistent problem dimensions");
  }

  auto lo = [&](std::size_t j) { return prob.lower ? (*prob.lower)[j] : 0.0; };
  auto hi = [&](std::size_t j) { return prob.upper ? (*prob.upper)[j] : kInf; };

  // Map variables into y >= 0 and collect extra bound rows (-y <= -(range)).
  std::vector<detail::VarMap> map(n);
  std::size_t ny = 0;
  std::vector<std::pair<std::size_t, double>> bound_rows;  // (y col, upper range)
  for (std::size_t j = 0; j < n; ++j) {
    const double l = lo(j);
    const double u = hi(j);
    auto& vm = map[j];
    vm.col = ny++;
    if (std::isfinite(l)) {
      vm.shift = l;
      if (std::isfinite(u)) bound_rows.emplace_back(vm.col, u - l);
    } else if (std::isfinite(u)) {
      vm.shift = u;
      vm.sign = -1.0;
    } else {
      vm.neg_col = ny++;
    }
  }

  const std::size_t mr = m + bound_rows.size();
  // Row data in y-space: gy * y >= hy
  Matrix gy(mr, ny);
  Vector hy(mr);
  for (std::size_t i = 0; i < m; ++i) {
    double h = prob.rhs[i];
    for (std::size_t j = 0; j < n; ++j) {
      const double g = prob.rows(i, j);
      if (g == 0.0) continue;
      h -= g * map[j].shift;
      gy(i, map[j].col) += g * map[j].sign;
      if (map[j].neg_col) gy(i, *map[j].neg_col) -= g;
    }
    hy[i] = h;
  }
  for (std::size_t k = 0; k < bound_rows.size(); ++k) {
    gy(m + k, bound_rows[k].first) = -1.0;
    hy[m + k] = -bound_rows[k].second;
  }
  Vector cy(ny, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    cy[map[j].col] += prob.objective[j] * map[j].sign;
    if (map[j].neg_col) cy[*map[j].neg_col] -= prob.objective[j];
  }

  // Columns: y (ny) | surplus (mr) | artificials (one per row with h > 0).
  std::vector<std::size_t> art_rows;
  for (std::size_t i = 0; i < mr; ++i)
    if (hy[i] > 0.0) art_rows.push_back(i);
  const std::size_t n_struct = ny + mr;
  const std::size_t n_cols = n_struct + art_rows.size();
  detail::Tableau t(mr, n_cols);
  {
    std::size_t a = 0;
    for (std::size_t i = 0; i < mr; ++i) {
      const bool needs_art = hy[i] > 0.0;
      const double s = needs_art ? 1.0 : -1.0;
      for (std::size_t j = 0; j < ny; ++j) t.at(i, j) = s * gy(i, j);
      t.at(i, ny + i) = -s;
      t.rhs()[i] = s * hy[i];
      if (needs_art) {
        t.at(i, n_struct + a) = 1.0;
        t.basis()[i] = n_struct + a;
        ++a;
      } else {
        t.basis()[i] = ny + i;
      }
    }
  }

  LpSolution sol;
  const std::size_t max_iter = 50 * (mr + n_struct);

  if (!art_rows.empty()) {
    // phase 1: minimize the sum of artificials
    auto& obj = t.obj();
    std::fill(obj.begin(), obj.end(), 0.0);
    double w = 0.0;
    for (std::size_t i : art_rows) {
      for (std::size_t j = 0; j < n_struct; ++j) obj[j] -= t.at(i, j);
      w -= t.rhs()[i];
    }
    t.obj_value() = w;
    const auto r = detail::run_simplex(t, n_cols, sol.iterations, max_iter);
    if (r == detail::PhaseResult::IterationLimit) {
      sol.status = LpStatus::IterationLimit;
      return sol;
    }
    if (-t.obj_value() > detail::kFeasTol) {
      sol.status = LpStatus::Infeasible;
      return sol;
    }
    // drive remaining artificials out of the basis where possible
    for (std::size_t i = 0; i < mr; ++i) {
      if (t.basis()[i] < n_struct) continue;
      std::size_t best = n_struct;
      double best_abs = detail::kPivotTol;
      for (std::size_t j = 0; j < n_struct; ++j) {
        if (std::abs(t.at(i, j)) > best_abs) {
          best_abs = std::abs(t.at(i, j));
          best = j;
        }
      }
      if (best < n_struct) t.pivot(i, best);
    }
  }

  // phase 2
  {
    auto& obj = t.obj();
    std::fill(obj.begin(), obj.end(), 0.0);
    for (std::size_t j = 0; j < ny; ++j) obj[j] = cy[j];
    double v = 0.0;
    for (std::size_t i = 0; i < mr; ++i) {
      const std::size_t b = t.basis()[i];
      const double cb = b < ny ? cy[b] : 0.0;
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j < n_cols; ++j) obj[j] -= cb * t.at(i, j);
      v -= cb * t.rhs()[i];
    }
    t.obj_value() = v;
    const auto r = detail::run_simplex(t, n_struct, sol.iterations, max_iter);
    if (r == detail::PhaseResult::IterationLimit) {
      sol.status = LpStatus::IterationLimit;
      return sol;
    }
    if (r == detail::PhaseResult::Unbounded) {
      sol.status = LpStatus::Unbounded;
      return sol;
    }
  }

  Vector y(ny, 0.0);
  for (std::size_t i = 0; i < mr; ++i)
    if (t.basis()[i] < ny) y[t.basis()[i]] = std::max(t.rhs()[i], 0.0);

  sol.status = LpStatus::Optimal;
  sol.z.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    double z = map[j].shift + map[j].sign * y[map[j].col];
    if (map[j].neg_col) z -= y[*map[j].neg_col];
    sol.z[j] = z;
  }
  sol.objective_value = dot(prob.objective, sol.z);

  sol.duals.resize(m);
  for (std::size_t i = 0; i < m; ++i) sol.duals[i] = std::max(t.obj()[ny + i], 0.0);

  double viol = 0.0;
  for (std::size_t i = 0; i < m; ++i) viol = std::max(viol, prob.rhs[i] - dot(prob.rows.row(i), sol.z));
  for (std::size_t j = 0; j < n; ++j) {
    viol = std::max(viol, lo(j) - sol.z[j]);
    viol = std::max(viol, sol.z[j] - hi(j));
  }
  sol.max_violation = std::max(viol, 0.0);
  return sol;
}

// ---------------------------------------------------------------------------
// L1 decode

struct BoxSpec {
  std::optional<Vector> lo;
  std::optional<Vector> hi;

  static BoxSpec pixels(std::size_t p) { return {Vector(p, 0.0), Vector(p, 255.0)}; }
  bool empty() const { return !lo && !hi; }
};

struct L1Options {
  bool dedup = true;
};

struct L1Solution {
  Vector x;
  Vector x_plus;   // split formulation only
  Vector x_minus;  // split formulation only
  double objective = 0.0;
  double max_violation = 0.0;
  std::size_t rows_used = 0;
  bool split = false;
};

/// Removes rows of (a, b) that are bitwise duplicates of an earlier row.
inline std::pair<Matrix, Vector> dedup_rows(const Matrix& a, std::span<const double> b) {
  const std::size_t m = a.rows();
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  auto less = [&](std::size_t x, std::size_t y) {
    auto rx = a.row(x);
    auto ry = a.row(y);
    for (std::size_t j = 0; j < rx.size(); ++j)
      if (rx[j] != ry[j]) return rx[j] < ry[j];
    if (b[x] != b[y]) return b[x] < b[y];
    return x < y;
  };
  std::sort(order.begin(), order.end(), less);
  std::vector<bool> keep(m, true);
  for (std::size_t k = 1; k < m; ++k) {
    const std::size_t x = order[k - 1];
    const std::size_t y = order[k];
    auto rx = a.row(x);
    auto ry = a.row(y);
    if (b[x] == b[y] && std::equal(rx.begin(), rx.end(), ry.begin())) keep[y] = false;
  }
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < m; ++i)
    if (keep[i]) kept.push_back(i);
  Vector bk(kept.size());
  for (std::size_t k = 0; k < kept.size(); ++k) bk[k] = b[kept[k]];
  return {a.select_rows(kept), std::move(bk)};
}

namespace detail {

// min c^T z s.t. G z >= h, z >= 0 with c >= 0, solved through its dual
//   min -h^T u  s.t.  -G^T u >= -c,  u >= 0
// which is feasible at u = 0, so no phase 1 is needed and the tableau has one
// row per primal variable. The primal optimum is read off the dual's row
// multipliers.
inline LpSolution solve_nonneg_cost_primal(const Matrix& g, std::span<const double> h, std::span<const double> c) {
  const std::size_t m = g.rows();
  const std::size_t n = c.size();
  LpProblem dual;
  dual.objective.resize(m);
  for (std::size_t i = 0; i < m; ++i) dual.objective[i] = -h[i];
  dual.rows = Matrix(n, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) dual.rows(j, i) = -g(i, j);
  dual.rhs.resize(n);
  for (std::size_t j = 0; j < n; ++j) dual.rhs[j] = -c[j];

  LpSolution d = solve_lp(dual);
  LpSolution out;
  out.iterations = d.iterations;
  switch (d.status) {
    case LpStatus::Optimal: break;
    case LpStatus::Unbounded: out.status = LpStatus::Infeasible; return out;
    case LpStatus::Infeasible: out.status = LpStatus::Unbounded; return out;
    case LpStatus::IterationLimit: out.status = LpStatus::IterationLimit; return out;
  }
  out.status = LpStatus::Optimal;
  out.z = d.duals;
  out.objective_value = dot(c, out.z);
  double viol = 0.0;
  for (std::size_t i = 0; i < m; ++i) viol = std::max(viol, h[i] - dot(g.row(i), out.z));
  out.max_violation = viol;
  return out;
}

inline LpSolution solve_nonneg_cost_checked(const Matrix& g, std::span<const double> h, std::span<const double> c) {
  LpSolution s = solve_nonneg_cost_primal(g, h, c);
  if (s.status == LpStatus::Optimal && s.max_violation > kFeasTol) {
    // numerical breakdown on the dual route: fall back to the primal tableau
    LpProblem primal{Vector(c.begin(), c.end()), g, Vector(h.begin(), h.end()), std::nullopt, std::nullopt};
    s = solve_lp(primal);
  }
  return s;
}

}  // namespace detail

/// minimize |x|_1 subject to a x >= b and the optional box.
///
/// With a box whose lower bounds are all >= 0 the objective is simply sum(x)
/// over x - lo >= 0; otherwise x = x+ - x- with x+, x- >= 0 and the box (if
/// any) enters as extra rows. Throws InfeasibleCode when the system has no
/// solution and IterationLimit when the simplex cap is hit.
inline L1Solution solve_l1_detailed(const Matrix& a, std::span<const double> b, const BoxSpec& box = {},
                                    const L1Options& options = {}) {
  const std::size_t p = a.cols();
  if (a.rows() != b.size()) throw Error(ErrorKind::DimensionMismatch, "solve_l1: rows(a) != len(b)");
  if ((box.lo && box.lo->size() != p) || (box.hi && box.hi->size() != p)) {
    throw Error(ErrorKind::DimensionMismatch, "solve_l1: box dimension mismatch");
  }
  if (box.lo && box.hi)
    for (std::size_t j = 0; j < p; ++j)
      if ((*box.lo)[j] > (*box.hi)[j]) throw Error(ErrorKind::InfeasibleCode, "solve_l1: empty box");

  Matrix am = a;
  Vector bm(b.begin(), b.end());
  if (options.dedup && am.rows() > 1) std::tie(am, bm) = dedup_rows(am, bm);
  const std::size_t m = am.rows();

  L1Solution out;
  out.rows_used = m;
  const bool direct =
      box.lo && std::all_of(box.lo->begin(), box.lo->end(), [](double v) { return v >= 0.0; });

  LpSolution s;
  if (direct) {
    const Vector& lo = *box.lo;
    std::vector<std::size_t> upper;
    if (box.hi)
      for (std::size_t j = 0; j < p; ++j)
        if (std::isfinite((*box.hi)[j])) upper.push_back(j);
    Matrix g(m + upper.size(), p);
    Vector h(m + upper.size());
    for (std::size_t i = 0; i < m; ++i) {
      std::copy(am.row(i).begin(), am.row(i).end(), g.row(i).begin());
      h[i] = bm[i] - dot(am.row(i), lo);
    }
    for (std::size_t k = 0; k < upper.size(); ++k) {
      g(m + k, upper[k]) = -1.0;
      h[m + k] = -((*box.hi)[upper[k]] - lo[upper[k]]);
    }
    const Vector c(p, 1.0);
    s = detail::solve_nonneg_cost_checked(g, h, c);
    if (s.status == LpStatus::Optimal) {
      out.x.resize(p);
      for (std::size_t j = 0; j < p; ++j) {
        double v = lo[j] + std::max(s.z[j], 0.0);
        if (box.hi) v = std::min(v, (*box.hi)[j]);
        out.x[j] = v;
      }
    }
  } else {
    std::vector<std::pair<std::size_t, int>> extra;  // (var, +1 lower / -1 upper)
    if (box.lo)
      for (std::size_t j = 0; j < p; ++j)
        if (std::isfinite((*box.lo)[j])) extra.emplace_back(j, 1);
    if (box.hi)
      for (std::size_t j = 0; j < p; ++j)
        if (std::isfinite((*box.hi)[j])) extra.emplace_back(j, -1);
    Matrix g(m + extra.size(), 2 * p);
    Vector h(m + extra.size());
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < p; ++j) {
        g(i, j) = am(i, j);
        g(i, p + j) = -am(i, j);
      }
      h[i] = bm[i];
    }
    for (std::size_t k = 0; k < extra.size(); ++k) {
      const auto [j, s_] = extra[k];
      g(m + k, j) = s_;
      g(m + k, p + j) = -s_;
      h[m + k] = s_ > 0 ? (*box.lo)[j] : -(*box.hi)[j];
    }
    const Vector c(2 * p, 1.0);
    s = detail::solve_nonneg_cost_checked(g, h, c);
    if (s.status == LpStatus::Optimal) {
      out.split = true;
      out.x_plus.resize(p);
      out.x_minus.resize(p);
      out.x.resize(p);
      for (std::size_t j = 0; j < p; ++j) {
        out.x_plus[j] = std::max(s.z[j], 0.0);
        out.x_minus[j] = std::max(s.z[p + j], 0.0);
        out.x[j] = out.x_plus[j] - out.x_minus[j];
      }
    }
  }

  switch (s.status) {
    case LpStatus::Optimal: break;
    case LpStatus::Infeasible:
      throw Error(ErrorKind::InfeasibleCode, "constraint system Ax >= b has no solution");
    case LpStatus::IterationLimit:
      throw Error(ErrorKind::IterationLimit, "simplex iteration cap reached");
    case LpStatus::Unbounded:
      // cannot happen for a nonnegative objective; treat as numerical breakdown
      throw Error(ErrorKind::InfeasibleCode, "L1 program reported unbounded");
  }

  double obj = 0.0;
  for (double v : out.x) obj += std::abs(v);
  out.objective = out.split ? std::accumulate(out.x_plus.begin(), out.x_plus.end(), 0.0) +
                                  std::accumulate(out.x_minus.begin(), out.x_minus.end(), 0.0)
                            : obj;
  double viol = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) viol = std::max(viol, b[i] - dot(a.row(i), out.x));
  out.max_violation = viol;
  return out;
}

inline Vector solve_l1(const Matrix& a, std::span<const double> b, const BoxSpec& box = {},
                       const L1Options& options = {}) {
  return solve_l1_detailed(a, b, box, options).x;
}

}  // namespace ofae

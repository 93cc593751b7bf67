#pragma once

// Dense linear-algebra kernels and deterministic random sampling.
//
// Random numbers come from a counter-based generator: output k of a stream
// with key K is splitmix64_finalize(K + k * 0x9E3779B97F4A7C15). Substreams
// are keyed by hashing (parent key, label), so a substream's sequence never
// depends on how many values were drawn from any other stream. Normal
// deviates use the Box-Muller transform on two consecutive uniforms in
// (0, 1]; both outputs of a pair are used. This algorithm is part of the
// model format contract and must not change between versions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ofae/error.hpp"

namespace ofae {

using Vector = std::vector<double>;

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw Error(ErrorKind::DimensionMismatch, "matrix data length does not match shape");
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix from_rows(const std::vector<Vector>& rows) {
    if (rows.empty()) return {};
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != m.cols_) {
        throw Error(ErrorKind::DimensionMismatch, "ragged rows in Matrix::from_rows");
      }
      std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
    }
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  Vector column(std::size_t c) const {
    Vector out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }

  const std::vector<double>& data() const noexcept { return data_; }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  /// Rows picked by index, in the given order (duplicates allowed).
  Matrix select_rows(std::span<const std::size_t> idx) const {
    Matrix out(idx.size(), cols_);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      auto src = row(idx[i]);
      std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
  }

  Matrix select_cols(std::span<const std::size_t> idx) const {
    Matrix out(rows_, idx.size());
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t j = 0; j < idx.size(); ++j) out(r, j) = (*this)(r, idx[j]);
    return out;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw Error(ErrorKind::DimensionMismatch, "matmul shape mismatch");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto orow = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto brow = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

inline Vector matvec(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw Error(ErrorKind::DimensionMismatch, "matvec shape mismatch");
  Vector out(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto r = a.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) s += r[j] * x[j];
    out[i] = s;
  }
  return out;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double frobenius_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "frobenius_distance shape mismatch");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    s += d * d;
  }
  return std::sqrt(s);
}

/// Flips the sign of v so that its largest-magnitude entry (first on ties)
/// is positive.
inline void canonicalize_sign(std::span<double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  if (!v.empty() && v[best] < 0.0)
    for (auto& x : v) x = -x;
}

// ---------------------------------------------------------------------------
// Random numbers

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline constexpr std::uint64_t splitmix64_finalize(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace detail

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), key_(detail::splitmix64_finalize(seed)) {}

  std::uint64_t seed() const noexcept { return seed_; }

  /// Independent stream keyed by (this stream's key, label).
  Rng substream(std::string_view label) const {
    return Rng(seed_, derive(detail::fnv1a(label)));
  }
  Rng substream(std::uint64_t index) const {
    return Rng(seed_, derive(detail::splitmix64_finalize(index ^ 0xA5A5A5A5A5A5A5A5ULL)));
  }

  std::uint64_t next_u64() {
    ++counter_;
    return detail::splitmix64_finalize(key_ + counter_ * detail::kGolden);
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n), rejection-sampled to avoid modulo bias.
  std::size_t below(std::size_t n) {
    if (n <= 1) return 0;
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return static_cast<std::size_t>(x % bound);
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] keeps the log finite.
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  Rng(std::uint64_t seed, std::uint64_t key) : seed_(seed), key_(key) {}

  std::uint64_t derive(std::uint64_t tag) const {
    return detail::splitmix64_finalize(key_ ^ detail::splitmix64_finalize(tag + detail::kGolden));
  }

  std::uint64_t seed_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

inline Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = rng.normal();
  return m;
}

// ---------------------------------------------------------------------------
// Reflections and factorizations

/// Unit vector u = (e - d) / |e - d| of the reflection H = I - 2uu^T that
/// maps d onto e. Empty when d already coincides with e (H = I).
inline std::optional<Vector> householder_vector(std::span<const double> d, std::size_t e_index) {
  const std::size_t n = d.size();
  if (e_index >= n) throw Error(ErrorKind::DimensionMismatch, "householder: e_index out of range");
  const double dn = norm2(d);
  if (!(std::abs(dn - 1.0) <= 1e-9)) {
    throw Error(ErrorKind::NonUnitDirection, "householder: |d| = " + std::to_string(dn));
  }
  Vector u(d.begin(), d.end());
  for (auto& x : u) x = -x;
  u[e_index] += 1.0;
  const double un = norm2(u);
  if (un < 1e-12) return std::nullopt;
  for (auto& x : u) x /= un;
  return u;
}

/// H = I - 2uu^T with u = (e - d) / |e - d|, so that H d = e. Returns the
/// identity when d already coincides with e.
inline Matrix householder(std::span<const double> d, std::size_t e_index) {
  const std::size_t n = d.size();
  const auto u = householder_vector(d, e_index);
  if (!u) return Matrix::identity(n);
  Matrix h(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double v = (i == j ? 1.0 : 0.0) - 2.0 * (*u)[i] * (*u)[j];
      h(i, j) = v;
      h(j, i) = v;
    }
  }
  return h;
}

/// Orthogonal factor of a Householder QR of a square matrix, with columns
/// signed so that diag(R) >= 0.
inline Matrix qr_orthogonal(const Matrix& m) {
  const std::size_t n = m.rows();
  if (m.cols() != n) throw Error(ErrorKind::DimensionMismatch, "qr_orthogonal: matrix not square");

  Matrix r = m;
  std::vector<Vector> reflectors;
  reflectors.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    double norm_x = 0.0;
    for (std::size_t i = k; i < n; ++i) norm_x += r(i, k) * r(i, k);
    norm_x = std::sqrt(norm_x);
    if (norm_x < 1e-12) throw Error(ErrorKind::RankDeficient, "qr_orthogonal: pivot norm below 1e-12");

    Vector v(n, 0.0);
    for (std::size_t i = k; i < n; ++i) v[i] = r(i, k);
    v[k] += (r(k, k) >= 0.0 ? 1.0 : -1.0) * norm_x;
    const double vn = norm2(v);
    for (auto& x : v) x /= vn;

    for (std::size_t j = k; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k; i < n; ++i) s += v[i] * r(i, j);
      for (std::size_t i = k; i < n; ++i) r(i, j) -= 2.0 * s * v[i];
    }
    reflectors.push_back(std::move(v));
  }

  // Q = H_0 H_1 ... H_{n-1}, applied to the identity from the right end.
  Matrix q = Matrix::identity(n);
  for (std::size_t kk = n; kk-- > 0;) {
    const Vector& v = reflectors[kk];
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = kk; i < n; ++i) s += v[i] * q(i, j);
      for (std::size_t i = kk; i < n; ++i) q(i, j) -= 2.0 * s * v[i];
    }
  }

  for (std::size_t k = 0; k < n; ++k) {
    if (r(k, k) < 0.0)
      for (std::size_t i = 0; i < n; ++i) q(i, k) = -q(i, k);
  }
  return q;
}

/// Sample covariance (rows are samples, divisor rows - 1).
inline Matrix covariance(const Matrix& x) {
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  if (n < 2) throw Error(ErrorKind::TooFewSamples, "covariance needs at least 2 rows");
  Vector mean(p, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < p; ++c) mean[c] += x(r, c);
  for (auto& m : mean) m /= static_cast<double>(n);

  Matrix cov(p, p);
  Vector centered(p);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < p; ++c) centered[c] = x(r, c) - mean[c];
    for (std::size_t i = 0; i < p; ++i) {
      if (centered[i] == 0.0) continue;
      for (std::size_t j = i; j < p; ++j) cov(i, j) += centered[i] * centered[j];
    }
  }
  const double denom = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i; j < p; ++j) {
      cov(i, j) /= denom;
      cov(j, i) = cov(i, j);
    }
  }
  return cov;
}

/// X^T X without centering.
inline Matrix gram(const Matrix& x) {
  const std::size_t p = x.cols();
  Matrix g(p, p);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = x.row(r);
    for (std::size_t i = 0; i < p; ++i) {
      if (row[i] == 0.0) continue;
      for (std::size_t j = i; j < p; ++j) g(i, j) += row[i] * row[j];
    }
  }
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i + 1; j < p; ++j) g(j, i) = g(i, j);
  return g;
}

struct EigenPair {
  Vector vector;
  double value = 0.0;
  bool converged = true;
};

inline double max_abs(const Matrix& m) {
  double s = 0.0;
  for (double v : m.data()) s = std::max(s, std::abs(v));
  return s;
}

/// Dominant eigenvector of a symmetric matrix. The start vector is drawn from
/// rng; a non-converged run returns its last iterate with converged = false.
inline EigenPair power_iteration(const Matrix& m, Rng& rng, int max_iter = 500, double tol = 1e-9) {
  const std::size_t n = m.rows();
  EigenPair out;
  out.vector.assign(n, 0.0);
  if (n == 0) return out;
  if (max_abs(m) < 1e-12) {
    out.vector[0] = 1.0;
    return out;
  }

  Vector v(n);
  double vn = 0.0;
  while (vn < 1e-12) {
    for (auto& x : v) x = rng.normal();
    vn = norm2(v);
  }
  for (auto& x : v) x /= vn;

  out.converged = false;
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vector mv = matvec(m, v);
    lambda = dot(v, mv);
    double residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = mv[i] - lambda * v[i];
      residual += d * d;
    }
    residual = std::sqrt(residual);
    if (residual <= tol * std::max(1.0, std::abs(lambda))) {
      out.converged = true;
      break;
    }
    const double mn = norm2(mv);
    if (mn < 1e-300) break;
    for (std::size_t i = 0; i < n; ++i) v[i] = mv[i] / mn;
  }
  canonicalize_sign(v);
  out.vector = std::move(v);
  out.value = lambda;
  return out;
}

struct SymmetricEigen {
  Vector values;  // descending
  Matrix vectors;  // column k pairs with values[k]
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
inline SymmetricEigen symmetric_eigen(const Matrix& m, int max_sweeps = 100) {
  const std::size_t n = m.rows();
  Matrix a = m;
  Matrix v = Matrix::identity(n);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        total += a(i, j) * a(i, j);
        if (i != j) off += a(i, j) * a(i, j);
      }
    if (off <= 1e-30 * std::max(total, 1e-300)) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });
  SymmetricEigen out{Vector(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

}  // namespace ofae

#pragma once

// One-component direction extractors. Each maps the block of samples that
// reaches a tree node to a single unit direction in feature space.

#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "ofae/error.hpp"
#include "ofae/numkit.hpp"

namespace ofae {

enum class TransformKind { eig, svd, fast_ica, proj };

inline std::string_view to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::eig: return "eig";
    case TransformKind::svd: return "svd";
    case TransformKind::fast_ica: return "fast_ica";
    case TransformKind::proj: return "proj";
  }
  return "eig";
}

inline std::optional<TransformKind> parse_transform(std::string_view s) {
  if (s == "eig") return TransformKind::eig;
  if (s == "svd") return TransformKind::svd;
  if (s == "fast_ica") return TransformKind::fast_ica;
  if (s == "proj") return TransformKind::proj;
  return std::nullopt;
}

struct Direction {
  Vector vector;
  bool converged = true;
};

namespace detail {

inline Matrix centered(const Matrix& x) {
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  Vector mean(p, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < p; ++c) mean[c] += x(r, c);
  for (auto& m : mean) m /= static_cast<double>(n);
  Matrix out = x;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < p; ++c) out(r, c) -= mean[c];
  return out;
}

/// X X^T scaled by `scale`; n x n.
inline Matrix outer_gram(const Matrix& x, double scale) {
  const std::size_t n = x.rows();
  Matrix k(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const double v = scale * dot(x.row(i), x.row(j));
      k(i, j) = v;
      k(j, i) = v;
    }
  return k;
}

/// Dominant eigenvector of scale * X^T X. With fewer rows than columns the
/// n x n matrix scale * X X^T is iterated instead and its eigenvector u is
/// mapped back through X^T u, which spans the same direction.
inline Direction dominant_direction(const Matrix& x, double scale, Rng& rng, std::string_view what) {
  const bool wide = x.rows() < x.cols();
  Matrix sym;
  if (wide) {
    sym = outer_gram(x, scale);
  } else {
    sym = gram(x);
    for (std::size_t i = 0; i < sym.rows(); ++i)
      for (std::size_t j = 0; j < sym.cols(); ++j) sym(i, j) *= scale;
  }
  if (max_abs(sym) < 1e-12) {
    throw Error(ErrorKind::DegenerateData, std::string(what) + " matrix is numerically zero");
  }
  EigenPair ev = power_iteration(sym, rng);
  if (!wide) return {std::move(ev.vector), ev.converged};
  Vector v(x.cols(), 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) v[c] += x(r, c) * ev.vector[r];
  const double vn = norm2(v);
  if (vn < 1e-300) throw Error(ErrorKind::DegenerateData, std::string(what) + " direction vanished");
  for (auto& e : v) e /= vn;
  return {std::move(v), ev.converged};
}

struct Whitening {
  Matrix whiten;  // rank x p, rows lambda_k^{-1/2} e_k^T
  Matrix z;       // n x rank whitened samples
};

/// PCA whitening keeping components with covariance eigenvalue > 1e-12.
/// When n < p the eigenpairs come from the n x n matrix K = Xc Xc^T / (n-1):
/// for K u = lambda u, e = Xc^T u / sqrt((n-1) lambda) is a unit covariance
/// eigenvector and the whitened scores are sqrt(n-1) u.
inline Whitening whitening(const Matrix& x) {
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  const Matrix xc = centered(x);
  const double dof = static_cast<double>(n - 1);
  Whitening w;
  if (n < p) {
    const SymmetricEigen eig = symmetric_eigen(outer_gram(xc, 1.0 / dof));
    std::size_t rank = 0;
    while (rank < n && eig.values[rank] > 1e-12) ++rank;
    if (rank == 0) throw Error(ErrorKind::DegenerateData, "fast_ica: covariance is numerically zero");
    w.whiten = Matrix(rank, p);
    w.z = Matrix(n, rank);
    for (std::size_t k = 0; k < rank; ++k) {
      const double lambda = eig.values[k];
      const double s = 1.0 / (std::sqrt(dof * lambda) * std::sqrt(lambda));
      for (std::size_t r = 0; r < n; ++r) {
        const double u = eig.vectors(r, k);
        w.z(r, k) = std::sqrt(dof) * u;
        for (std::size_t c = 0; c < p; ++c) w.whiten(k, c) += s * xc(r, c) * u;
      }
    }
    return w;
  }
  const SymmetricEigen eig = symmetric_eigen(covariance(x));
  std::size_t rank = 0;
  while (rank < p && eig.values[rank] > 1e-12) ++rank;
  if (rank == 0) throw Error(ErrorKind::DegenerateData, "fast_ica: covariance is numerically zero");
  w.whiten = Matrix(rank, p);
  for (std::size_t k = 0; k < rank; ++k) {
    const double s = 1.0 / std::sqrt(eig.values[k]);
    for (std::size_t c = 0; c < p; ++c) w.whiten(k, c) = s * eig.vectors(c, k);
  }
  w.z = Matrix(n, rank);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = 0; k < rank; ++k) w.z(r, k) = dot(w.whiten.row(k), xc.row(r));
  return w;
}

inline Direction fast_ica_direction(const Matrix& x, Rng& rng) {
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  const Whitening wh = whitening(x);
  const Matrix& whiten = wh.whiten;
  const Matrix& z = wh.z;
  const std::size_t rank = whiten.rows();

  Vector w(rank);
  double wn = 0.0;
  while (wn < 1e-12) {
    for (auto& v : w) v = rng.normal();
    wn = norm2(w);
  }
  for (auto& v : w) v /= wn;

  bool converged = false;
  Vector next(rank);
  for (int it = 0; it < 200; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    double mean_dg = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      auto zr = z.row(r);
      const double g = std::tanh(dot(w, zr));
      mean_dg += 1.0 - g * g;
      for (std::size_t k = 0; k < rank; ++k) next[k] += zr[k] * g;
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    mean_dg *= inv_n;
    for (std::size_t k = 0; k < rank; ++k) next[k] = next[k] * inv_n - mean_dg * w[k];
    const double nn = norm2(next);
    if (nn < 1e-300) break;
    for (auto& v : next) v /= nn;
    const double agreement = std::abs(dot(next, w));
    w = next;
    if (agreement > 1.0 - 1e-4) {
      converged = true;
      break;
    }
  }

  // unmixing direction in the original space: W^T w
  Vector d(p, 0.0);
  for (std::size_t k = 0; k < rank; ++k)
    for (std::size_t c = 0; c < p; ++c) d[c] += whiten(k, c) * w[k];
  const double dn = norm2(d);
  if (dn < 1e-300) throw Error(ErrorKind::DegenerateData, "fast_ica: vanishing direction");
  for (auto& v : d) v /= dn;
  return {std::move(d), converged};
}

}  // namespace detail

/// Unit direction (largest-magnitude entry positive) summarizing x.
///
/// eig      dominant eigenvector of the sample covariance
/// svd      dominant right singular vector of the uncentered data
/// fast_ica one-unit fixed-point ICA (g = tanh) on whitened data, mapped back
/// proj     normalized Gaussian vector; never looks at x's entries
///
/// Throws DegenerateData when the data carry no usable direction; the tree
/// builders fall back to axis-parallel splits in that case.
inline Direction extract_direction(TransformKind kind, const Matrix& x, Rng& rng) {
  const std::size_t p = x.cols();
  if (p == 0) throw Error(ErrorKind::DimensionMismatch, "extract_direction: no features");
  if (kind != TransformKind::proj && x.rows() < 2) {
    throw Error(ErrorKind::DegenerateData, "extract_direction: fewer than 2 samples");
  }

  Direction out;
  switch (kind) {
    case TransformKind::eig:
      out = detail::dominant_direction(detail::centered(x), 1.0 / static_cast<double>(x.rows() - 1), rng,
                                       "covariance");
      break;
    case TransformKind::svd:
      out = detail::dominant_direction(x, 1.0, rng, "gram");
      break;
    case TransformKind::fast_ica:
      out = detail::fast_ica_direction(x, rng);
      break;
    case TransformKind::proj: {
      out.vector.assign(p, 0.0);
      double n = 0.0;
      while (n < 1e-12) {
        for (auto& v : out.vector) v = rng.normal();
        n = norm2(out.vector);
      }
      for (auto& v : out.vector) v /= n;
      break;
    }
  }
  // renormalize so |d| = 1 holds to rounding, then fix the sign
  const double n = norm2(out.vector);
  for (auto& v : out.vector) v /= n;
  canonicalize_sign(out.vector);
  return out;
}

}  // namespace ofae

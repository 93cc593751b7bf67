#pragma once

#include <cmath>
#include <span>

#include "ofae/error.hpp"
#include "ofae/numkit.hpp"

namespace ofae {

/// Per-feature z-scoring. Features with std below 1e-12 keep std = 1.
struct Standardizer {
  Vector mean;
  Vector std;

  static Standardizer fit(const Matrix& x) {
    if (x.rows() == 0) throw Error(ErrorKind::EmptyData, "standardizer fit on empty data");
    const std::size_t n = x.rows();
    const std::size_t p = x.cols();
    Standardizer s{Vector(p, 0.0), Vector(p, 0.0)};
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < p; ++c) s.mean[c] += x(r, c);
    for (auto& m : s.mean) m /= static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < p; ++c) s.std[c] += (x(r, c) - s.mean[c]) * (x(r, c) - s.mean[c]);
    for (auto& v : s.std) {
      v = std::sqrt(v / static_cast<double>(n));
      if (v < 1e-12) v = 1.0;
    }
    return s;
  }

  std::size_t size() const noexcept { return mean.size(); }

  Vector transform(std::span<const double> x) const {
    check(x.size());
    Vector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean[i]) / std[i];
    return out;
  }

  Vector inverse(std::span<const double> z) const {
    check(z.size());
    Vector out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] * std[i] + mean[i];
    return out;
  }

  Matrix transform(const Matrix& x) const {
    Matrix out(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r) {
      Vector t = transform(x.row(r));
      std::copy(t.begin(), t.end(), out.row(r).begin());
    }
    return out;
  }

  friend bool operator==(const Standardizer&, const Standardizer&) = default;

 private:
  void check(std::size_t n) const {
    if (n != mean.size()) throw Error(ErrorKind::DimensionMismatch, "standardizer dimension mismatch");
  }
};

}  // namespace ofae

#pragma once

// Reconstruction quality (MSE, SSIM) and wall-clock timing.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "ofae/error.hpp"

namespace ofae {

inline double mse(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) {
    throw Error(ErrorKind::LengthMismatch, "mse needs two non-empty vectors of equal length");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

struct SsimParams {
  std::size_t window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double data_range = 255.0;
};

namespace detail {

inline std::vector<double> gaussian_kernel(std::size_t size, double sigma) {
  std::vector<double> k(size);
  const double c = (static_cast<double>(size) - 1.0) / 2.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    const double d = static_cast<double>(i) - c;
    k[i] = std::exp(-d * d / (2.0 * sigma * sigma));
    sum += k[i];
  }
  for (auto& v : k) v /= sum;
  return k;
}

inline double ssim_from_stats(double mu_a, double mu_b, double var_a, double var_b, double cov, double c1,
                              double c2) {
  return ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) / ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
}

// Separable Gaussian filter over "valid" window positions.
inline std::vector<double> filter_valid(std::span<const double> img, std::size_t h, std::size_t w,
                                        const std::vector<double>& k) {
  const std::size_t ks = k.size();
  const std::size_t oh = h - ks + 1;
  const std::size_t ow = w - ks + 1;
  std::vector<double> tmp(h * ow, 0.0);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < ow; ++x) {
      double s = 0.0;
      for (std::size_t t = 0; t < ks; ++t) s += k[t] * img[y * w + x + t];
      tmp[y * ow + x] = s;
    }
  std::vector<double> out(oh * ow, 0.0);
  for (std::size_t y = 0; y < oh; ++y)
    for (std::size_t x = 0; x < ow; ++x) {
      double s = 0.0;
      for (std::size_t t = 0; t < ks; ++t) s += k[t] * tmp[(y + t) * ow + x];
      out[y * ow + x] = s;
    }
  return out;
}

/// Local SSIM at every valid window position, (h - 10) x (w - 10) for the
/// default window. Requires h, w >= window.
inline std::vector<double> ssim_map(std::span<const double> a, std::span<const double> b, std::size_t h,
                                    std::size_t w, const SsimParams& prm) {
  const double c1 = (prm.k1 * prm.data_range) * (prm.k1 * prm.data_range);
  const double c2 = (prm.k2 * prm.data_range) * (prm.k2 * prm.data_range);
  const auto k = gaussian_kernel(prm.window, prm.sigma);
  std::vector<double> aa(a.size()), bb(a.size()), ab(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    aa[i] = a[i] * a[i];
    bb[i] = b[i] * b[i];
    ab[i] = a[i] * b[i];
  }
  const auto mu_a = filter_valid(a, h, w, k);
  const auto mu_b = filter_valid(b, h, w, k);
  const auto e_aa = filter_valid(aa, h, w, k);
  const auto e_bb = filter_valid(bb, h, w, k);
  const auto e_ab = filter_valid(ab, h, w, k);
  std::vector<double> map(mu_a.size());
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    map[i] = ssim_from_stats(mu_a[i], mu_b[i], e_aa[i] - mu_a[i] * mu_a[i], e_bb[i] - mu_b[i] * mu_b[i],
                             e_ab[i] - mu_a[i] * mu_b[i], c1, c2);
  }
  return map;
}

inline double ssim_plane(std::span<const double> a, std::span<const double> b, std::size_t h, std::size_t w,
                         const SsimParams& prm) {
  const double c1 = (prm.k1 * prm.data_range) * (prm.k1 * prm.data_range);
  const double c2 = (prm.k2 * prm.data_range) * (prm.k2 * prm.data_range);
  if (h < prm.window || w < prm.window) {
    // single window covering the whole image, uniform weights
    const double n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      ma += a[i];
      mb += b[i];
    }
    ma /= n;
    mb /= n;
    double va = 0, vb = 0, cv = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      va += (a[i] - ma) * (a[i] - ma);
      vb += (b[i] - mb) * (b[i] - mb);
      cv += (a[i] - ma) * (b[i] - mb);
    }
    return ssim_from_stats(ma, mb, va / n, vb / n, cv / n, c1, c2);
  }

  const auto map = ssim_map(a, b, h, w, prm);
  double total = 0.0;
  for (double v : map) total += v;
  return total / static_cast<double>(map.size());
}

}  // namespace detail

/// Mean structural similarity of two images stored interleaved (row-major,
/// channel fastest). Gaussian 11x11 window, sigma 1.5, K1 = 0.01,
/// K2 = 0.03, averaged over valid window positions; multi-channel images
/// average the per-channel values. Images smaller than the window use one
/// window spanning the whole image.
inline double ssim(std::span<const double> a, std::span<const double> b, std::size_t height, std::size_t width,
                   std::size_t channels = 1, const SsimParams& params = {}) {
  if (a.size() != b.size() || a.size() != height * width * channels || a.empty()) {
    throw Error(ErrorKind::ShapeMismatch, "ssim inputs must share the stated image shape");
  }
  double total = 0.0;
  std::vector<double> pa(height * width), pb(height * width);
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t i = 0; i < height * width; ++i) {
      pa[i] = a[i * channels + c];
      pb[i] = b[i * channels + c];
    }
    total += detail::ssim_plane(pa, pb, height, width, params);
  }
  return total / static_cast<double>(channels);
}

struct Timing {
  std::string label;
  double seconds = 0.0;
};

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }
  Timing lap(std::string label) const { return {std::move(label), seconds()}; }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace ofae

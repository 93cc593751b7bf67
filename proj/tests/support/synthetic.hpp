#pragma once

// Seeded stand-ins for datasets that are not shipped with the repository.
// They mimic the size, scale and class structure of the originals closely
// enough for relative comparisons, nothing more.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>

#include "ofae/dataio.hpp"
#include "ofae/numkit.hpp"

namespace ofae::synthetic {

/// 210 x 7 wheat-kernel measurements: three varieties of 70 kernels. A shared
/// size factor per kernel couples area, perimeter, length and width the way
/// physical measurements are coupled.
inline Dataset seeds_like(std::uint64_t seed) {
  static constexpr std::array<std::array<double, 7>, 3> mean{{
      {14.33, 14.29, 0.88, 5.51, 3.24, 2.67, 5.09},
      {18.33, 16.14, 0.88, 6.15, 3.68, 3.64, 6.02},
      {11.87, 13.25, 0.85, 5.23, 2.85, 4.79, 5.12},
  }};
  static constexpr std::array<double, 7> spread{1.2, 0.55, 0.016, 0.23, 0.16, 1.2, 0.25};
  static constexpr std::array<double, 7> size_loading{1.0, 0.95, 0.2, 0.85, 0.85, 0.0, 0.8};
  Rng rng = Rng(seed).substream("seeds_like");
  Matrix x(210, 7);
  for (std::size_t r = 0; r < 210; ++r) {
    const std::size_t cls = r / 70;
    const double size = rng.normal();
    for (std::size_t j = 0; j < 7; ++j) {
      const double l = size_loading[j];
      const double z = l * size + std::sqrt(1.0 - l * l) * rng.normal();
      x(r, j) = mean[cls][j] + spread[j] * z;
    }
  }
  return Dataset{std::move(x), std::nullopt,
                 {"area", "perimeter", "compactness", "length", "width", "asymmetry", "groove"}};
}

/// Pulsar-candidate statistics: 8 features (mean, std, excess kurtosis and
/// skewness of the folded profile and of the DM-SNR curve), about 10%
/// positives. A latent signal strength drives the correlated shifts.
inline Dataset htru2_like(std::size_t n, std::uint64_t seed) {
  struct Feature {
    double noise_mean, noise_sd, pulsar_mean, pulsar_sd;
  };
  static constexpr std::array<Feature, 8> f{{
      {116.6, 17.5, 56.7, 30.0},
      {47.3, 6.2, 38.7, 8.0},
      {0.21, 0.33, 3.13, 1.87},
      {0.38, 1.03, 15.6, 14.0},
      {8.9, 24.4, 49.8, 45.3},
      {23.3, 16.7, 56.5, 19.7},
      {8.9, 4.2, 2.76, 3.1},
      {113.6, 106.1, 17.9, 50.9},
  }};
  // sign of each feature's dependence on the latent signal strength
  static constexpr std::array<double, 8> loading{-0.8, -0.5, 0.8, 0.8, 0.6, 0.7, -0.7, -0.6};
  Rng rng = Rng(seed).substream("htru2_like");
  Matrix x(n, 8);
  for (std::size_t r = 0; r < n; ++r) {
    const bool pulsar = rng.uniform() < 0.1;
    const double strength = rng.normal();
    for (std::size_t j = 0; j < 8; ++j) {
      const double l = loading[j];
      const double z = l * strength + std::sqrt(1.0 - l * l) * rng.normal();
      const Feature& g = f[j];
      x(r, j) = pulsar ? g.pulsar_mean + g.pulsar_sd * z : g.noise_mean + g.noise_sd * z;
    }
  }
  return Dataset{std::move(x), std::nullopt,
                 {"ip_mean", "ip_sd", "ip_kurtosis", "ip_skewness", "dm_mean", "dm_sd", "dm_kurtosis",
                  "dm_skewness"}};
}

enum class RgbStyle {
  gradients,  // smooth two-color gradients with one soft blob
  shapes,     // flat background with hard-edged discs and stripes
};

/// n RGB images of h x w, integer intensities in [0, 255], interleaved.
inline Dataset rgb_images(RgbStyle style, std::size_t n, std::size_t h, std::size_t w, std::uint64_t seed) {
  Rng rng = Rng(seed).substream(style == RgbStyle::gradients ? "rgb_gradients" : "rgb_shapes");
  Matrix x(n, h * w * 3);
  auto color = [&] {
    return std::array<double, 3>{255.0 * rng.uniform(), 255.0 * rng.uniform(), 255.0 * rng.uniform()};
  };
  for (std::size_t s = 0; s < n; ++s) {
    const auto c0 = color();
    const auto c1 = color();
    const auto c2 = color();
    const double angle = 6.283185307179586 * rng.uniform();
    const double cy = rng.uniform() * static_cast<double>(h);
    const double cx = rng.uniform() * static_cast<double>(w);
    const double radius = (0.15 + 0.3 * rng.uniform()) * static_cast<double>(std::min(h, w));
    const double period = 3.0 + 5.0 * rng.uniform();
    for (std::size_t i = 0; i < h; ++i) {
      for (std::size_t j = 0; j < w; ++j) {
        const double u = static_cast<double>(i) / static_cast<double>(std::max<std::size_t>(1, h - 1));
        const double v = static_cast<double>(j) / static_cast<double>(std::max<std::size_t>(1, w - 1));
        const double dy = static_cast<double>(i) - cy;
        const double dx = static_cast<double>(j) - cx;
        const double d2 = dx * dx + dy * dy;
        for (std::size_t c = 0; c < 3; ++c) {
          double value = 0.0;
          if (style == RgbStyle::gradients) {
            const double t =
                0.5 + 0.5 * (std::sin(angle) * (2.0 * u - 1.0) + std::cos(angle) * (2.0 * v - 1.0)) / std::sqrt(2.0);
            const double blob = std::exp(-d2 / (2.0 * radius * radius));
            value = (1.0 - blob) * ((1.0 - t) * c0[c] + t * c1[c]) + blob * c2[c];
          } else {
            value = c0[c];
            if (std::fmod(static_cast<double>(j) + 2.0 * static_cast<double>(i), 2.0 * period) < period * 0.5)
              value = c1[c];
            if (d2 < radius * radius) value = c2[c];
          }
          value += 6.0 * rng.normal();
          x(s, (i * w + j) * 3 + c) = std::clamp(std::round(value), 0.0, 255.0);
        }
      }
    }
  }
  return Dataset{std::move(x), ImageShape{h, w, 3}, {}};
}

/// Writes each sample as dir/NNNN.ppm (or .pgm for one channel).
inline void write_image_dir(const std::filesystem::path& dir, const Dataset& d) {
  std::filesystem::create_directories(dir);
  for (std::size_t r = 0; r < d.n(); ++r) {
    char name[32];
    std::snprintf(name, sizeof name, "%04zu.%s", r, (*d.image_shape)[2] == 1 ? "pgm" : "ppm");
    write_image(dir / name, d.x.row(r), *d.image_shape);
  }
}

}  // namespace ofae::synthetic

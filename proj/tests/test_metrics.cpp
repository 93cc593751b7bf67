#include <gtest/gtest.h>

#include <cmath>
#include <thread>

#include "ofae/metrics.hpp"
#include "ofae/numkit.hpp"

using namespace ofae;

namespace {

Vector random_image(std::size_t n, Rng& rng) {
  Vector v(n);
  for (auto& x : v) x = std::floor(256.0 * rng.uniform());
  return v;
}

// Direct evaluation of the windowed SSIM formula with an explicit 2-D
// Gaussian window, no separable filtering.
double naive_ssim(const Vector& a, const Vector& b, std::size_t h, std::size_t w) {
  const int win = 11;
  const double sigma = 1.5;
  std::vector<double> g(win * win);
  double gs = 0;
  for (int i = 0; i < win; ++i)
    for (int j = 0; j < win; ++j) {
      const double di = i - 5, dj = j - 5;
      g[i * win + j] = std::exp(-(di * di + dj * dj) / (2 * sigma * sigma));
      gs += g[i * win + j];
    }
  for (auto& v : g) v /= gs;
  const double c1 = std::pow(0.01 * 255, 2), c2 = std::pow(0.03 * 255, 2);
  double total = 0;
  std::size_t count = 0;
  for (std::size_t y = 0; y + win <= h; ++y)
    for (std::size_t x = 0; x + win <= w; ++x) {
      double ma = 0, mb = 0;
      for (int i = 0; i < win; ++i)
        for (int j = 0; j < win; ++j) {
          ma += g[i * win + j] * a[(y + i) * w + x + j];
          mb += g[i * win + j] * b[(y + i) * w + x + j];
        }
      double va = 0, vb = 0, cv = 0;
      for (int i = 0; i < win; ++i)
        for (int j = 0; j < win; ++j) {
          const double da = a[(y + i) * w + x + j] - ma, db = b[(y + i) * w + x + j] - mb;
          va += g[i * win + j] * da * da;
          vb += g[i * win + j] * db * db;
          cv += g[i * win + j] * da * db;
        }
      total += (2 * ma * mb + c1) * (2 * cv + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  return total / static_cast<double>(count);
}

}  // namespace

TEST(Mse, HandExamples) {
  const Vector a{1, 2, 3}, b{2, 2, 5};
  EXPECT_EQ(mse(a, a), 0.0);
  EXPECT_EQ(mse(Vector{0, 0}, Vector{1, 1}), 1.0);
  EXPECT_NEAR(mse(a, b), 5.0 / 3.0, 1e-15);
}

TEST(Mse, SymmetricAndNonnegative) {
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const Vector a = random_image(10, rng), b = random_image(10, rng);
    EXPECT_EQ(mse(a, b), mse(b, a));
    EXPECT_GE(mse(a, b), 0.0);
    if (a != b) {
      EXPECT_GT(mse(a, b), 0.0);
    }
  }
}

TEST(Mse, LengthMismatch) {
  try {
    mse(Vector{1, 2}, Vector{1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::LengthMismatch);
  }
}

TEST(Ssim, IdenticalImagesScoreOne) {
  Rng rng(2);
  for (auto [h, w, c] : {std::tuple{16u, 16u, 1u}, std::tuple{8u, 8u, 1u}, std::tuple{12u, 14u, 3u}}) {
    const Vector a = random_image(h * w * c, rng);
    EXPECT_NEAR(ssim(a, a, h, w, c), 1.0, 1e-12);
  }
}

TEST(Ssim, Symmetric) {
  Rng rng(3);
  const Vector a = random_image(20 * 20, rng), b = random_image(20 * 20, rng);
  EXPECT_NEAR(ssim(a, b, 20, 20), ssim(b, a, 20, 20), 1e-12);
  const Vector s = random_image(8 * 8, rng), t = random_image(8 * 8, rng);
  EXPECT_NEAR(ssim(s, t, 8, 8), ssim(t, s, 8, 8), 1e-12);
}

TEST(Ssim, ConstantBlackVersusWhite) {
  const Vector zero(16 * 16, 0.0), white(16 * 16, 255.0);
  const double c1 = std::pow(0.01 * 255, 2);
  const double expected = c1 / (255.0 * 255.0 + c1);
  EXPECT_NEAR(ssim(zero, white, 16, 16), expected, 1e-12);
  EXPECT_NEAR(naive_ssim(zero, white, 16, 16), expected, 1e-12);
  EXPECT_GT(expected, 0.0);
}

TEST(Ssim, MatchesNaiveWindowedFormula) {
  Rng rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    const Vector a = random_image(15 * 18, rng);
    Vector b = a;
    for (auto& v : b) v = std::clamp(v + 60.0 * rng.normal(), 0.0, 255.0);
    EXPECT_NEAR(ssim(a, b, 15, 18), naive_ssim(a, b, 15, 18), 1e-9);
  }
}

TEST(Ssim, SmallImagesUseOneGlobalWindow) {
  const Vector a{0, 50, 100, 150}, b{10, 40, 120, 140};
  double ma = 75, mb = 77.5, va = 0, vb = 0, cv = 0;
  for (int i = 0; i < 4; ++i) {
    va += (a[i] - ma) * (a[i] - ma) / 4;
    vb += (b[i] - mb) * (b[i] - mb) / 4;
    cv += (a[i] - ma) * (b[i] - mb) / 4;
  }
  const double c1 = std::pow(0.01 * 255, 2), c2 = std::pow(0.03 * 255, 2);
  const double expected = (2 * ma * mb + c1) * (2 * cv + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
  EXPECT_NEAR(ssim(a, b, 2, 2), expected, 1e-12);
}

TEST(Ssim, RangeBounds) {
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    const Vector a = random_image(14 * 14, rng), b = random_image(14 * 14, rng);
    const double v = ssim(a, b, 14, 14);
    EXPECT_GE(v, -1.0);
    EXPECT_LE(v, 1.0);
  }
  // an inverted image is strongly anti-correlated
  const Vector a = random_image(8 * 8, rng);
  Vector inv(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) inv[i] = 255.0 - a[i];
  EXPECT_LT(ssim(a, inv, 8, 8), 0.0);
}

TEST(Ssim, LocalMapFollowsTranslation) {
  // shifting both inputs inside a shared canvas shifts the local SSIM map
  Rng rng(6);
  const std::size_t h = 16, w = 16, dy = 3, dx = 5, ch = h + 6, cw = w + 7;
  const Vector a = random_image(h * w, rng), b = random_image(h * w, rng);
  Vector ca = random_image(ch * cw, rng);
  Vector cb = ca;
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      ca[(y + dy) * cw + x + dx] = a[y * w + x];
      cb[(y + dy) * cw + x + dx] = b[y * w + x];
    }
  const SsimParams prm;
  const auto small = detail::ssim_map(a, b, h, w, prm);
  const auto big = detail::ssim_map(ca, cb, ch, cw, prm);
  const std::size_t ow = w - 10, bw = cw - 10;
  for (std::size_t y = 0; y + 10 < h; ++y)
    for (std::size_t x = 0; x + 10 < w; ++x) EXPECT_NEAR(small[y * ow + x], big[(y + dy) * bw + x + dx], 1e-9);
}

TEST(Ssim, ColorAveragesChannels) {
  Rng rng(7);
  const std::size_t h = 12, w = 12;
  const Vector a = random_image(h * w * 3, rng), b = random_image(h * w * 3, rng);
  double sum = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    Vector pa(h * w), pb(h * w);
    for (std::size_t i = 0; i < h * w; ++i) {
      pa[i] = a[i * 3 + c];
      pb[i] = b[i * 3 + c];
    }
    sum += ssim(pa, pb, h, w);
  }
  EXPECT_NEAR(ssim(a, b, h, w, 3), sum / 3.0, 1e-12);
}

TEST(Ssim, ShapeMismatch) {
  const Vector a(16, 0.0), b(15, 0.0);
  try {
    ssim(a, b, 4, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ShapeMismatch);
  }
}

TEST(StopwatchTest, MonotoneNonNegative) {
  const Stopwatch sw;
  const Timing t1 = sw.lap("a");
  std::this_thread::sleep_for(std::chrono::milliseconds(2));
  const Timing t2 = sw.lap("b");
  EXPECT_GE(t1.seconds, 0.0);
  EXPECT_GT(t2.seconds, t1.seconds);
  EXPECT_EQ(t2.label, "b");
}

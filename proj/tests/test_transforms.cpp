#include <gtest/gtest.h>

#include <cmath>

#include "ofae/transforms.hpp"

using namespace ofae;

namespace {

constexpr TransformKind kAllKinds[] = {TransformKind::eig, TransformKind::svd, TransformKind::fast_ica,
                                       TransformKind::proj};

Matrix anisotropic_cloud(std::size_t n, std::size_t p, Rng& rng) {
  Matrix x = gaussian_matrix(n, p, rng);
  // give the cloud some anisotropy
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < p; ++c) x(r, c) *= 1.0 + static_cast<double>(c);
  return x;
}

}  // namespace

TEST(TransformKindNames, RoundTrip) {
  for (TransformKind k : kAllKinds) EXPECT_EQ(parse_transform(to_string(k)), k);
  EXPECT_EQ(to_string(TransformKind::fast_ica), "fast_ica");
  EXPECT_FALSE(parse_transform("factor").has_value());
}

TEST(ExtractDirection, EigFollowsTheOnlyVaryingAxis) {
  Rng rng(1);
  const Direction d = extract_direction(TransformKind::eig, Matrix::from_rows({{0, 0}, {1, 0}, {2, 0}}), rng);
  EXPECT_NEAR(d.vector[0], 1.0, 1e-12);
  EXPECT_NEAR(d.vector[1], 0.0, 1e-12);
}

TEST(ExtractDirection, ProjIgnoresData) {
  Rng a(5), b(5);
  Rng data_rng(99);
  const Direction d1 = extract_direction(TransformKind::proj, anisotropic_cloud(10, 4, data_rng), a);
  const Direction d2 = extract_direction(TransformKind::proj, Matrix(3, 4), b);
  EXPECT_EQ(d1.vector, d2.vector);
}

TEST(ExtractDirection, SvdRankOne) {
  Rng rng(2);
  const Direction d = extract_direction(TransformKind::svd, Matrix::from_rows({{1, 1}, {2, 2}}), rng);
  const double s = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(d.vector[0], s, 1e-8);
  EXPECT_NEAR(d.vector[1], s, 1e-8);
}

TEST(ExtractDirection, EigOnCorrelatedSamples) {
  // rows (+-1, +-1) plus (+-a, -+a) give covariance proportional to [[2,1],[1,2]]
  const double a = 1.0 / std::sqrt(3.0);
  const Matrix x = Matrix::from_rows({{1, 1}, {-1, -1}, {a, -a}, {-a, a}});
  const Matrix c = covariance(x);
  EXPECT_NEAR(c(0, 0) / c(0, 1), 2.0, 1e-12);
  Rng rng(3);
  const Direction d = extract_direction(TransformKind::eig, x, rng);
  const double s = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(d.vector[0], s, 1e-6);
  EXPECT_NEAR(d.vector[1], s, 1e-6);
}

TEST(ExtractDirection, UnitNormAndSignConventionForEveryKind) {
  Rng data_rng(10);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix x = anisotropic_cloud(30, 5, data_rng);
    for (TransformKind k : kAllKinds) {
      Rng rng(static_cast<std::uint64_t>(trial));
      const Direction d = extract_direction(k, x, rng);
      ASSERT_EQ(d.vector.size(), 5u);
      EXPECT_NEAR(norm2(d.vector), 1.0, 1e-12) << to_string(k);
      std::size_t best = 0;
      for (std::size_t i = 1; i < 5; ++i)
        if (std::abs(d.vector[i]) > std::abs(d.vector[best])) best = i;
      EXPECT_GT(d.vector[best], 0.0);
    }
  }
}

TEST(ExtractDirection, EigAndSvdAgreeOnCenteredData) {
  Rng data_rng(20);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix x = anisotropic_cloud(40, 4, data_rng);
    Vector mean(4, 0.0);
    for (std::size_t r = 0; r < x.rows(); ++r)
      for (std::size_t c = 0; c < 4; ++c) mean[c] += x(r, c) / 40.0;
    for (std::size_t r = 0; r < x.rows(); ++r)
      for (std::size_t c = 0; c < 4; ++c) x(r, c) -= mean[c];
    Rng r1(1), r2(1);
    const Direction e = extract_direction(TransformKind::eig, x, r1);
    const Direction s = extract_direction(TransformKind::svd, x, r2);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(e.vector[i], s.vector[i], 1e-6);
  }
}

TEST(ExtractDirection, FastIcaRecoversASourceAxis) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const double angle = 0.3 + 0.1 * static_cast<double>(seed);
    const double c = std::cos(angle), s = std::sin(angle);
    const std::size_t n = 1000;
    Matrix x(n, 2);
    for (std::size_t r = 0; r < n; ++r) {
      const double s1 = std::sqrt(3.0) * (2.0 * rng.uniform() - 1.0);
      const double s2 = std::sqrt(3.0) * (2.0 * rng.uniform() - 1.0);
      x(r, 0) = c * s1 - s * s2;
      x(r, 1) = s * s1 + c * s2;
    }
    const Direction d = extract_direction(TransformKind::fast_ica, x, rng);
    const double along1 = std::abs(d.vector[0] * c + d.vector[1] * s);
    const double along2 = std::abs(-d.vector[0] * s + d.vector[1] * c);
    EXPECT_GT(std::max(along1, along2), 0.95) << "seed " << seed;
  }
}

TEST(ExtractDirection, DegenerateInputsThrow) {
  const Matrix constant = Matrix::from_rows({{1, 2}, {1, 2}, {1, 2}});
  for (TransformKind k : {TransformKind::eig, TransformKind::fast_ica}) {
    Rng rng(0);
    try {
      extract_direction(k, constant, rng);
      FAIL() << to_string(k);
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::DegenerateData);
    }
  }
  Rng rng(0);
  try {
    extract_direction(TransformKind::svd, Matrix(3, 2), rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateData);
  }
  // a single sample cannot define a covariance direction
  try {
    extract_direction(TransformKind::eig, Matrix::from_rows({{1, 2}}), rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateData);
  }
}

TEST(ExtractDirection, WideDataMatchesFullCovariance) {
  Rng data_rng(30);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix x = anisotropic_cloud(6, 15, data_rng);
    const SymmetricEigen full = symmetric_eigen(covariance(x));
    Vector expected = full.vectors.column(0);
    canonicalize_sign(expected);
    Rng rng(1);
    const Direction d = extract_direction(TransformKind::eig, x, rng);
    for (std::size_t i = 0; i < 15; ++i) EXPECT_NEAR(d.vector[i], expected[i], 1e-6);

    const SymmetricEigen g = symmetric_eigen(gram(x));
    Vector expected_svd = g.vectors.column(0);
    canonicalize_sign(expected_svd);
    Rng rng2(1);
    const Direction s = extract_direction(TransformKind::svd, x, rng2);
    for (std::size_t i = 0; i < 15; ++i) EXPECT_NEAR(s.vector[i], expected_svd[i], 1e-6);
  }
}

TEST(Whitening, WideAndTallRoutesWhiten) {
  Rng data_rng(31);
  for (std::size_t p : {3u, 20u}) {
    const Matrix x = anisotropic_cloud(8, p, data_rng);
    const detail::Whitening w = detail::whitening(x);
    const std::size_t rank = w.z.rows() == 8 ? w.z.cols() : 0;
    ASSERT_EQ(rank, std::min<std::size_t>(p, 7));
    // whitened scores have identity covariance (they are centered by construction)
    const Matrix c = covariance(w.z);
    EXPECT_LT(frobenius_distance(c, Matrix::identity(rank)), 1e-9);
    // and agree with applying the whitening rows to the centered data
    const Matrix xc = detail::centered(x);
    for (std::size_t r = 0; r < 8; ++r)
      for (std::size_t k = 0; k < rank; ++k) EXPECT_NEAR(w.z(r, k), dot(w.whiten.row(k), xc.row(r)), 1e-9);
  }
}

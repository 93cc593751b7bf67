#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ofae/numkit.hpp"

using namespace ofae;

namespace {

Vector random_unit(std::size_t n, Rng& rng) {
  Vector v(n);
  for (auto& x : v) x = rng.normal();
  const double s = norm2(v);
  for (auto& x : v) x /= s;
  return v;
}

void expect_matrix_near(const Matrix& a, const Matrix& b, double tol) {
  ASSERT_EQ(a.rows(), b.rows());
  ASSERT_EQ(a.cols(), b.cols());
  EXPECT_LT(frobenius_distance(a, b), tol);
}

}  // namespace

TEST(Householder, AlignedDirectionGivesIdentity) {
  const Vector d{1.0, 0.0};
  EXPECT_EQ(householder(d, 0), Matrix::identity(2));
}

TEST(Householder, SecondAxisSwaps) {
  const Vector d{0.0, 1.0};
  expect_matrix_near(householder(d, 0), Matrix::from_rows({{0, 1}, {1, 0}}), 1e-15);
}

TEST(Householder, DiagonalDirectionMapsToFirstAxis) {
  const double s = 1.0 / std::sqrt(3.0);
  const Vector d{s, s, s};
  const Matrix h = householder(d, 0);
  const Vector hd = matvec(h, d);
  EXPECT_NEAR(hd[0], 1.0, 1e-10);
  EXPECT_NEAR(hd[1], 0.0, 1e-10);
  EXPECT_NEAR(hd[2], 0.0, 1e-10);
  expect_matrix_near(matmul(h, h), Matrix::identity(3), 1e-10);
}

TEST(Householder, RejectsNonUnitDirection) {
  const Vector d{1.0, 1.0};
  try {
    householder(d, 0);
    FAIL() << "expected NonUnitDirection";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonUnitDirection);
  }
}

TEST(Householder, RandomInstancesAreSymmetricInvolutions) {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.below(31);
    const Vector d = random_unit(n, rng);
    const std::size_t e = rng.below(n);
    const Matrix h = householder(d, e);
    EXPECT_EQ(h, h.transpose());
    EXPECT_LT(frobenius_distance(matmul(h, h), Matrix::identity(n)), 1e-10);
    Vector hd = matvec(h, d);
    double plus = 0.0, minus = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ei = i == e ? 1.0 : 0.0;
      plus += (hd[i] - ei) * (hd[i] - ei);
      minus += (hd[i] + ei) * (hd[i] + ei);
    }
    EXPECT_LT(std::sqrt(std::min(plus, minus)), 1e-8);
  }
}

TEST(QrOrthogonal, IdentityStaysIdentity) {
  expect_matrix_near(qr_orthogonal(Matrix::identity(4)), Matrix::identity(4), 1e-15);
}

TEST(QrOrthogonal, PermutationIsItsOwnQ) {
  const Matrix p = Matrix::from_rows({{0, 1}, {1, 0}});
  expect_matrix_near(qr_orthogonal(p), p, 1e-14);
}

TEST(QrOrthogonal, RandomGaussianIsOrthogonal) {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.below(31);
    const Matrix q = qr_orthogonal(gaussian_matrix(n, n, rng));
    EXPECT_LT(frobenius_distance(matmul(q.transpose(), q), Matrix::identity(n)), 1e-10);
  }
}

TEST(QrOrthogonal, RDiagonalIsNonnegative) {
  Rng rng(8);
  const Matrix m = gaussian_matrix(6, 6, rng);
  const Matrix q = qr_orthogonal(m);
  const Matrix r = matmul(q.transpose(), m);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_GE(r(i, i), 0.0);
    for (std::size_t j = 0; j < i; ++j) EXPECT_NEAR(r(i, j), 0.0, 1e-10);
  }
}

TEST(QrOrthogonal, RankDeficientThrows) {
  const Matrix m = Matrix::from_rows({{1, 2}, {2, 4}});
  try {
    qr_orthogonal(m);
    FAIL() << "expected RankDeficient";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RankDeficient);
  }
}

TEST(Covariance, HandExamples) {
  expect_matrix_near(covariance(Matrix::from_rows({{3, 1}, {3, 1}})), Matrix(2, 2), 1e-15);
  expect_matrix_near(covariance(Matrix::from_rows({{0, 0}, {2, 0}})), Matrix::from_rows({{2, 0}, {0, 0}}), 1e-15);
  expect_matrix_near(covariance(Matrix::from_rows({{1, 2}, {3, 4}, {5, 6}})), Matrix::from_rows({{4, 4}, {4, 4}}),
                     1e-14);
}

TEST(Covariance, SingleRowThrows) {
  try {
    covariance(Matrix::from_rows({{1, 2}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TooFewSamples);
  }
}

TEST(PowerIteration, DiagonalPicksDominantAxis) {
  Rng rng(1);
  const EigenPair ev = power_iteration(Matrix::from_rows({{4, 0}, {0, 1}}), rng);
  EXPECT_TRUE(ev.converged);
  EXPECT_NEAR(ev.vector[0], 1.0, 1e-9);
  EXPECT_NEAR(ev.vector[1], 0.0, 1e-6);
  EXPECT_NEAR(ev.value, 4.0, 1e-9);
}

TEST(PowerIteration, ZeroMatrixGivesFirstAxis) {
  Rng rng(1);
  const EigenPair ev = power_iteration(Matrix(3, 3), rng);
  EXPECT_EQ(ev.vector, (Vector{1, 0, 0}));
}

TEST(PowerIteration, TwoByTwoAnalytic) {
  Rng rng(2);
  const EigenPair ev = power_iteration(Matrix::from_rows({{2, 1}, {1, 2}}), rng);
  const double s = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(ev.vector[0], s, 1e-8);
  EXPECT_NEAR(ev.vector[1], s, 1e-8);
}

TEST(PowerIteration, ResidualBoundOnRandomSymmetric) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng.below(10);
    const Matrix g = gaussian_matrix(n, n, rng);
    const Matrix m = matmul(g.transpose(), g);
    const EigenPair ev = power_iteration(m, rng, 5000);
    const Vector mv = matvec(m, ev.vector);
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i) r += (mv[i] - ev.value * ev.vector[i]) * (mv[i] - ev.value * ev.vector[i]);
    if (ev.converged) {
      EXPECT_LE(std::sqrt(r), 1e-6 * std::max(1.0, std::abs(ev.value)));
    }
    EXPECT_NEAR(norm2(ev.vector), 1.0, 1e-12);
  }
}

TEST(PowerIteration, DescendingDiagonalRecoversFirstAxis) {
  Rng rng(4);
  const Matrix m = Matrix::from_rows({{5, 0, 0, 0}, {0, 3, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 0.5}});
  const EigenPair ev = power_iteration(m, rng);
  EXPECT_NEAR(std::abs(ev.vector[0]), 1.0, 1e-6);
}

TEST(PowerIteration, SignConventionLargestEntryPositive) {
  Rng rng(9);
  const EigenPair ev = power_iteration(Matrix::from_rows({{1, -2}, {-2, 1}}), rng);
  std::size_t best = std::abs(ev.vector[0]) >= std::abs(ev.vector[1]) ? 0 : 1;
  EXPECT_GT(ev.vector[best], 0.0);
}

TEST(SymmetricEigen, ReconstructsMatrix) {
  Rng rng(6);
  const Matrix g = gaussian_matrix(5, 5, rng);
  const Matrix m = matmul(g.transpose(), g);
  const SymmetricEigen e = symmetric_eigen(m);
  for (std::size_t k = 1; k < 5; ++k) EXPECT_GE(e.values[k - 1], e.values[k]);
  Matrix rebuilt(5, 5);
  for (std::size_t k = 0; k < 5; ++k)
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 5; ++j) rebuilt(i, j) += e.values[k] * e.vectors(i, k) * e.vectors(j, k);
  EXPECT_LT(frobenius_distance(rebuilt, m), 1e-9);
}

TEST(GaussianMatrix, Deterministic) {
  Rng a(42), b(42);
  EXPECT_EQ(gaussian_matrix(3, 4, a), gaussian_matrix(3, 4, b));
}

TEST(GaussianMatrix, MomentsMatchStandardNormal) {
  Rng rng(7);
  const Matrix m = gaussian_matrix(100, 100, rng);
  double mean = 0.0;
  for (double v : m.data()) mean += v;
  mean /= 1e4;
  double var = 0.0;
  for (double v : m.data()) var += (v - mean) * (v - mean);
  var /= 1e4 - 1;
  EXPECT_NEAR(mean, 0.0, 0.05);
  EXPECT_NEAR(var, 1.0, 0.1);
}

TEST(GaussianMatrix, SingleEntryIsFinite) {
  Rng rng(0);
  const Matrix m = gaussian_matrix(1, 1, rng);
  EXPECT_TRUE(std::isfinite(m(0, 0)));
}

TEST(Rng, SubstreamsIgnoreInterleaving) {
  const Rng root(123);
  Rng a1 = root.substream("alpha"), b1 = root.substream("beta");
  std::vector<std::uint64_t> a_alone, b_alone;
  for (int i = 0; i < 50; ++i) a_alone.push_back(a1.next_u64());
  for (int i = 0; i < 50; ++i) b_alone.push_back(b1.next_u64());

  Rng a2 = root.substream("alpha"), b2 = root.substream("beta");
  std::vector<std::uint64_t> a_mixed, b_mixed;
  for (int i = 0; i < 50; ++i) {
    b_mixed.push_back(b2.next_u64());
    a_mixed.push_back(a2.next_u64());
    (void)root.substream("gamma").next_u64();
  }
  EXPECT_EQ(a_alone, a_mixed);
  EXPECT_EQ(b_alone, b_mixed);
  EXPECT_NE(a_alone, b_alone);
}

TEST(Rng, IndexedSubstreamsDiffer) {
  const Rng root(1);
  EXPECT_NE(root.substream(std::uint64_t{0}).next_u64(), root.substream(std::uint64_t{1}).next_u64());
}

TEST(Rng, BelowStaysInRange) {
  Rng rng(77);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const std::size_t k = rng.below(7);
    ASSERT_LT(k, 7u);
    ++hits[k];
  }
  for (int h : hits) EXPECT_GT(h, 800);
}

TEST(Rng, UniformInUnitInterval) {
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

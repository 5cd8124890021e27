#include <array>
#include <span>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sigma2/algebra_suite.hpp"
#include "sigma2/random.hpp"
#include "sigma2/sampling.hpp"
#include "sigma2/symcone.hpp"

using namespace sigma2;

namespace {

constexpr std::uint64_t kSeed = 0x5eed5eedULL;

SymMat4 diag(double a, double b, double c, double d) { return SymMat4::diagonal(a, b, c, d); }

void expect_matrix_near(const SymMat4& a, const SymMat4& b, double tol) {
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(a(i, j), b(i, j), tol) << "entry " << i << "," << j;
}

void expect_matrix_near(const SymMat4& a, const Eigen::Matrix4d& b, double tol) {
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(a(i, j), b(i, j), tol) << "entry " << i << "," << j;
}

}  // namespace

TEST(SymMat, StorageIsSymmetric) {
  SymMat4 m;
  m.set(2, 1, 3.5);
  EXPECT_EQ(m(1, 2), 3.5);
  EXPECT_EQ(m(2, 1), 3.5);
  EXPECT_EQ(SymMat4::identity(2.0).trace(), 8.0);
}

TEST(SymMat, DenseRoundTrip) {
  SplitMix64 rng(kSeed);
  const auto a = sampling::symmetric(rng);
  EXPECT_EQ(SymMat4::from_dense(a.dense()), a);
}

TEST(ConeLevel, RejectsOutOfRange) {
  EXPECT_THROW(ConeLevel{0}, std::invalid_argument);
  EXPECT_THROW(ConeLevel{5}, std::invalid_argument);
  EXPECT_EQ(ConeLevel{3}.value(), 3);
}

TEST(Sigma, Examples) {
  EXPECT_DOUBLE_EQ(sigma(SymMat4::identity(0.5), ConeLevel{2}), 1.5);
  EXPECT_DOUBLE_EQ(sigma(SymMat4::identity(), ConeLevel{1}), 4.0);
  EXPECT_DOUBLE_EQ(sigma(diag(1, 2, 3, 4), ConeLevel{2}), 35.0);
  EXPECT_DOUBLE_EQ(sigma(diag(1, 2, 3, 4), ConeLevel{4}), 24.0);
}

TEST(Sigma, MatchesEigenvalueAndMinorOracles) {
  SplitMix64 rng(kSeed);
  for (int i = 0; i < 2000; ++i) {
    const auto a = sampling::symmetric(rng);
    const auto e = oracle::elementary_from_eigenvalues(a.dense());
    for (int k = 1; k <= 4; ++k) {
      EXPECT_NEAR(sigma(a, ConeLevel{k}), e[k], 1e-12);
      EXPECT_NEAR(sigma(a, ConeLevel{k}), oracle::principal_minor_sum(a.dense(), k), 1e-12);
    }
  }
}

TEST(Sigma, ConjugationInvariance) {
  SplitMix64 rng(kSeed + 1);
  for (int i = 0; i < 1000; ++i) {
    const auto a = sampling::symmetric(rng);
    const auto q = sampling::orthogonal(rng);
    ASSERT_NEAR((q.transpose() * q - Eigen::Matrix4d::Identity()).norm(), 0.0, 1e-12);
    for (int k = 1; k <= 4; ++k) EXPECT_NEAR(sigma(conjugate(a, q), ConeLevel{k}), sigma(a, ConeLevel{k}), 1e-10);
  }
}

TEST(Newton, Examples) {
  expect_matrix_near(newton(SymMat4::identity(), 1), SymMat4::identity(3.0), 0.0);
  expect_matrix_near(newton(SymMat4::identity(0.5), 1), SymMat4::identity(1.5), 0.0);
  expect_matrix_near(newton(diag(1, 2, 3, 4), 1), diag(9, 8, 7, 6), 0.0);
  expect_matrix_near(newton(diag(1, 2, 3, 4), 0), SymMat4::identity(), 0.0);
}

TEST(Newton, MatchesCayleyHamiltonOracleAndCommutes) {
  SplitMix64 rng(kSeed + 2);
  for (int i = 0; i < 1000; ++i) {
    const auto a = sampling::symmetric(rng);
    for (int k = 0; k <= 3; ++k) {
      const auto t = newton(a, k);
      expect_matrix_near(t, oracle::newton_transform(a.dense(), k), 1e-12);
      const Eigen::Matrix4d comm = a.dense() * t.dense() - t.dense() * a.dense();
      EXPECT_LT(comm.cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(Newton, RejectsOrderOutOfRange) {
  EXPECT_THROW(newton(SymMat4::identity(), 4), std::invalid_argument);
  EXPECT_THROW(newton(SymMat4::identity(), -1), std::invalid_argument);
}

TEST(NewtonMulti, Examples) {
  const std::array<SymMat4, 1> one{SymMat4::identity()};
  expect_matrix_near(newton_multi<double>(one), SymMat4::identity(3.0), 1e-15);
}

TEST(NewtonMulti, DiagonalAndSymmetry) {
  SplitMix64 rng(kSeed + 3);
  for (int i = 0; i < 300; ++i) {
    const auto a = sampling::symmetric(rng);
    const auto b = sampling::symmetric(rng);
    const auto c = sampling::symmetric(rng);
    const std::array<SymMat4, 3> aaa{a, a, a};
    for (int k = 1; k <= 3; ++k)
      expect_matrix_near(newton_multi<double>(std::span<const SymMat4>(aaa.data(), k)),
                         oracle::newton_transform(a.dense(), k), 1e-10);
    const std::array<SymMat4, 2> ab{a, b}, ba{b, a};
    expect_matrix_near(newton_multi<double>(ab), newton_multi<double>(ba), 1e-13);
    const std::array<SymMat4, 3> abc{a, b, c}, cab{c, a, b};
    expect_matrix_near(newton_multi<double>(abc), newton_multi<double>(cab), 1e-13);
  }
}

TEST(NewtonMulti, PolarizationOfTheDiagonal) {
  // T_2(A + B) = T_2(A) + T_2(B) + 2 T_2(A, B) by bilinearity and symmetry.
  SplitMix64 rng(kSeed + 4);
  for (int i = 0; i < 200; ++i) {
    const auto a = sampling::symmetric(rng);
    const auto b = sampling::symmetric(rng);
    const std::array<SymMat4, 2> ab{a, b};
    const Eigen::Matrix4d lhs = oracle::newton_transform((a + b).dense(), 2);
    const Eigen::Matrix4d rhs = oracle::newton_transform(a.dense(), 2) + oracle::newton_transform(b.dense(), 2) +
                                2.0 * newton_multi<double>(ab).dense();
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(NewtonMulti, RejectsBadArity) {
  std::array<SymMat4, 4> four{};
  EXPECT_THROW(newton_multi<double>(four), std::invalid_argument);
  EXPECT_THROW(newton_multi<double>(std::span<const SymMat4>()), std::invalid_argument);
}

TEST(SigmaPolarized, DiagonalConstantIsKForEveryMatrix) {
  SplitMix64 rng(kSeed + 5);
  const std::array<SymMat4, 2> ii{SymMat4::identity(), SymMat4::identity()};
  const double c = sigma_polarized<double>(ii) / sigma(SymMat4::identity(), ConeLevel{2});
  EXPECT_DOUBLE_EQ(c, sigma_polarized_diagonal_constant(2));
  for (int i = 0; i < 300; ++i) {
    const auto a = sampling::symmetric(rng);
    const std::array<SymMat4, 4> same{a, a, a, a};
    for (int k = 1; k <= 4; ++k)
      EXPECT_NEAR(sigma_polarized<double>(std::span<const SymMat4>(same.data(), k)),
                  k * oracle::elementary_from_eigenvalues(a.dense())[k], 1e-10);
  }
}

TEST(SigmaPolarized, ZeroSlotAndMonotonicity) {
  SplitMix64 rng(kSeed + 6);
  for (int i = 0; i < 300; ++i) {
    const auto a = sampling::cone_matrix(rng, ConeLevel{2});
    const auto a2 = sampling::cone_matrix(rng, ConeLevel{2});
    const std::array<SymMat4, 2> zero_a{SymMat4::zero(), a};
    EXPECT_EQ(sigma_polarized<double>(zero_a), 0.0);
    const auto b = a - 0.5 * sampling::positive_definite(rng);
    const std::array<SymMat4, 2> lo{b, a2}, hi{a, a2};
    EXPECT_LT(sigma_polarized<double>(lo), sigma_polarized<double>(hi));
  }
}

TEST(InCone, Examples) {
  EXPECT_TRUE(in_cone(diag(1, 1, 1, -0.1), ConeLevel{2}));
  EXPECT_NEAR(sigma(diag(1, 1, 1, -0.1), ConeLevel{1}), 2.9, 1e-15);
  EXPECT_NEAR(sigma(diag(1, 1, 1, -0.1), ConeLevel{2}), 2.7, 1e-15);
  EXPECT_FALSE(in_cone(diag(1, -1, 1, 1), ConeLevel{2}));
  EXPECT_TRUE(in_cone(SymMat4::identity(), ConeLevel{4}));
  EXPECT_EQ(first_cone_violation(diag(1, -1, 1, 1), ConeLevel{2}), 2);
}

TEST(InCone, NestedCones) {
  SplitMix64 rng(kSeed + 7);
  for (int i = 0; i < 5000; ++i) {
    const auto a = sampling::symmetric(rng) + SymMat4::identity(rng.uniform(-0.5, 1.5));
    for (int k = 2; k <= 4; ++k)
      if (in_cone(a, ConeLevel{k})) EXPECT_TRUE(in_cone(a, ConeLevel{k - 1}));
  }
}

TEST(Sampling, ShiftIsSmallestHalfInteger) {
  SplitMix64 rng(kSeed + 8);
  for (int i = 0; i < 200; ++i) {
    const auto a = sampling::symmetric(rng);
    const auto s = sampling::shift_into_cone(a, ConeLevel{2});
    const double t = (s - a).trace() / 4.0;
    EXPECT_DOUBLE_EQ(2.0 * t, std::round(2.0 * t));
    EXPECT_TRUE(in_cone(s, ConeLevel{2}));
    if (t > 0.0) EXPECT_FALSE(in_cone(a + SymMat4::identity(t - 0.5), ConeLevel{2}));
  }
}

TEST(Sampling, SeedReproducesStream) {
  SplitMix64 a(42), b(42);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(sampling::symmetric(a), sampling::symmetric(b));
  // Reference values of the SplitMix64 stream for seed 0.
  SplitMix64 z(0);
  EXPECT_EQ(z(), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(z(), 0x6e789e6aa1b965f4ULL);
}

TEST(RankOneDrop, Examples) {
  const Vec4 e1{1, 0, 0, 0};
  const auto s = rank_one_drop(SymMat4::identity(), e1, ConeLevel{2});
  EXPECT_DOUBLE_EQ(s.lhs, 3.0);
  EXPECT_DOUBLE_EQ(s.rhs, 3.0);
  SplitMix64 rng(kSeed + 9);
  const auto a = sampling::symmetric(rng);
  for (int k = 1; k <= 4; ++k) {
    const auto z = rank_one_drop(a, Vec4{}, ConeLevel{k});
    EXPECT_EQ(z.lhs, sigma(a, ConeLevel{k}));
    EXPECT_EQ(z.rhs, sigma(a, ConeLevel{k}));
  }
}

TEST(RankOneDrop, AgreesWithMinorOracle) {
  SplitMix64 rng(kSeed + 10);
  for (int i = 0; i < 2000; ++i) {
    const auto a = sampling::symmetric(rng);
    const auto x = sampling::vector(rng);
    const Eigen::Vector4d xv(x[0], x[1], x[2], x[3]);
    const Eigen::Matrix4d drop = a.dense() - xv * xv.transpose();
    for (int k = 1; k <= 4; ++k) {
      const auto s = rank_one_drop(a, x, ConeLevel{k});
      EXPECT_NEAR(s.lhs, oracle::principal_minor_sum(drop, k), 1e-11);
      EXPECT_NEAR(s.rhs, oracle::principal_minor_sum(drop, k), 1e-11);
    }
    for (int k = 0; k <= 3; ++k) {
      const auto p = rank_one_newton_pairing(a, x, k);
      EXPECT_NEAR(p.lhs, xv.dot(oracle::newton_transform(drop, k) * xv), 1e-10);
      EXPECT_NEAR(p.lhs, p.rhs, 1e-10);
    }
  }
}

TEST(CauchySchwarz, Examples) {
  const auto half = SymMat4::identity(0.5);
  auto s = t1_cauchy_schwarz(half, half);
  EXPECT_DOUBLE_EQ(s.lhs, 9.0);
  EXPECT_DOUBLE_EQ(s.rhs, 9.0);
  s = t1_cauchy_schwarz(SymMat4::identity(), SymMat4::identity(2.0));
  EXPECT_DOUBLE_EQ(s.lhs, 576.0);
  EXPECT_DOUBLE_EQ(s.rhs, 576.0);
}

TEST(CauchySchwarz, NamesTheOffendingMatrix) {
  const auto bad = diag(1, -1, -1, 0.5);
  try {
    t1_cauchy_schwarz(bad, SymMat4::identity());
    FAIL() << "expected a cone error";
  } catch (const ConeMembershipError& e) {
    EXPECT_EQ(e.argument(), "A");
    EXPECT_EQ(e.level(), 2);
  }
  try {
    t1_cauchy_schwarz(SymMat4::identity(), bad);
    FAIL() << "expected a cone error";
  } catch (const ConeMembershipError& e) {
    EXPECT_EQ(e.argument(), "B");
  }
}

TEST(CauchySchwarz, RandomConePairs) {
  SplitMix64 rng(kSeed + 11);
  for (int i = 0; i < 3000; ++i) {
    const auto a = sampling::cone_matrix(rng, ConeLevel{2});
    const auto b = sampling::cone_matrix(rng, ConeLevel{2});
    const auto s = t1_cauchy_schwarz(a, b);
    // Oracle for the left side: trace(T_1(B) A) from dense products.
    const double p = (oracle::newton_transform(b.dense(), 1) * a.dense()).trace();
    EXPECT_NEAR(s.lhs, p * p, 1e-9 * std::max(1.0, p * p));
    EXPECT_GE(s.difference(), -1e-12);
  }
}

TEST(SgQuadratic, Examples) {
  const Vec4 e1{1, 0, 0, 0}, e2{0, 1, 0, 0};
  EXPECT_DOUBLE_EQ(sg_quadratic(SymMat4::identity(0.5), e1, e2), -0.75);
  SplitMix64 rng(kSeed + 12);
  const auto a = sampling::cone_matrix(rng, ConeLevel{2});
  const auto x = sampling::vector(rng);
  EXPECT_EQ(sg_quadratic(a, x, x), 0.0);
  EXPECT_THROW(sg_quadratic(diag(1, -1, 1, 1), e1, e2), ConeMembershipError);
}

TEST(SgQuadratic, NonpositiveOnTheCone) {
  SplitMix64 rng(kSeed + 13);
  for (int i = 0; i < 3000; ++i) {
    const auto a = sampling::cone_matrix(rng, ConeLevel{2});
    EXPECT_LE(sg_quadratic(a, sampling::vector(rng), sampling::vector(rng)), 1e-12);
  }
}

TEST(NewtonMonotone, PositiveIncrements) {
  SplitMix64 rng(kSeed + 14);
  for (int i = 0; i < 1000; ++i) {
    const int k = 1 + i % 4;
    const auto a = sampling::cone_matrix(rng, ConeLevel{k});
    const auto b = a + sampling::positive_definite(rng);
    ASSERT_TRUE(in_cone(b, ConeLevel{k}));
    const Eigen::Matrix4d d = oracle::newton_transform(b.dense(), k - 1) - oracle::newton_transform(a.dense(), k - 1);
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d>(d).eigenvalues().minCoeff(), -1e-10);
  }
}

TEST(AlgebraSuite, AllChecksPassAndAreReproducible) {
  AlgebraOptions opt;
  opt.samples = 1000;
  const auto r1 = verify_algebra(opt);
  const auto r2 = verify_algebra(opt);
  EXPECT_TRUE(r1.passed());
  ASSERT_EQ(r1.checks.size(), r2.checks.size());
  for (std::size_t i = 0; i < r1.checks.size(); ++i) EXPECT_EQ(r1.checks[i].max_violation, r2.checks[i].max_violation);
}

TEST(AlgebraSuite, BreakConeRaises) {
  AlgebraOptions opt;
  opt.samples = 10;
  opt.break_cone = true;
  EXPECT_THROW(verify_algebra(opt), ConeMembershipError);
}

TEST(AlgebraSuite, NoSamples) {
  AlgebraOptions opt;
  opt.samples = 0;
  const auto r = verify_algebra(opt);
  EXPECT_TRUE(r.passed());
  for (const auto& c : r.checks)
    if (c.kind != "equality-case") EXPECT_EQ(c.samples, 0u);
}

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sigma2/conformal.hpp"
#include "sigma2/geodesic.hpp"
#include "sigma2/random.hpp"
#include "sigma2/sampling.hpp"

using namespace sigma2;

namespace {

constexpr double pi = std::numbers::pi;

// Independent Schouten eigenvalues for u = mobius_value(xi, lambda, 1) from
// closed-form derivatives in theta: with q = (1 + xi) + a^2 (1 - xi),
// u_theta = (a^2 - 1) sin / q and u_thetatheta = (a^2 - 1) (cos q - (a^2 - 1) sin^2) / q^2.
std::pair<double, double> mobius_schouten(double theta, double lambda) {
  const double a2 = std::exp(2.0 * lambda);
  const double c = std::cos(theta), s = std::sin(theta);
  const double q = (1.0 + c) + a2 * (1.0 - c);
  const double u1 = (a2 - 1.0) * s / q;
  const double u2 = (a2 - 1.0) * (c * q - (a2 - 1.0) * s * s) / (q * q);
  return {0.5 + u2 + 0.5 * u1 * u1, 0.5 + c / s * u1 - 0.5 * u1 * u1};
}

}  // namespace

TEST(Schouten, RoundMetric) {
  RadialGrid g(32);
  const auto s = schouten(g, g.constant(0.0));
  for (std::size_t j = 0; j < g.size(); ++j) {
    EXPECT_EQ(s.lam_rad[j], 0.5);
    EXPECT_EQ(s.lam_tan[j], 0.5);
    EXPECT_EQ(s.sigma2[j], 1.5);
    EXPECT_EQ(s.newton_rad(j), 1.5);
  }
  EXPECT_TRUE(s.admissibility().admissible);
  // Constant shifts scale sigma_2 by e^{4c} in the g_u convention.
  const auto t = schouten(g, g.constant(0.25));
  EXPECT_NEAR(t.sigma2_u[3], 1.5 * std::exp(1.0), 1e-14);
}

TEST(Schouten, MatchesClosedFormMobiusDerivatives) {
  RadialGrid g(256);
  const double lambda = 0.7;
  const auto s = schouten(g, mobius_factor(g, lambda));
  for (std::size_t j = 0; j < g.size(); ++j) {
    const auto [a, b] = mobius_schouten(g.theta(j), lambda);
    EXPECT_NEAR(s.lam_rad[j], a, 1e-6);
    EXPECT_NEAR(s.lam_tan[j], b, 1e-6);
  }
}

TEST(Schouten, MatrixFormAgreesWithEigenvalues) {
  RadialGrid g(64);
  SplitMix64 rng(5);
  const auto s = schouten(g, sampling::admissible_radial(g, rng));
  for (std::size_t j = 0; j < g.size(); j += 7) {
    const auto m = s.matrix(j);
    EXPECT_NEAR(sigma(m, ConeLevel{2}), s.sigma2[j], 1e-13);
    const auto t1 = newton(m, 1);
    EXPECT_NEAR(t1(0, 0), s.newton_rad(j), 1e-13);
    EXPECT_NEAR(t1(1, 1), s.newton_tan(j), 1e-13);
  }
}

TEST(Schouten, InadmissibleFactorIsReported) {
  RadialGrid g(64);
  const auto u = g.from_xi([](double x) { return 2.0 * x * x; });
  const auto r = admissibility(g, u);
  EXPECT_FALSE(r.admissible);
  EXPECT_THROW(require_admissible(schouten(g, u), "test"), AdmissibilityError);
  EXPECT_THROW(inner_product(g, u, u, u), AdmissibilityError);
}

TEST(RoundSphere, MobiusFactorIsRoundWithFourthOrderConvergence) {
  std::vector<double> errs;
  for (std::size_t n : {64, 128, 256}) {
    RadialGrid g(n);
    const auto u = mobius_factor(g, 1.0);
    const auto s = schouten(g, u);
    errs.push_back((s.sigma2_u - 1.5).max_abs());
    if (n == 256) {
      EXPECT_LT(errs.back(), 1e-6);
      EXPECT_LT(std::abs(conformal_volume(g, u) - 8.0 * pi * pi / 3.0), 1e-6);
    }
  }
  EXPECT_NEAR(std::log2(errs[0] / errs[1]), 4.0, 0.25);
  EXPECT_NEAR(std::log2(errs[1] / errs[2]), 4.0, 0.25);
}

TEST(RoundSphere, MobiusValueAtTimeZeroVanishes) {
  for (double x : {-0.9, 0.0, 0.4}) EXPECT_NEAR(mobius_value(x, 2.0, 0.0), 0.0, 1e-15);
}

TEST(TotalSigma, ConformalInvariance) {
  RadialGrid g(256);
  SplitMix64 rng(17);
  EXPECT_NEAR(total_sigma(g, g.constant(0.0)), 4.0 * pi * pi, 1e-10);
  for (int i = 0; i < 20; ++i)
    EXPECT_NEAR(total_sigma(g, sampling::admissible_radial(g, rng)), round_total_sigma, 1e-5);
}

TEST(Energy, VanishesOnRoundMetrics) {
  RadialGrid g(256);
  EXPECT_EQ(f_energy(g, g.constant(0.0)), 0.0);
  EXPECT_NEAR(f_energy(g, g.constant(0.3)), 0.0, 1e-12);
  EXPECT_LT(std::abs(f_energy(g, mobius_factor(g, 1.0))), 1e-5);
}

TEST(Energy, VariationMatchesCentralDifferences) {
  // The discrete variation agrees with the discrete energy to O(h^4); at 512
  // nodes that is below 1e-6 relative.
  RadialGrid g(512);
  SplitMix64 rng(23);
  for (int i = 0; i < 10; ++i) {
    const auto u = sampling::admissible_radial(g, rng);
    const auto v = sampling::admissible_radial(g, rng);
    const double h = 1e-4;
    const double fd = (f_energy(g, u + h * v) - f_energy(g, u - h * v)) / (2.0 * h);
    EXPECT_NEAR(f_variation(g, u, v), fd, 1e-6 * std::abs(fd));
  }
}

TEST(Energy, FirstVariationVanishesAtRoundMetrics) {
  RadialGrid g(128);
  SplitMix64 rng(29);
  const auto v = sampling::admissible_radial(g, rng);
  EXPECT_NEAR(f_variation(g, mobius_factor(g, 0.5), v), 0.0, 1e-4);
  EXPECT_NEAR(f_variation(g, g.constant(0.0), v), 0.0, 1e-12);
}

TEST(InnerProduct, NormalizedPairing) {
  RadialGrid g(64);
  const auto u = g.constant(0.0);
  const auto one = g.constant(1.0);
  EXPECT_NEAR(inner_product(g, u, one, one), 1.0, 1e-13);
  const auto xi = g.xi_field();
  EXPECT_NEAR(inner_product(g, u, xi, xi), 0.2, 1e-9);
  EXPECT_NEAR(inner_product(g, u, xi, one), 0.0, 1e-13);
}

TEST(Connection, ReducesToTimeDerivativeForConstantFields) {
  // alpha constant in space: the gradient term vanishes.
  RadialGrid g(32);
  const auto path = exact_sphere_path(g, 0.3, 9);
  SpacetimeField alpha(32, 9);
  for (std::size_t n = 0; n < 9; ++n)
    for (std::size_t j = 0; j < 32; ++j) alpha(j, n) = alpha.time(n) * alpha.time(n);
  const auto d = connection_derivative(g, path, alpha);
  for (std::size_t n = 1; n + 1 < 9; ++n) EXPECT_NEAR(d(5, n), 2.0 * d.time(n), 1e-10);
  EXPECT_THROW(connection_derivative(g, path, SpacetimeField(32, 10)), ShapeMismatchError);
}

TEST(Connection, MetricCompatibilityAlongExactPath) {
  // d/dt <a, b> = <Da, b> + <a, Db> with the normalized sigma_2-metric; the
  // path preserves the total sigma, so the normalization is constant in t.
  RadialGrid g(128);
  const std::size_t nt = 201;
  const auto path = exact_sphere_path(g, 0.4, nt);
  SpacetimeField a(g.size(), nt), b(g.size(), nt);
  for (std::size_t n = 0; n < nt; ++n)
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double t = a.time(n), x = g.xi(j);
      a(j, n) = x * (1.0 + t);
      b(j, n) = x * x + t * x;
    }
  const auto da = connection_derivative(g, path, a);
  const auto db = connection_derivative(g, path, b);
  const std::size_t n = nt / 2;
  const double dt = a.dt();
  const double lhs = (inner_product(g, path.slice(n + 1), a.slice(n + 1), b.slice(n + 1)) -
                      inner_product(g, path.slice(n - 1), a.slice(n - 1), b.slice(n - 1))) /
                     (2.0 * dt);
  const auto un = path.slice(n);
  const double rhs = inner_product(g, un, da.slice(n), b.slice(n)) + inner_product(g, un, a.slice(n), db.slice(n));
  EXPECT_NEAR(lhs, rhs, 1e-4);
}

TEST(Curvature, IntegrandMatchesNormalizedQuadratic) {
  const auto a = SymMat4::identity(0.5);
  const Vec4 e1{1, 0, 0, 0}, e2{0, 1, 0, 0};
  EXPECT_DOUBLE_EQ(curvature_integrand(a, e1, e2), -0.5);
}

TEST(Curvature, RadialPairingDegenerates) {
  RadialGrid g(64);
  SplitMix64 rng(31);
  const auto u = sampling::admissible_radial(g, rng);
  EXPECT_NEAR(curvature_pairing(g, u, g.xi_field(), g.from_xi([](double x) { return x * x * x; })), 0.0, 1e-12);
}

TEST(Andrews, RegressionTargets) {
  // Dense-quadrature oracle at u = 0: gap = int |grad phi|^2 - 4 int phi^2 for
  // mean-zero phi. For phi = xi^2 - 1/5 this is 128 pi^2 / 175.
  const double dirichlet = oracle::sphere_integral([](double t) {
    const double c = std::cos(t), s = std::sin(t);
    return 4.0 * c * c * s * s;
  });
  const double l2 = oracle::sphere_integral([](double t) {
    const double p = std::cos(t) * std::cos(t) - 0.2;
    return p * p;
  });
  const double target = dirichlet - 4.0 * l2;
  EXPECT_NEAR(target, 128.0 * pi * pi / 175.0, 1e-10);

  // The gap carries an O(h^4) derivative error: about 3e-8 at 256 nodes.
  RadialGrid g(512);
  const auto u = g.constant(0.0);
  EXPECT_NEAR(andrews_gap(g, u, g.xi_field()), 0.0, 1e-8);
  const double gap = andrews_gap(g, u, g.from_xi([](double x) { return x * x; }));
  EXPECT_GT(gap, 0.01);
  EXPECT_NEAR(gap, target, 1e-7);
}

TEST(Andrews, ConstantsAndRandomFieldsAreNonnegative) {
  RadialGrid g(128);
  SplitMix64 rng(37);
  EXPECT_NEAR(andrews_gap(g, g.constant(0.0), g.constant(3.0)), 0.0, 1e-12);
  for (int i = 0; i < 10; ++i) {
    const double c1 = rng.uniform(-1, 1), c2 = rng.uniform(-1, 1), c5 = rng.uniform(-1, 1);
    const auto phi = g.from_theta([&](double t) { return c1 * std::cos(t) + c2 * std::cos(2 * t) + c5 * std::cos(5 * t); });
    EXPECT_GE(andrews_gap(g, g.constant(0.0), phi), -1e-9);
  }
}

#pragma once

// Geometry of g_u = exp(-2u) g0 on the radial model of S^4.
//
// Everything is computed in background-index form: sigma2 below means
// sigma_2(g0^{-1} A_u) and integrals use dV0. Conversions to the g_u
// convention use sigma_2(g_u^{-1} A_u) = e^{4u} sigma_2(A_u) and dV_u = e^{-4u} dV0.
//
// For radial u the Schouten tensor A_u = A + Hess u + du (x) du - |du|^2 g / 2
// of the round background (A = g/2) has one eigenvalue along grad xi and a
// triple eigenvalue on the orthogonal 3-plane:
//   lam_rad = 1/2 + u_thetatheta + |du|^2 / 2,
//   lam_tan = 1/2 + cot(theta) u_theta - |du|^2 / 2.
// For eigenvalues (a, b, b, b): sigma1 = a + 3b, sigma2 = 3ab + 3b^2, and the
// Newton transform T_1 = sigma1 I - A has eigenvalues (3b, a + 2b).

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstddef>
#include <numbers>
#include <string>

#include "sigma2/errors.hpp"
#include "sigma2/spacetime.hpp"
#include "sigma2/sphere.hpp"
#include "sigma2/symcone.hpp"

namespace sigma2 {

inline constexpr double round_sigma2 = 1.5;
/// sigma = int sigma_2(g^{-1} A_g) dV_g on the round S^4.
inline constexpr double round_total_sigma = 4.0 * std::numbers::pi * std::numbers::pi;

/// Derived geometry of the conformal metric g_u.
struct ConformalState {
  RadialField u;
  RadialField grad;        // u_theta; grad u = u_theta d_theta
  RadialField lam_rad;     // Schouten eigenvalue along grad xi
  RadialField lam_tan;     // triple Schouten eigenvalue
  RadialField sigma1;      // sigma_1(A_u)
  RadialField sigma2;      // sigma_2(A_u), background-raised index
  RadialField sigma2_u;    // sigma_2(g_u^{-1} A_u) = e^{4u} sigma2
  RadialField vol_density; // dV_u / dV0 = e^{-4u}

  /// Eigenvalues of T_1(A_u): along grad xi and on the 3-plane.
  double newton_rad(std::size_t j) const { return 3.0 * lam_tan[j]; }
  double newton_tan(std::size_t j) const { return lam_rad[j] + 2.0 * lam_tan[j]; }

  /// A_u at node j in the frame (grad xi, 3-plane).
  SymMat4 matrix(std::size_t j) const {
    return SymMat4::diagonal(lam_rad[j], lam_tan[j], lam_tan[j], lam_tan[j]);
  }

  AdmissibilityReport admissibility() const {
    AdmissibilityReport r;
    r.min_sigma1 = sigma1.min();
    r.min_sigma2 = sigma2.min();
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < sigma2.size(); ++j) {
      const double m = std::min(sigma1[j], sigma2[j]);
      if (m < worst) {
        worst = m;
        r.worst_node = j;
      }
    }
    r.admissible = r.min_sigma1 > 0.0 && r.min_sigma2 > 0.0 && std::isfinite(worst);
    return r;
  }
};

inline ConformalState schouten(const RadialGrid& grid, const RadialField& u) {
  ConformalState s;
  s.u = u;
  const auto hess = grid.hessian_eigen(u);
  s.grad = grid.differentiate(u, 1);
  const std::size_t n = grid.size();
  s.lam_rad = RadialField(n);
  s.lam_tan = RadialField(n);
  s.sigma1 = RadialField(n);
  s.sigma2 = RadialField(n);
  s.sigma2_u = RadialField(n);
  s.vol_density = RadialField(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double g2 = s.grad[j] * s.grad[j];
    const double a = 0.5 + hess.rad[j] + 0.5 * g2;
    const double b = 0.5 + hess.tan[j] - 0.5 * g2;
    s.lam_rad[j] = a;
    s.lam_tan[j] = b;
    s.sigma1[j] = a + 3.0 * b;
    s.sigma2[j] = 3.0 * a * b + 3.0 * b * b;
    s.vol_density[j] = std::exp(-4.0 * u[j]);
    s.sigma2_u[j] = s.sigma2[j] / s.vol_density[j];
  }
  return s;
}

inline AdmissibilityReport admissibility(const RadialGrid& grid, const RadialField& u) {
  return schouten(grid, u).admissibility();
}

inline void require_admissible(const ConformalState& s, const std::string& what) {
  if (auto r = s.admissibility(); !r.admissible) throw AdmissibilityError(what, r);
}

/// Conformal factor of the dilation-conjugated stereographic family,
/// u = -log(2 alpha) + log[(1 + xi) + alpha^2 (1 - xi)] with alpha = e^{lambda t}.
inline double mobius_value(double xi, double lambda, double t) {
  const double alpha = std::exp(lambda * t);
  return -std::log(2.0 * alpha) + std::log((1.0 + xi) + alpha * alpha * (1.0 - xi));
}

inline RadialField mobius_factor(const RadialGrid& grid, double lambda, double t = 1.0) {
  return grid.from_xi([&](double xi) { return mobius_value(xi, lambda, t); });
}

/// V_u = int dV_u.
inline double conformal_volume(const RadialGrid& grid, const RadialField& u) {
  return grid.integrate_volume(u.map([](double x) { return std::exp(-4.0 * x); }));
}

/// int sigma_2(g_u^{-1} A_u) dV_u = int sigma_2(A_u) dV0 (a conformal invariant).
inline double total_sigma(const RadialGrid& grid, const RadialField& u) {
  return grid.integrate_volume(schouten(grid, u).sigma2);
}

/// Chang-Yang functional on the round background (Ric = 3g, R = 12,
/// sigma_2(A_g) = 3/2):
///   F[u] = int { 2 Lap(u) |du|^2 - |du|^4 - 6 |du|^2 + 12 |du|^2 - 12 u } dV
///          - 2 sigma log( avg of e^{-4u} ),
/// with sigma and the average taken with the discrete round volume so that
/// F vanishes on constants up to rounding.
inline double f_energy(const RadialGrid& grid, const RadialField& u) {
  const auto g2 = grid.grad_sq(u);
  const auto lap = grid.laplacian(u);
  RadialField integrand(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j)
    integrand[j] = 2.0 * lap[j] * g2[j] - g2[j] * g2[j] - 6.0 * g2[j] + 12.0 * g2[j] -
                   8.0 * u[j] * round_sigma2;
  const double vol0 = grid.volume();
  const double sigma0 = round_sigma2 * vol0;
  return grid.integrate_volume(integrand) - 2.0 * sigma0 * std::log(conformal_volume(grid, u) / vol0);
}

/// Scale between the derivative of F as written above and the normalized
/// first variation int v [-sigma_2(g_u^{-1}A_u) + sigma_bar] dV_u.
inline constexpr double f_variation_scale = 8.0;

/// L2(dV0) density of the normalized first variation:
/// -sigma_2(A_u) + sigma_bar e^{-4u}, sigma_bar = total_sigma / V_u.
inline RadialField f_gradient_density(const RadialGrid& grid, const RadialField& u) {
  const auto s = schouten(grid, u);
  const double sigma_bar = grid.integrate_volume(s.sigma2) / grid.integrate_volume(s.vol_density);
  return -1.0 * s.sigma2 + sigma_bar * s.vol_density;
}

/// Directional derivative dF[u + h v]/dh at h = 0:
///   8 int v [-sigma_2(g_u^{-1} A_u) + sigma_bar] dV_u.
inline double f_variation(const RadialGrid& grid, const RadialField& u, const RadialField& v) {
  return f_variation_scale * grid.integrate_volume(v * f_gradient_density(grid, u));
}

/// sigma_2-metric <phi, psi>_u = (1/sigma) int phi psi sigma_2(g_u^{-1} A_u) dV_u.
inline double inner_product(const RadialGrid& grid, const RadialField& u, const RadialField& phi,
                            const RadialField& psi) {
  const auto s = schouten(grid, u);
  require_admissible(s, "inner_product");
  const double sigma = grid.integrate_volume(s.sigma2);
  return grid.integrate_volume(phi * psi * s.sigma2) / sigma;
}

/// D alpha / dt = alpha_t - sigma_2(A_u)^{-1} <T_1(A_u), grad alpha (x) grad u_t>
/// along a path; both gradients are radial, so the pairing is
/// 3 lam_tan alpha_theta (u_t)_theta.
inline SpacetimeField connection_derivative(const RadialGrid& grid, const SpacetimeField& path,
                                            const SpacetimeField& alpha) {
  if (!path.same_shape(alpha) || path.n_theta() != grid.size())
    throw ShapeMismatchError("connection_derivative: path and field shapes differ");
  const auto ut = time_derivative(path);
  const auto at = time_derivative(alpha);
  SpacetimeField out(path.n_theta(), path.n_time(), path.t_begin(), path.t_end());
  for (std::size_t n = 0; n < path.n_time(); ++n) {
    const auto s = schouten(grid, path.slice(n));
    require_admissible(s, "connection_derivative");
    const auto da = grid.differentiate(alpha.slice(n), 1);
    const auto dut = grid.differentiate(ut.slice(n), 1);
    for (std::size_t j = 0; j < grid.size(); ++j)
      out(j, n) = at(j, n) - s.newton_rad(j) * da[j] * dut[j] / s.sigma2[j];
  }
  return out;
}

/// Pointwise sectional-curvature integrand for A in Gamma_2+ and tangent
/// vectors X, Y: sigma_2(A)^{-1} (-T(X,X) T(Y,Y) + T(X,Y)^2) + |X|^2|Y|^2 - <X,Y>^2.
inline double curvature_integrand(const SymMat4& a, const Vec4& x, const Vec4& y) {
  return sg_quadratic(a, x, y) / sigma(a, ConeLevel{2});
}

/// K(phi, psi) = int sigma_2(B)^{-1} { -T(dphi,dphi) T(dpsi,dpsi) + T(dphi,dpsi)^2
///   + sigma_2(B) (|dphi|^2 |dpsi|^2 - <dphi,dpsi>^2) } dV_u with B = g_u^{-1} A_u and
/// all pairings taken in g_u. Radial gradients are collinear, so the value
/// vanishes up to rounding; the integrand is still evaluated term by term.
inline double curvature_pairing(const RadialGrid& grid, const RadialField& u, const RadialField& phi,
                                const RadialField& psi) {
  const auto s = schouten(grid, u);
  require_admissible(s, "curvature_pairing");
  const auto dphi = grid.differentiate(phi, 1);
  const auto dpsi = grid.differentiate(psi, 1);
  RadialField integrand(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    // In g_u: |d f|^2_{g_u} = e^{2u} f_theta^2, and the radial eigenvalue of
    // T_1(g_u^{-1} A_u) is e^{2u} 3 lam_tan.
    const double e2u = std::exp(2.0 * u[j]);
    const double t_rad = e2u * s.newton_rad(j);
    const double pp = e2u * dphi[j] * dphi[j], qq = e2u * dpsi[j] * dpsi[j], pq = e2u * dphi[j] * dpsi[j];
    const double s2 = s.sigma2_u[j];
    integrand[j] = (-(t_rad * pp) * (t_rad * qq) + (t_rad * pq) * (t_rad * pq) + s2 * (pp * qq - pq * pq)) / s2 *
                   s.vol_density[j];
  }
  return grid.integrate_volume(integrand);
}

/// Andrews gap in the metric g_u:
///   int sigma_2(B)^{-1} T_1(B)(dphi, dphi) dV_u - 4 [ int phi^2 dV_u - V_u^{-1} (int phi dV_u)^2 ],
/// B = g_u^{-1} A_u, after projecting phi to dV_u-mean zero. For radial phi the
/// first integrand reduces to 3 lam_tan phi_theta^2 / sigma_2(A_u) e^{-4u}.
inline double andrews_gap(const RadialGrid& grid, const RadialField& u, const RadialField& phi) {
  const auto s = schouten(grid, u);
  require_admissible(s, "andrews_gap");
  const double vol = grid.integrate_volume(s.vol_density);
  const double mean = grid.integrate_volume(phi * s.vol_density) / vol;
  const auto p = phi - mean;
  const auto dp = grid.differentiate(p, 1);
  RadialField dirichlet(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j)
    dirichlet[j] = s.newton_rad(j) * dp[j] * dp[j] / s.sigma2[j] * s.vol_density[j];
  const double first = grid.integrate_volume(dirichlet);
  const double l1 = grid.integrate_volume(p * s.vol_density);
  const double l2 = grid.integrate_volume(p * p * s.vol_density);
  return first - 4.0 * (l2 - l1 * l1 / vol);
}

}  // namespace sigma2

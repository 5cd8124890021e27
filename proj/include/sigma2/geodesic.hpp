#pragma once

// The sigma_2-metric geodesic equation on the radial model of S^4 and its
// regularization
//   Phi_eps(u) = (1 + eps) u_tt sigma_2(A_u) - <T_1(A_u), grad u_t (x) grad u_t> = s f.
//
// Paths are SpacetimeFields on [0, 1]. Time derivatives are second-order
// centered differences on interior time slices; the first and last slices
// hold Dirichlet data and carry no equation. With radial gradients the
// pairing is <T_1(A_u), grad u_t (x) grad u_t> = 3 lam_tan (u_t)_theta^2.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "sigma2/conformal.hpp"
#include "sigma2/errors.hpp"
#include "sigma2/spacetime.hpp"
#include "sigma2/sphere.hpp"
#include "sigma2/symcone.hpp"

namespace sigma2 {

/// Pointwise space-time geometry of a path at node (theta_j, t_n).
struct PathNode {
  double utt;      // u_tt
  double ut;       // u_t
  double grad;     // u_theta
  double hess_rad; // u_thetatheta
  double hess_tan; // cot(theta) u_theta
  double grad_ut;  // (u_t)_theta
  double lam_rad;
  double lam_tan;
  double sigma2;   // sigma_2(A_u)
};

/// Evaluates PathNode at every node. Interior slices use centered time
/// differences; the end slices use the one-sided formulas of spacetime.hpp.
class PathGeometry {
 public:
  PathGeometry(const RadialGrid& grid, const SpacetimeField& u)
      : n_theta_(u.n_theta()), n_time_(u.n_time()), nodes_(u.n_theta() * u.n_time()) {
    if (u.n_theta() != grid.size()) throw ShapeMismatchError("path does not match grid");
    const auto ut = time_derivative(u);
    const auto utt = second_time_derivative(u);
    for (std::size_t n = 0; n < n_time_; ++n) {
      const auto slice = u.slice(n);
      const auto d1 = grid.differentiate(slice, 1);
      const auto d2 = grid.differentiate(slice, 2);
      const auto dut = grid.differentiate(ut.slice(n), 1);
      for (std::size_t j = 0; j < n_theta_; ++j) {
        PathNode& p = nodes_[n * n_theta_ + j];
        p.utt = utt(j, n);
        p.ut = ut(j, n);
        p.grad = d1[j];
        p.hess_rad = d2[j];
        p.hess_tan = grid.cot_theta(j) * d1[j];
        p.grad_ut = dut[j];
        const double g2 = p.grad * p.grad;
        p.lam_rad = 0.5 + p.hess_rad + 0.5 * g2;
        p.lam_tan = 0.5 + p.hess_tan - 0.5 * g2;
        p.sigma2 = 3.0 * p.lam_rad * p.lam_tan + 3.0 * p.lam_tan * p.lam_tan;
      }
    }
  }

  const PathNode& operator()(std::size_t j, std::size_t n) const { return nodes_[n * n_theta_ + j]; }
  std::size_t n_theta() const noexcept { return n_theta_; }
  std::size_t n_time() const noexcept { return n_time_; }

 private:
  std::size_t n_theta_, n_time_;
  std::vector<PathNode> nodes_;
};

/// Phi_eps at one node.
inline double phi_eps(const PathNode& p, double eps) {
  return (1.0 + eps) * p.utt * p.sigma2 - 3.0 * p.lam_tan * p.grad_ut * p.grad_ut;
}

/// Eigenvalues of E = (1 + eps) u_tt A_u - grad u_t (x) grad u_t in the frame
/// (grad xi, 3-plane): e_rad once, e_tan three times.
struct ETensorEigen {
  SpacetimeField e_rad;
  SpacetimeField e_tan;
};

inline std::pair<double, double> e_tensor_at(const PathNode& p, double eps) {
  const double c = (1.0 + eps) * p.utt;
  return {c * p.lam_rad - p.grad_ut * p.grad_ut, c * p.lam_tan};
}

inline ETensorEigen e_tensor(const RadialGrid& grid, const SpacetimeField& u, double eps) {
  PathGeometry geo(grid, u);
  ETensorEigen e{SpacetimeField(u.n_theta(), u.n_time(), u.t_begin(), u.t_end()),
                 SpacetimeField(u.n_theta(), u.n_time(), u.t_begin(), u.t_end())};
  for (std::size_t n = 0; n < u.n_time(); ++n)
    for (std::size_t j = 0; j < u.n_theta(); ++j) {
      auto [r, t] = e_tensor_at(geo(j, n), eps);
      e.e_rad(j, n) = r;
      e.e_tan(j, n) = t;
    }
  return e;
}

/// Admissibility of a space-time path: E in Gamma_2+ and u_tt > 0.
struct PathAdmissibility {
  bool admissible = true;
  double min_utt = std::numeric_limits<double>::infinity();
  double min_sigma1_e = std::numeric_limits<double>::infinity();
  double min_sigma2_e = std::numeric_limits<double>::infinity();
  std::size_t worst_theta = 0, worst_time = 0;
};

/// Scans interior slices (and the end slices when include_ends is set). With
/// `closed` the closure of the cone is accepted (u_tt >= 0, sigma_k(E) >= 0),
/// which is where solutions of the unforced equation live.
inline PathAdmissibility path_admissibility(const PathGeometry& geo, double eps, bool include_ends = false,
                                            bool closed = false) {
  PathAdmissibility r;
  double worst = std::numeric_limits<double>::infinity();
  const std::size_t first = include_ends ? 0 : 1;
  const std::size_t last = include_ends ? geo.n_time() : geo.n_time() - 1;
  for (std::size_t n = first; n < last; ++n)
    for (std::size_t j = 0; j < geo.n_theta(); ++j) {
      const auto& p = geo(j, n);
      auto [er, et] = e_tensor_at(p, eps);
      const double s1 = er + 3.0 * et;
      const double s2 = 3.0 * er * et + 3.0 * et * et;
      r.min_utt = std::min(r.min_utt, p.utt);
      r.min_sigma1_e = std::min(r.min_sigma1_e, s1);
      r.min_sigma2_e = std::min(r.min_sigma2_e, s2);
      const double m = std::min({p.utt, s1, s2});
      if (!(m >= worst)) {
        worst = m;
        r.worst_theta = j;
        r.worst_time = n;
      }
    }
  r.admissible = closed ? worst >= 0.0 : worst > 0.0;
  return r;
}

inline PathAdmissibility path_admissibility(const RadialGrid& grid, const SpacetimeField& u, double eps,
                                            bool include_ends = false) {
  return path_admissibility(PathGeometry(grid, u), eps, include_ends);
}

/// Phi_eps(u) on interior slices; zero on the two Dirichlet slices.
inline SpacetimeField geodesic_operator(const RadialGrid& grid, const SpacetimeField& u, double eps) {
  PathGeometry geo(grid, u);
  SpacetimeField out(u.n_theta(), u.n_time(), u.t_begin(), u.t_end());
  for (std::size_t n = 1; n + 1 < u.n_time(); ++n)
    for (std::size_t j = 0; j < u.n_theta(); ++j) out(j, n) = phi_eps(geo(j, n), eps);
  return out;
}

/// Phi_eps(u) - s f on interior slices; zero on the Dirichlet slices.
inline SpacetimeField residual(const RadialGrid& grid, const SpacetimeField& u, double eps,
                               const SpacetimeField& f, double s) {
  if (!u.same_shape(f)) throw ShapeMismatchError("residual: source shape differs from path");
  auto r = geodesic_operator(grid, u, eps);
  for (std::size_t n = 1; n + 1 < u.n_time(); ++n)
    for (std::size_t j = 0; j < u.n_theta(); ++j) r(j, n) -= s * f(j, n);
  return r;
}

/// Exact geodesic through u = 0 generated by the conformal dilations,
/// u(xi, t) = -log(2 alpha) + log[(1 + xi) + alpha^2 (1 - xi)], alpha = e^{lambda t}.
inline SpacetimeField exact_sphere_path(const RadialGrid& grid, double lambda, std::size_t n_time) {
  SpacetimeField u(grid.size(), n_time);
  for (std::size_t n = 0; n < n_time; ++n)
    for (std::size_t j = 0; j < grid.size(); ++j) u(j, n) = mobius_value(grid.xi(j), lambda, u.time(n));
  return u;
}

/// Agreement of [(1 + eps) u_tt]^{-1} sigma_2(E) with Phi_eps(u) on interior nodes.
struct SigmaFormCheck {
  double sup = 0.0;
  double mean = 0.0;
  double scaled_sup = 0.0;  // each discrepancy divided by max(1, 1/u_tt)
};

inline SigmaFormCheck sigma_form_check(const RadialGrid& grid, const SpacetimeField& u, double eps) {
  PathGeometry geo(grid, u);
  SigmaFormCheck c;
  std::size_t count = 0;
  for (std::size_t n = 1; n + 1 < u.n_time(); ++n)
    for (std::size_t j = 0; j < u.n_theta(); ++j) {
      const auto& p = geo(j, n);
      if (!(p.utt > 0.0)) throw PositivityError("sigma_form_check: u_tt <= 0 at an interior node");
      auto [er, et] = e_tensor_at(p, eps);
      const double sigma2_e = sigma(SymMat4::diagonal(er, et, et, et), ConeLevel{2});
      const double d = std::abs(sigma2_e / ((1.0 + eps) * p.utt) - phi_eps(p, eps));
      c.sup = std::max(c.sup, d);
      c.scaled_sup = std::max(c.scaled_sup, d / std::max(1.0, 1.0 / p.utt));
      c.mean += d;
      ++count;
    }
  if (count > 0) c.mean /= static_cast<double>(count);
  return c;
}

/// Linearized operator of v -> u_tt^{-1} sigma_2(E_u) at u, applied to v:
///   L v = (1 + eps) u_tt^{-1} f v_tt
///       + u_tt^{-1} < T_1(E), (1 + eps) u_tt (Hess v + dv (x) du + du (x) dv - <dv, du> g)
///                             - dv_t (x) du_t - du_t (x) dv_t + u_tt^{-1} v_tt du_t (x) du_t >
/// with f = Phi_eps(u). Since u_tt^{-1} sigma_2(E) = (1 + eps) Phi_eps(u), this is
/// (1 + eps) times the derivative of Phi_eps.
inline SpacetimeField linearize_apply(const RadialGrid& grid, const SpacetimeField& u, const SpacetimeField& v,
                                      double eps) {
  if (!u.same_shape(v)) throw ShapeMismatchError("linearize_apply: shapes differ");
  PathGeometry gu(grid, u);
  if (auto a = path_admissibility(gu, eps); !a.admissible)
    throw AdmissibilityError("linearize_apply: path not admissible",
                             {false, a.min_sigma1_e, a.min_sigma2_e, a.worst_theta});
  PathGeometry gv(grid, v);
  SpacetimeField out(u.n_theta(), u.n_time(), u.t_begin(), u.t_end());
  const double c = 1.0 + eps;
  for (std::size_t n = 1; n + 1 < u.n_time(); ++n)
    for (std::size_t j = 0; j < u.n_theta(); ++j) {
      const auto& p = gu(j, n);
      const auto& q = gv(j, n);
      auto [er, et] = e_tensor_at(p, eps);
      const double t_rad = 3.0 * et, t_tan = er + 2.0 * et;
      const double dvdu = q.grad * p.grad;
      const double m_rad = c * p.utt * (q.hess_rad + 2.0 * dvdu - dvdu) - 2.0 * q.grad_ut * p.grad_ut +
                           q.utt / p.utt * p.grad_ut * p.grad_ut;
      const double m_tan = c * p.utt * (q.hess_tan - dvdu);
      const double f = phi_eps(p, eps);
      out(j, n) = c * f * q.utt / p.utt + (t_rad * m_rad + 3.0 * t_tan * m_tan) / p.utt;
    }
  return out;
}

/// Sparse Jacobian of the interior residual Phi_eps(u) - s f with respect to
/// the interior unknowns. Unknown (j, n) for 1 <= n <= n_time - 2 has index
/// (n - 1) n_theta + j; couplings to the Dirichlet slices are dropped.
inline Eigen::SparseMatrix<double> geodesic_jacobian(const RadialGrid& grid, const SpacetimeField& u, double eps) {
  PathGeometry geo(grid, u);
  const std::size_t nth = u.n_theta(), nt = u.n_time();
  const std::size_t m = nt - 2;
  const double h = grid.spacing(), dt = u.dt();
  const double c = 1.0 + eps;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(m * nth * 16);
  auto col = [&](std::size_t jj, std::size_t nn) -> std::ptrdiff_t {
    if (nn == 0 || nn + 1 == nt) return -1;
    return static_cast<std::ptrdiff_t>((nn - 1) * nth + jj);
  };
  for (std::size_t n = 1; n + 1 < nt; ++n)
    for (std::size_t j = 0; j < nth; ++j) {
      const auto& p = geo(j, n);
      const auto row = static_cast<std::ptrdiff_t>((n - 1) * nth + j);
      // R = c u_tt sigma2(lr, lt) - 3 lt w^2, sigma2 = 3 lr lt + 3 lt^2,
      // lr = 1/2 + H + g^2/2, lt = 1/2 + cot g - g^2/2.
      const double d_utt = c * p.sigma2;
      const double d_lr = c * p.utt * 3.0 * p.lam_tan;
      const double d_lt = c * p.utt * (3.0 * p.lam_rad + 6.0 * p.lam_tan) - 3.0 * p.grad_ut * p.grad_ut;
      const double d_h = d_lr;
      const double d_g = d_lr * p.grad + d_lt * (grid.cot_theta(j) - p.grad);
      const double d_w = -6.0 * p.lam_tan * p.grad_ut;
      auto add = [&](std::size_t jj, std::size_t nn, double v) {
        if (auto cidx = col(jj, nn); cidx >= 0 && v != 0.0) trip.emplace_back(row, cidx, v);
      };
      add(j, n - 1, d_utt / (dt * dt));
      add(j, n, -2.0 * d_utt / (dt * dt));
      add(j, n + 1, d_utt / (dt * dt));
      for (int k = 0; k < 5; ++k) {
        const std::size_t jj = grid.reflect(static_cast<std::ptrdiff_t>(j) + k - 2);
        add(jj, n, d_h * RadialGrid::d2_stencil[k] / (h * h) + d_g * RadialGrid::d1_stencil[k] / h);
        const double wk = d_w * RadialGrid::d1_stencil[k] / h / (2.0 * dt);
        add(jj, n + 1, wk);
        add(jj, n - 1, -wk);
      }
    }
  Eigen::SparseMatrix<double> jac(static_cast<Eigen::Index>(m * nth), static_cast<Eigen::Index>(m * nth));
  jac.setFromTriplets(trip.begin(), trip.end());
  jac.makeCompressed();
  return jac;
}

// ---------------------------------------------------------------------------
// Continuation solver

/// Default continuation values of s.
inline std::vector<double> default_s_schedule() {
  return {1.0, 0.5, 0.2, 0.1, 0.05, 0.02, 0.01, 5e-3, 2e-3, 1e-3};
}

struct ContinuationSchedule {
  std::vector<double> s_values = default_s_schedule();
  double newton_tol = 1e-10;  // sup norm of the interior residual
  int max_newton = 30;
  double min_damping = 1.0 / 1024.0;
  int max_bisections = 6;     // refinements of one failed continuation step
  // Called with (s, path) after each scheduled value of s is reached.
  std::function<void(double, const SpacetimeField&)> observer;
};

struct GeodesicProblem {
  RadialField u0, u1;
  double epsilon = 1e-3;
  double s = 1e-3;                         // final continuation weight
  std::size_t n_time = 64;
  std::optional<SpacetimeField> source;    // f; built from the convexified path when empty
  double lambda_convex = 0.0;              // 0 selects the smallest admissible half-integer
};

struct ContinuationStep {
  double s;
  int newton_iterations;
  double residual;
  double min_damping;
};

/// Diagnostics along a path. Conserved quantities use the normalized inner
/// product: momentum(t) = <u_t, 1>_u and energy(t) = <u_t, u_t>_u.
struct GeodesicMonitors {
  double sup_u = 0.0;
  double sup_grad_u = 0.0;
  double sup_ut = 0.0;
  double eps_sup_utt = 0.0;
  double eps_sup_lap = 0.0;
  double min_utt = 0.0;
  double min_sigma2_e = 0.0;
  std::vector<double> momentum, energy;
  double momentum_drift = 0.0, energy_drift = 0.0;
  std::vector<double> f_values;   // F at each time node
  std::vector<double> d2f;        // centered second differences of F, interior nodes
  double min_d2f = 0.0;
  double convexity_constant = 0.0;  // max(0, -min d2F) / (s + eps)
};

struct GeodesicSolution {
  SpacetimeField u;
  SpacetimeField source;
  double epsilon = 0.0;
  double s = 0.0;
  double lambda_convex = 0.0;
  double residual_norm = 0.0;
  bool admissible = false;
  GeodesicMonitors monitors;
  std::vector<ContinuationStep> trace;
  std::vector<double> residual_history;
};

inline GeodesicMonitors geodesic_monitors(const RadialGrid& grid, const SpacetimeField& u, double eps, double s) {
  GeodesicMonitors m;
  PathGeometry geo(grid, u);
  const std::size_t nt = u.n_time();
  m.min_utt = std::numeric_limits<double>::infinity();
  m.min_sigma2_e = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < nt; ++n) {
    const auto slice = u.slice(n);
    const auto st = schouten(grid, slice);
    const double sigma = grid.integrate_volume(st.sigma2);
    RadialField ut(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const auto& p = geo(j, n);
      ut[j] = p.ut;
      m.sup_u = std::max(m.sup_u, std::abs(slice[j]));
      m.sup_grad_u = std::max(m.sup_grad_u, std::abs(p.grad));
      m.sup_ut = std::max(m.sup_ut, std::abs(p.ut));
      m.eps_sup_lap = std::max(m.eps_sup_lap, eps * std::abs(p.hess_rad + 3.0 * p.hess_tan));
      if (n > 0 && n + 1 < nt) {
        m.eps_sup_utt = std::max(m.eps_sup_utt, eps * std::abs(p.utt));
        m.min_utt = std::min(m.min_utt, p.utt);
        auto [er, et] = e_tensor_at(p, eps);
        m.min_sigma2_e = std::min(m.min_sigma2_e, 3.0 * er * et + 3.0 * et * et);
      }
    }
    m.momentum.push_back(grid.integrate_volume(ut * st.sigma2) / sigma);
    m.energy.push_back(grid.integrate_volume(ut * ut * st.sigma2) / sigma);
    m.f_values.push_back(f_energy(grid, slice));
  }
  auto spread = [](const std::vector<double>& v) {
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi - *lo;
  };
  m.momentum_drift = spread(m.momentum);
  m.energy_drift = spread(m.energy);
  const double dt = u.dt();
  m.min_d2f = std::numeric_limits<double>::infinity();
  for (std::size_t n = 1; n + 1 < nt; ++n) {
    m.d2f.push_back((m.f_values[n + 1] - 2.0 * m.f_values[n] + m.f_values[n - 1]) / (dt * dt));
    m.min_d2f = std::min(m.min_d2f, m.d2f.back());
  }
  m.convexity_constant = (s + eps) > 0.0 ? std::max(0.0, -m.min_d2f) / (s + eps) : 0.0;
  return m;
}

namespace detail {

/// w = t u1 + (1 - t) u0 + lambda t (t - 1).
inline SpacetimeField convexified_path(const RadialField& u0, const RadialField& u1, std::size_t n_time,
                                       double lambda) {
  SpacetimeField w(u0.size(), n_time);
  for (std::size_t n = 0; n < n_time; ++n) {
    const double t = w.time(n);
    for (std::size_t j = 0; j < u0.size(); ++j) w(j, n) = t * u1[j] + (1.0 - t) * u0[j] + lambda * t * (t - 1.0);
  }
  return w;
}

struct NewtonOutcome {
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;
  double min_damping = 1.0;
};

/// Damped Newton for Phi_eps(u) = target on interior nodes, with Armijo
/// backtracking on the sup-norm residual and an admissibility gate on every
/// trial iterate. `u` is updated only on success.
inline NewtonOutcome newton_solve(const RadialGrid& grid, SpacetimeField& u, double eps, const SpacetimeField& target,
                                  bool closed_cone, const ContinuationSchedule& opts, std::vector<double>& history) {
  NewtonOutcome out;
  SpacetimeField x = u;
  auto interior_residual = [&](const SpacetimeField& y) {
    auto r = geodesic_operator(grid, y, eps);
    for (std::size_t n = 1; n + 1 < y.n_time(); ++n)
      for (std::size_t j = 0; j < y.n_theta(); ++j) r(j, n) -= target(j, n);
    return r;
  };
  auto r = interior_residual(x);
  double rn = r.interior_max_abs();
  history.push_back(rn);
  const std::size_t nth = x.n_theta(), m = x.n_time() - 2;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  bool analyzed = false;
  for (int it = 0; it < opts.max_newton && rn >= opts.newton_tol; ++it) {
    const auto jac = geodesic_jacobian(grid, x, eps);
    if (!analyzed) {
      lu.analyzePattern(jac);
      analyzed = true;
    }
    lu.factorize(jac);
    if (lu.info() != Eigen::Success) return out;
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(m * nth));
    for (std::size_t n = 1; n <= m; ++n)
      for (std::size_t j = 0; j < nth; ++j) rhs[static_cast<Eigen::Index>((n - 1) * nth + j)] = -r(j, n);
    const Eigen::VectorXd d = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !d.allFinite()) return out;
    double alpha = 1.0;
    bool accepted = false;
    while (alpha >= opts.min_damping) {
      SpacetimeField trial = x;
      for (std::size_t n = 1; n <= m; ++n)
        for (std::size_t j = 0; j < nth; ++j) trial(j, n) += alpha * d[static_cast<Eigen::Index>((n - 1) * nth + j)];
      PathGeometry geo(grid, trial);
      if (path_admissibility(geo, eps, false, closed_cone).admissible) {
        auto rt = interior_residual(trial);
        const double rtn = rt.interior_max_abs();
        if (std::isfinite(rtn) && rtn <= (1.0 - 1e-4 * alpha) * rn) {
          x = std::move(trial);
          r = std::move(rt);
          rn = rtn;
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    out.min_damping = std::min(out.min_damping, alpha);
    out.iterations = it + 1;
    history.push_back(rn);
    if (!accepted) return out;
  }
  out.residual = rn;
  out.converged = rn < opts.newton_tol;
  if (out.converged) u = std::move(x);
  return out;
}

}  // namespace detail

/// Smallest half-integer lambda in [0.5, 64] for which the convexified path
/// w = t u1 + (1 - t) u0 + lambda t (t - 1) has E_w in Gamma_2+ and w_tt > 0.
inline double select_convexification(const RadialGrid& grid, const RadialField& u0, const RadialField& u1,
                                     std::size_t n_time, double eps) {
  for (int half = 1; half <= 128; ++half) {
    const double lambda = 0.5 * half;
    if (path_admissibility(grid, detail::convexified_path(u0, u1, n_time, lambda), eps).admissible) return lambda;
  }
  throw SolverError("no convexification constant in [0.5, 64] makes the initial path admissible");
}

/// Builds an eps-geodesic from u0 to u1 by continuation in s.
///
/// Starting from the convexified path w (which solves Phi_eps(u) = f exactly
/// for f = Phi_eps(w)), s is lowered along the schedule, each stage solved by
/// damped Newton warm-started from the previous one. A stage that fails is
/// retried through intermediate s values before giving up.
inline GeodesicSolution solve(const RadialGrid& grid, const GeodesicProblem& problem,
                              const ContinuationSchedule& schedule = {}) {
  if (problem.u0.size() != grid.size() || problem.u1.size() != grid.size())
    throw ShapeMismatchError("solve: endpoint size differs from grid");
  if (!(problem.epsilon >= 0.0)) throw std::invalid_argument("solve: epsilon must be nonnegative");
  if (problem.n_time < 4) throw std::invalid_argument("solve: need at least 4 time nodes");
  for (const auto* end : {&problem.u0, &problem.u1}) {
    const auto st = schouten(grid, *end);
    require_admissible(st, "solve: endpoint");
  }
  const double eps = problem.epsilon;

  GeodesicSolution sol;
  sol.epsilon = eps;
  sol.lambda_convex = problem.lambda_convex > 0.0
                          ? problem.lambda_convex
                          : select_convexification(grid, problem.u0, problem.u1, problem.n_time, eps);
  SpacetimeField u = detail::convexified_path(problem.u0, problem.u1, problem.n_time, sol.lambda_convex);
  const SpacetimeField phi_w = geodesic_operator(grid, u, eps);

  // Targets: first a homotopy from Phi_eps(w) to the prescribed source (when
  // one is given), then s f for s running down the schedule.
  std::vector<double> svals;
  for (double s : schedule.s_values)
    if (s >= problem.s && s <= 1.0) svals.push_back(s);
  if (svals.empty() || svals.front() != 1.0) svals.insert(svals.begin(), 1.0);
  if (svals.back() != problem.s) svals.push_back(problem.s);

  auto run_stage = [&](auto&& make_target, double p_prev, double p_next, bool count_in_trace) {
    // Tries p_next directly, subdividing on failure.
    std::vector<double> pending{p_next};
    double p_cur = p_prev;
    int refinements = 0;
    while (!pending.empty()) {
      const double p = pending.back();
      const SpacetimeField target = make_target(p);
      const bool closed = target.interior_max_abs() == 0.0;
      std::vector<double> hist;
      const auto res = detail::newton_solve(grid, u, eps, target, closed, schedule, hist);
      sol.residual_history.insert(sol.residual_history.end(), hist.begin(), hist.end());
      if (res.converged) {
        p_cur = p;
        pending.pop_back();
        if (count_in_trace) sol.trace.push_back({p, res.iterations, res.residual, res.min_damping});
        if (count_in_trace && pending.empty() && schedule.observer) schedule.observer(p, u);
        sol.residual_norm = res.residual;
        continue;
      }
      if (++refinements > schedule.max_bisections) {
        if (res.iterations >= schedule.max_newton)
          throw NewtonDivergenceError(p, std::move(hist));
        throw ContinuationStallError(p_cur, "Newton failed between s = " + std::to_string(p_cur) +
                                                 " and s = " + std::to_string(p));
      }
      pending.push_back(0.5 * (p_cur + p));
    }
  };

  SpacetimeField f = phi_w;
  if (problem.source) {
    if (!problem.source->same_shape(u)) throw ShapeMismatchError("solve: source shape differs from path");
    f = *problem.source;
    // Homotopy parameter tau in [0, 1]: target (1 - tau) Phi_eps(w) + tau f.
    auto blend = [&](double tau) {
      SpacetimeField t = phi_w;
      t *= (1.0 - tau);
      SpacetimeField g = f;
      g *= tau;
      return t + g;
    };
    run_stage(blend, 0.0, 1.0, false);
  }
  sol.source = f;
  sol.trace.push_back({1.0, 0, residual(grid, u, eps, f, 1.0).interior_max_abs(), 1.0});
  if (schedule.observer) schedule.observer(1.0, u);
  for (std::size_t i = 1; i < svals.size(); ++i) {
    auto scaled = [&](double s) {
      SpacetimeField t = f;
      t *= s;
      return t;
    };
    run_stage(scaled, svals[i - 1], svals[i], true);
  }

  sol.s = problem.s;
  sol.u = std::move(u);
  sol.residual_norm = residual(grid, sol.u, eps, f, problem.s).interior_max_abs();
  PathGeometry geo(grid, sol.u);
  sol.admissible = path_admissibility(geo, eps, false, problem.s == 0.0).admissible;
  if (!sol.admissible) throw AdmissibilityLossError("solve: returned path left the admissible cone");
  sol.monitors = geodesic_monitors(grid, sol.u, eps, problem.s);
  return sol;
}

// ---------------------------------------------------------------------------
// Metric quantities along paths

/// Speeds |u_t|_u = <u_t, u_t>_u^{1/2} at every time node.
inline std::vector<double> path_speeds(const RadialGrid& grid, const SpacetimeField& u) {
  const auto ut = time_derivative(u);
  std::vector<double> speeds;
  for (std::size_t n = 0; n < u.n_time(); ++n) {
    const auto v = ut.slice(n);
    speeds.push_back(std::sqrt(inner_product(grid, u.slice(n), v, v)));
  }
  return speeds;
}

/// Length int_0^1 <u_t, u_t>_u^{1/2} dt (trapezoidal rule in t).
inline double length(const RadialGrid& grid, const SpacetimeField& u) {
  const auto sp = path_speeds(grid, u);
  double acc = 0.0;
  for (std::size_t n = 0; n + 1 < sp.size(); ++n) acc += 0.5 * (sp[n] + sp[n + 1]);
  return acc * u.dt();
}

/// Lower bound on the length of any geodesic from u0 to u1, in the
/// normalized metric:
///   (1/sigma) max{ int_{u1 > u0} (u1 - u0) sigma_2(A_{u1}) dV, int_{u0 > u1} (u0 - u1) sigma_2(A_{u0}) dV }.
inline double distance_lower_bound(const RadialGrid& grid, const RadialField& u0, const RadialField& u1) {
  const auto s0 = schouten(grid, u0);
  const auto s1 = schouten(grid, u1);
  RadialField up(grid.size()), down(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double d = u1[j] - u0[j];
    up[j] = d > 0.0 ? d * s1.sigma2[j] : 0.0;
    down[j] = d < 0.0 ? -d * s0.sigma2[j] : 0.0;
  }
  const double sigma = grid.integrate_volume(s0.sigma2);
  return std::max(grid.integrate_volume(up), grid.integrate_volume(down)) / sigma;
}

/// min over nodes of (u - v); the comparison principle predicts >= 0 when u
/// solves with the smaller source.
inline double compare_check(const SpacetimeField& u, const SpacetimeField& v) {
  if (!u.same_shape(v)) throw ShapeMismatchError("compare_check: solutions live on different grids");
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < u.data().size(); ++i) m = std::min(m, u.data()[i] - v.data()[i]);
  return m;
}

inline double compare_check(const GeodesicSolution& u, const GeodesicSolution& v) {
  if (u.epsilon != v.epsilon) throw ShapeMismatchError("compare_check: different regularizations");
  return compare_check(u.u, v.u);
}

/// Sup-norm distance between two paths.
inline double c0_distance(const SpacetimeField& u, const SpacetimeField& v) {
  if (!u.same_shape(v)) throw ShapeMismatchError("c0_distance: shapes differ");
  double m = 0.0;
  for (std::size_t i = 0; i < u.data().size(); ++i) m = std::max(m, std::abs(u.data()[i] - v.data()[i]));
  return m;
}

}  // namespace sigma2

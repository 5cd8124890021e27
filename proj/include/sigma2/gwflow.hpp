#pragma once

// Volume-normalized sigma_2 flow on the radial model of S^4,
//   u_t = log sigma_2(g_u^{-1} A_u) - const,
// integrated in unnormalized form with Heun's method, followed by the constant
// shift that restores the volume. Since the flow is invariant under adding
// time-dependent constants to u, this matches the normalized flow up to a
// constant at every accepted step.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "sigma2/conformal.hpp"
#include "sigma2/errors.hpp"
#include "sigma2/sphere.hpp"

namespace sigma2 {

struct FlowMonitors {
  double sup_u = 0.0;
  double sup_grad = 0.0;
  double t_sup_lap = 0.0;         // t sup |Lap u|
  double t_sup_log_sigma2 = 0.0;  // t sup |log sigma_2(g_u^{-1} A_u)|
  double min_sigma2 = 0.0;        // min sigma_2(g_u^{-1} A_u)
  double sup_lap = 0.0;
  double deviation = 0.0;         // sup |sigma_2 - mean| / mean, mean w.r.t. dV_u
};

struct FlowState {
  RadialField u;
  double t = 0.0;
  double dt_last = 0.0;
  double F_value = 0.0;
  double volume = 0.0;
  FlowMonitors monitors;
};

struct FlowOptions {
  double c_cfl = 0.3;
  double energy_slack = 1e-10;  // accepted steps may raise F by at most this
  double dt_min = 1e-12;
  std::size_t max_steps = 2'000'000;
  std::size_t snapshot_every = 0;  // 0 keeps about 20 snapshots
};

inline FlowMonitors flow_monitors(const RadialGrid& grid, const ConformalState& s, double t) {
  FlowMonitors m;
  const auto lap = grid.laplacian(s.u);
  m.sup_u = s.u.max_abs();
  m.sup_grad = s.grad.max_abs();
  m.sup_lap = lap.max_abs();
  m.t_sup_lap = t * m.sup_lap;
  double sup_log = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) sup_log = std::max(sup_log, std::abs(std::log(s.sigma2_u[j])));
  m.t_sup_log_sigma2 = t * sup_log;
  m.min_sigma2 = s.sigma2_u.min();
  const double mean = grid.integrate_volume(s.sigma2) / grid.integrate_volume(s.vol_density);
  double dev = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) dev = std::max(dev, std::abs(s.sigma2_u[j] - mean));
  m.deviation = dev / mean;
  return m;
}

/// sup |sigma_2(g_u^{-1} A_u) - sigma_bar| / sigma_bar, sigma_bar the dV_u average.
inline double criticality_deviation(const RadialGrid& grid, const RadialField& u) {
  const auto s = schouten(grid, u);
  require_admissible(s, "criticality_deviation");
  return flow_monitors(grid, s, 0.0).deviation;
}

inline FlowState make_flow_state(const RadialGrid& grid, const RadialField& u, double t = 0.0) {
  const auto s = schouten(grid, u);
  require_admissible(s, "flow state");
  FlowState st;
  st.u = u;
  st.t = t;
  st.F_value = f_energy(grid, u);
  st.volume = grid.integrate_volume(s.vol_density);
  st.monitors = flow_monitors(grid, s, t);
  return st;
}

/// log sigma_2(g_u^{-1} A_u) minus its dV_u average.
inline RadialField flow_rhs(const RadialGrid& grid, const RadialField& u) {
  const auto s = schouten(grid, u);
  require_admissible(s, "flow_rhs");
  const auto log_s = s.sigma2_u.map([](double x) { return std::log(x); });
  const double mean = grid.integrate_volume(log_s * s.vol_density) / grid.integrate_volume(s.vol_density);
  return log_s - mean;
}

/// Explicit stability cap c_cfl h^2 min sigma_2 / max T_1, background indices.
inline double flow_dt_cap(const RadialGrid& grid, const ConformalState& s, double c_cfl) {
  double t1_max = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) t1_max = std::max({t1_max, s.newton_rad(j), s.newton_tan(j)});
  const double h = grid.spacing();
  return c_cfl * h * h * s.sigma2.min() / t1_max;
}

namespace detail {

/// One Heun step with volume fix, or nothing if the trial leaves the cone.
inline bool heun_trial(const RadialGrid& grid, const RadialField& u, double dt, double volume, RadialField& out) {
  auto unnormalized = [&](const RadialField& v, bool& ok) {
    const auto s = schouten(grid, v);
    ok = s.admissibility().admissible;
    return ok ? s.sigma2_u.map([](double x) { return std::log(x); }) : RadialField();
  };
  bool ok = false;
  const auto k1 = unnormalized(u, ok);
  if (!ok) return false;
  const auto mid = u + dt * k1;
  const auto k2 = unnormalized(mid, ok);
  if (!ok) return false;
  out = u + (0.5 * dt) * (k1 + k2);
  out += 0.25 * std::log(conformal_volume(grid, out) / volume);
  return out.all_finite();
}

}  // namespace detail

/// Advances by at most dt, halving on rejection. Throws StepUnderflowError if
/// no step of size >= dt_min is acceptable.
inline FlowState step(const RadialGrid& grid, const FlowState& state, double dt, const FlowOptions& opts = {}) {
  for (double h = dt; h >= opts.dt_min; h *= 0.5) {
    RadialField next;
    if (!detail::heun_trial(grid, state.u, h, state.volume, next)) continue;
    const auto s = schouten(grid, next);
    if (!s.admissibility().admissible) continue;
    const double f = f_energy(grid, next);
    if (!(f <= state.F_value + opts.energy_slack)) continue;
    FlowState out;
    out.u = std::move(next);
    out.t = state.t + h;
    out.dt_last = h;
    out.F_value = f;
    out.volume = state.volume;
    out.monitors = flow_monitors(grid, s, out.t);
    return out;
  }
  throw StepUnderflowError(state.t, dt);
}

struct FlowSnapshot {
  double t;
  RadialField u;
};

struct FlowTrajectory {
  std::vector<double> t, F, min_sigma2, sup_lap, t_sup_lap, t_sup_log_sigma2, deviation, volume;
  std::vector<FlowSnapshot> snapshots;
  FlowState final_state;
  bool converged = false;
  bool mollified = false;
  std::size_t steps = 0;
  std::size_t rejected_halvings = 0;
  double max_t_sup_lap = 0.0;
  double max_t_sup_log_sigma2 = 0.0;
  double max_energy_increase = 0.0;  // largest F(t_{k+1}) - F(t_k), <= slack
};

/// One pass of [1/4, 1/2, 1/4] with even reflection at the poles.
inline RadialField mollify(const RadialGrid& grid, const RadialField& u) {
  RadialField out(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) {
    const auto jj = static_cast<std::ptrdiff_t>(j);
    out[j] = 0.25 * u[grid.reflect(jj - 1)] + 0.5 * u[j] + 0.25 * u[grid.reflect(jj + 1)];
  }
  return out;
}

/// Integrates until t_final or until the criticality deviation drops below
/// stop_tol.
inline FlowTrajectory run(const RadialGrid& grid, const RadialField& u0, double t_final, double stop_tol,
                          const FlowOptions& opts = {}) {
  if (!(t_final >= 0.0)) throw std::invalid_argument("flow run: t_final must be nonnegative");
  if (!(stop_tol > 0.0)) throw std::invalid_argument("flow run: stop_tol must be positive");
  FlowTrajectory tr;
  RadialField start = u0;
  grid.check(start);
  if (!(schouten(grid, start).sigma2.min() >= 1e-8)) {
    start = mollify(grid, start);
    tr.mollified = true;
  }
  FlowState st = make_flow_state(grid, start);
  auto record = [&](const FlowState& s) {
    tr.t.push_back(s.t);
    tr.F.push_back(s.F_value);
    tr.min_sigma2.push_back(s.monitors.min_sigma2);
    tr.sup_lap.push_back(s.monitors.sup_lap);
    tr.t_sup_lap.push_back(s.monitors.t_sup_lap);
    tr.t_sup_log_sigma2.push_back(s.monitors.t_sup_log_sigma2);
    tr.deviation.push_back(s.monitors.deviation);
    tr.volume.push_back(s.volume);
    tr.max_t_sup_lap = std::max(tr.max_t_sup_lap, s.monitors.t_sup_lap);
    tr.max_t_sup_log_sigma2 = std::max(tr.max_t_sup_log_sigma2, s.monitors.t_sup_log_sigma2);
  };
  record(st);
  tr.snapshots.push_back({st.t, st.u});
  const double h = grid.spacing();
  const std::size_t every =
      opts.snapshot_every > 0
          ? opts.snapshot_every
          : std::max<std::size_t>(1, static_cast<std::size_t>(t_final / (opts.c_cfl * h * h) / 20.0));
  while (st.monitors.deviation >= stop_tol && st.t < t_final) {
    if (tr.steps >= opts.max_steps) break;
    const auto s = schouten(grid, st.u);
    const double dt = std::min(flow_dt_cap(grid, s, opts.c_cfl), t_final - st.t);
    FlowState next = step(grid, st, dt, opts);
    if (next.dt_last < dt) tr.rejected_halvings += static_cast<std::size_t>(std::lround(std::log2(dt / next.dt_last)));
    tr.max_energy_increase = std::max(tr.max_energy_increase, next.F_value - st.F_value);
    st = std::move(next);
    ++tr.steps;
    record(st);
    if (tr.steps % every == 0) tr.snapshots.push_back({st.t, st.u});
  }
  tr.converged = st.monitors.deviation < stop_tol;
  if (tr.snapshots.back().t != st.t) tr.snapshots.push_back({st.t, st.u});
  tr.final_state = std::move(st);
  return tr;
}

}  // namespace sigma2

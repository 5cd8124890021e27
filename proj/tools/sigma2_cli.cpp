// sigma2: command-line driver for the sigma_2 library.
//
// Exit codes: 0 success, 1 a checked property failed, 2 usage error,
// 3 solver or flow failure.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "sigma2/algebra_suite.hpp"
#include "sigma2/conformal.hpp"
#include "sigma2/errors.hpp"
#include "sigma2/geodesic.hpp"
#include "sigma2/gwflow.hpp"
#include "sigma2/io.hpp"
#include "sigma2/pipeline.hpp"
#include "sigma2/random.hpp"
#include "sigma2/sampling.hpp"

namespace {

using namespace sigma2;
using io::json;
namespace fs = std::filesystem;

constexpr int exit_ok = 0;
constexpr int exit_check_failed = 1;
constexpr int exit_usage = 2;
constexpr int exit_solver = 3;

struct RunConfig {
  std::size_t n_theta = 128;
  std::size_t n_time = 128;
  double epsilon = 1e-3;
  double s_min = 1e-3;
  double lambda = 0.3;
  double solver_tol = 1e-10;
  double stop_tol = 1e-4;
  double t_final = 20.0;
  double t_smooth = 1.0;
  std::uint64_t seed = 20240611;
  std::size_t samples = 10'000;
  bool break_cone = false;
  bool random_field = false;
  std::string output_dir = "sigma2-out";
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void validate(const RunConfig& c) {
  if (c.n_theta < 16 || c.n_time < 16) throw UsageError("grid sizes must be >= 16");
  if (!(c.epsilon >= 0.0)) throw UsageError("epsilon must be >= 0");
  if (!(c.s_min > 0.0 && c.solver_tol > 0.0 && c.stop_tol > 0.0 && c.t_final > 0.0 && c.t_smooth > 0.0))
    throw UsageError("tolerances and times must be > 0");
}

json config_json(const RunConfig& c) {
  return {{"n_theta", c.n_theta}, {"n_time", c.n_time},       {"epsilon", c.epsilon},
          {"s_min", c.s_min},     {"lambda", c.lambda},       {"solver_tol", c.solver_tol},
          {"stop_tol", c.stop_tol}, {"t_final", c.t_final},   {"seed", c.seed}};
}

void finish(const RunConfig& c, const std::string& name, json body) {
  auto report = io::report_header(name);
  report["config"] = config_json(c);
  for (auto& [k, v] : body.items()) report[k] = v;
  io::write_json(fs::path(c.output_dir) / (name + ".json"), report);
}

int cmd_verify_algebra(const RunConfig& c) {
  AlgebraOptions opt{c.seed, c.samples, c.break_cone};
  AlgebraReport rep;
  try {
    rep = verify_algebra(opt);
  } catch (const ConeMembershipError& e) {
    std::cerr << "verify-algebra: in_cone precondition violated: " << e.what() << '\n';
    finish(c, "verify-algebra", {{"passed", false}, {"error", std::string("in_cone precondition: ") + e.what()}});
    return exit_check_failed;
  }
  if (c.samples == 0) std::cerr << "warning: no samples requested; only the fixed equality cases ran\n";
  for (const auto& chk : rep.checks)
    std::cout << (chk.passed() ? "ok    " : "FAIL  ") << chk.name << "  max violation " << chk.max_violation << '\n';
  finish(c, "verify-algebra", io::to_json(rep));
  if (const auto* bad = rep.first_failure()) {
    std::cerr << "verify-algebra: " << bad->name << " failed\n";
    return exit_check_failed;
  }
  return exit_ok;
}

// Discretization checks hold to O(h^4); tol512 is the bound at 512 nodes.
double grid_tolerance(std::size_t n_theta, double tol512) {
  const double r = 512.0 / static_cast<double>(n_theta);
  return tol512 * std::max(1.0, r * r * r * r);
}

int cmd_eval_f(const RunConfig& c) {
  const RadialGrid grid(c.n_theta);
  SplitMix64 rng(c.seed);
  const auto u = c.random_field ? sampling::admissible_radial(grid, rng) : mobius_factor(grid, c.lambda);
  const auto v = sampling::admissible_radial(grid, rng);
  const double h = 1e-4;
  const double fd = (f_energy(grid, u + h * v) - f_energy(grid, u - h * v)) / (2.0 * h);
  const double an = f_variation(grid, u, v);
  // At a critical point both sides vanish; normalize by the size of the terms
  // that cancel instead.
  const auto st = schouten(grid, u);
  const double size = f_variation_scale * grid.integrate_volume(v.map([](double x) { return std::abs(x); }) * st.sigma2);
  const double rel = std::abs(fd - an) / std::max(std::abs(fd), size);
  const double dev = criticality_deviation(grid, u);
  const double f = f_energy(grid, u);
  std::cout << "F = " << f << "\ntotal sigma = " << total_sigma(grid, u) << "\nvolume = " << conformal_volume(grid, u)
            << "\ncriticality deviation = " << dev << "\nvariation check relative error = " << rel << '\n';
  io::write_field_csv(fs::path(c.output_dir) / "eval-f_u.csv", grid, u);
  finish(c, "eval-f",
         {{"field", c.random_field ? "random" : "mobius"},
          {"F", f},
          {"total_sigma", total_sigma(grid, u)},
          {"volume", conformal_volume(grid, u)},
          {"criticality_deviation", dev},
          {"variation_fd", fd},
          {"variation", an},
          {"variation_relative_error", rel}});
  return rel < grid_tolerance(c.n_theta, 1e-6) ? exit_ok : exit_check_failed;
}

int cmd_geodesic(const RunConfig& c) {
  const RadialGrid grid(c.n_theta);
  GeodesicProblem prob{grid.constant(0.0), mobius_factor(grid, c.lambda), c.epsilon, c.s_min, c.n_time, {}, 0.0};
  ContinuationSchedule sched;
  sched.newton_tol = c.solver_tol;
  const auto sol = solve(grid, prob, sched);
  const auto exact = exact_sphere_path(grid, c.lambda, c.n_time);
  const double dist = c0_distance(sol.u, exact);
  std::cout << "residual " << sol.residual_norm << "\nC0 distance to the exact path " << dist << "\nmomentum drift "
            << sol.monitors.momentum_drift << "\nenergy drift " << sol.monitors.energy_drift << "\nmin d2F/dt2 "
            << sol.monitors.min_d2f << '\n';
  io::write_spacetime_csv(fs::path(c.output_dir) / "geodesic_u.csv", grid, sol.u);
  auto body = io::to_json(sol);
  body["c0_distance_exact"] = dist;
  body["length"] = length(grid, sol.u);
  body["distance_lower_bound"] = distance_lower_bound(grid, prob.u0, prob.u1);
  finish(c, "geodesic", {{"solution", body}});
  return exit_ok;
}

int cmd_flow(const RunConfig& c) {
  const RadialGrid grid(c.n_theta);
  SplitMix64 rng(c.seed);
  const auto u0 = sampling::admissible_radial(grid, rng);
  const auto tr = run(grid, u0, c.t_final, c.stop_tol);
  const fs::path out(c.output_dir);
  io::write_trajectory_csv(out / "flow_trajectory.csv", tr);
  io::write_snapshots_csv(out / "flow_snapshots.csv", grid, tr);
  double vol_drift = 0.0;
  for (double v : tr.volume) vol_drift = std::max(vol_drift, std::abs(v - tr.volume.front()));
  auto body = io::to_json(tr);
  body["volume_drift"] = vol_drift;
  finish(c, "flow", {{"trajectory", body}});
  std::cout << "steps " << tr.steps << "\nt " << tr.final_state.t << "\nF " << tr.F.front() << " -> "
            << tr.final_state.F_value << "\ndeviation " << tr.final_state.monitors.deviation << "\nconverged "
            << (tr.converged ? "yes" : "no") << '\n';
  if (!tr.converged) std::cerr << "warning: stop tolerance not reached by t_final\n";
  return tr.max_energy_increase <= FlowOptions{}.energy_slack && vol_drift < 1e-10 ? exit_ok : exit_check_failed;
}

int cmd_andrews(const RunConfig& c) {
  const RadialGrid grid(c.n_theta);
  const auto u = grid.constant(0.0);
  const double linear = andrews_gap(grid, u, grid.xi_field());
  const double quadratic = andrews_gap(grid, u, grid.from_xi([](double x) { return x * x; }));
  std::cout << "gap(xi) = " << linear << "\ngap(xi^2) = " << quadratic << '\n';
  finish(c, "andrews", {{"gap_xi", linear}, {"gap_xi2", quadratic}});
  return std::abs(linear) < grid_tolerance(c.n_theta, 1e-8) && quadratic > 0.01 ? exit_ok : exit_check_failed;
}

int cmd_pipeline(const RunConfig& c) {
  PipelineConfig pc;
  pc.n_theta = c.n_theta;
  pc.n_time = c.n_time;
  pc.lambda = c.lambda;
  pc.epsilon = c.epsilon;
  pc.s = c.s_min;
  pc.t_smooth = c.t_smooth;
  const auto rep = run_pipeline(pc);
  if (rep.degraded)
    std::cerr << "warning: n_theta = " << c.n_theta << " is below " << pipeline_tolerance_table[0].min_n_theta
              << "; using degraded tolerances max|F| < " << rep.tolerance.max_abs_f << ", deviation < "
              << rep.tolerance.max_deviation << '\n';
  std::cout << "max|F| raw " << rep.max_abs_raw_f << ", smoothed " << rep.max_abs_smoothed_f
            << "\nmax deviation smoothed " << rep.max_smoothed_deviation << "\nAndrews gap on initial tangent "
            << rep.andrews_gap << '\n';
  finish(c, "pipeline", {{"report", io::to_json(rep)}});
  return rep.passed ? exit_ok : exit_check_failed;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  if (const char* env = std::getenv("SIGMA2_OUTPUT_DIR")) cfg.output_dir = env;

  CLI::App app{"sigma_2 geometry on the round four-sphere"};
  app.set_config("--config", "", "INI-style config file");
  app.require_subcommand(1);
  app.fallthrough();
  bool dump_config = false;
  app.add_flag("--dump-config", dump_config, "Print the effective configuration and exit");
  app.add_option("--output-dir", cfg.output_dir, "Output directory (default $SIGMA2_OUTPUT_DIR)");
  app.add_option("--seed", cfg.seed, "64-bit random seed");
  app.add_option("--n-theta", cfg.n_theta, "Polar grid nodes");
  app.add_option("--n-time", cfg.n_time, "Time nodes of geodesic paths");
  app.add_option("--epsilon", cfg.epsilon, "Regularization eps");
  app.add_option("--s-min", cfg.s_min, "Final continuation weight s");
  app.add_option("--lambda", cfg.lambda, "Dilation parameter of the far endpoint");
  app.add_option("--solver-tol", cfg.solver_tol, "Newton residual tolerance");
  app.add_option("--stop-tol", cfg.stop_tol, "Flow stop tolerance");
  app.add_option("--t-final", cfg.t_final, "Flow end time");
  app.add_option("--t-smooth", cfg.t_smooth, "Smoothing time per pipeline slice");

  auto* algebra = app.add_subcommand("verify-algebra", "Matrix lemma property sweeps");
  algebra->add_option("--samples", cfg.samples, "Random instances per lemma");
  algebra->add_flag("--break-cone", cfg.break_cone, "Inject a matrix outside the cone");
  auto* evalf = app.add_subcommand("eval-f", "Energy and first-variation audit");
  evalf->add_flag("--random", cfg.random_field, "Use a seeded random admissible factor");
  auto* geodesic = app.add_subcommand("geodesic", "Regularized geodesics");
  geodesic->require_subcommand(1);
  auto* geodesic_solve = geodesic->add_subcommand("solve", "Solve between 0 and the dilated round factor");
  auto* flow = app.add_subcommand("flow", "Volume-normalized flow");
  flow->require_subcommand(1);
  auto* flow_run = flow->add_subcommand("run", "Flow seeded random admissible data");
  auto* andrews = app.add_subcommand("andrews", "Andrews gap diagnostics");
  auto* pipeline = app.add_subcommand("pipeline", "Path of critical points experiment");

  try {
    app.parse(argc, argv);
    validate(cfg);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_usage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return exit_usage;
  }
  if (dump_config) {
    std::cout << app.config_to_str(true, false);
    return exit_ok;
  }

  try {
    io::OutputLock lock(cfg.output_dir);
    if (algebra->parsed()) return cmd_verify_algebra(cfg);
    if (evalf->parsed()) return cmd_eval_f(cfg);
    if (geodesic_solve->parsed()) return cmd_geodesic(cfg);
    if (flow_run->parsed()) return cmd_flow(cfg);
    if (andrews->parsed()) return cmd_andrews(cfg);
    if (pipeline->parsed()) return cmd_pipeline(cfg);
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return exit_solver;
  } catch (const StepUnderflowError& e) {
    std::cerr << "flow failure: " << e.what() << '\n';
    return exit_solver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_solver;
  }
  return exit_usage;
}

#pragma once

// CSV field dumps, JSON reports and the output-directory lock.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <string>
#include <system_error>

#include <fcntl.h>
#include <unistd.h>

#include "json.hpp"

#include "sigma2/algebra_suite.hpp"
#include "sigma2/errors.hpp"
#include "sigma2/geodesic.hpp"
#include "sigma2/gwflow.hpp"
#include "sigma2/pipeline.hpp"
#include "sigma2/sphere.hpp"

namespace sigma2::io {

using json = nlohmann::ordered_json;

inline constexpr int report_schema_version = 1;

namespace detail {

inline std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

}  // namespace detail

inline void write_field_csv(const std::filesystem::path& path, const RadialGrid& grid, const RadialField& f) {
  auto out = detail::open_csv(path);
  out << "theta,value\n";
  for (std::size_t j = 0; j < grid.size(); ++j) out << grid.theta(j) << ',' << f[j] << '\n';
}

inline void write_spacetime_csv(const std::filesystem::path& path, const RadialGrid& grid, const SpacetimeField& u) {
  auto out = detail::open_csv(path);
  out << "theta,t,u\n";
  for (std::size_t n = 0; n < u.n_time(); ++n)
    for (std::size_t j = 0; j < u.n_theta(); ++j) out << grid.theta(j) << ',' << u.time(n) << ',' << u(j, n) << '\n';
}

inline void write_trajectory_csv(const std::filesystem::path& path, const FlowTrajectory& tr) {
  auto out = detail::open_csv(path);
  out << "t,F,min_sigma2,sup_lap_u,t_sup_lap_u,t_sup_log_sigma2,deviation,volume\n";
  for (std::size_t i = 0; i < tr.t.size(); ++i)
    out << tr.t[i] << ',' << tr.F[i] << ',' << tr.min_sigma2[i] << ',' << tr.sup_lap[i] << ',' << tr.t_sup_lap[i]
        << ',' << tr.t_sup_log_sigma2[i] << ',' << tr.deviation[i] << ',' << tr.volume[i] << '\n';
}

inline void write_snapshots_csv(const std::filesystem::path& path, const RadialGrid& grid, const FlowTrajectory& tr) {
  auto out = detail::open_csv(path);
  out << "t,theta,u\n";
  for (const auto& s : tr.snapshots)
    for (std::size_t j = 0; j < grid.size(); ++j) out << s.t << ',' << grid.theta(j) << ',' << s.u[j] << '\n';
}

inline void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

/// Report skeleton shared by every command.
inline json report_header(const std::string& command) {
  json j;
  j["schema_version"] = report_schema_version;
  j["command"] = command;
  return j;
}

inline json to_json(const AlgebraReport& r) {
  json j;
  j["seed"] = r.seed;
  j["samples"] = r.samples;
  j["passed"] = r.passed();
  json checks = json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"name", c.name},
                      {"kind", c.kind},
                      {"samples", c.samples},
                      {"max_violation", c.max_violation},
                      {"tolerance", c.tolerance},
                      {"passed", c.passed()}});
  j["checks"] = std::move(checks);
  return j;
}

inline json to_json(const GeodesicMonitors& m) {
  return {{"sup_u", m.sup_u},
          {"sup_grad_u", m.sup_grad_u},
          {"sup_ut", m.sup_ut},
          {"eps_sup_utt", m.eps_sup_utt},
          {"eps_sup_lap_u", m.eps_sup_lap},
          {"min_utt", m.min_utt},
          {"min_sigma2_E", m.min_sigma2_e},
          {"momentum_drift", m.momentum_drift},
          {"energy_drift", m.energy_drift},
          {"min_d2F", m.min_d2f},
          {"convexity_constant", m.convexity_constant},
          {"F", m.f_values}};
}

inline json to_json(const GeodesicSolution& s) {
  json trace = json::array();
  for (const auto& c : s.trace)
    trace.push_back({{"s", c.s}, {"newton_iterations", c.newton_iterations}, {"residual", c.residual}});
  return {{"epsilon", s.epsilon},
          {"s", s.s},
          {"lambda_convex", s.lambda_convex},
          {"residual", s.residual_norm},
          {"admissible", s.admissible},
          {"continuation", std::move(trace)},
          {"monitors", to_json(s.monitors)}};
}

inline json to_json(const FlowTrajectory& t) {
  const auto& f = t.final_state;
  return {{"converged", t.converged},
          {"mollified", t.mollified},
          {"steps", t.steps},
          {"rejected_halvings", t.rejected_halvings},
          {"t_final", f.t},
          {"F_initial", t.F.front()},
          {"F_final", f.F_value},
          {"max_energy_increase", t.max_energy_increase},
          {"deviation_final", f.monitors.deviation},
          {"min_sigma2_final", f.monitors.min_sigma2},
          {"sup_u_final", f.monitors.sup_u},
          {"sup_grad_final", f.monitors.sup_grad},
          {"max_t_sup_lap_u", t.max_t_sup_lap},
          {"max_t_sup_log_sigma2", t.max_t_sup_log_sigma2},
          {"volume", f.volume}};
}

inline json to_json(const PipelineReport& r) {
  return {{"n_theta", r.config.n_theta},
          {"n_time", r.config.n_time},
          {"lambda", r.config.lambda},
          {"epsilon", r.config.epsilon},
          {"s", r.config.s},
          {"t_smooth", r.config.t_smooth},
          {"degraded_tolerance", r.degraded},
          {"tolerance", {{"max_abs_F", r.tolerance.max_abs_f}, {"max_deviation", r.tolerance.max_deviation}}},
          {"geodesic_residual", r.geodesic_residual},
          {"lambda_convex", r.lambda_convex},
          {"max_abs_F_raw", r.max_abs_raw_f},
          {"max_abs_F_smoothed", r.max_abs_smoothed_f},
          {"max_deviation_smoothed", r.max_smoothed_deviation},
          {"max_t_sup_lap_u", r.max_t_sup_lap},
          {"max_t_sup_log_sigma2", r.max_t_sup_log_sigma2},
          {"andrews_gap_initial_tangent", r.andrews_gap},
          {"andrews_gap_relative", r.andrews_gap_relative},
          {"passed", r.passed},
          {"t", r.times},
          {"F_raw", r.raw_f},
          {"F_smoothed", r.smoothed_f},
          {"deviation_raw", r.raw_deviation},
          {"deviation_smoothed", r.smoothed_deviation}};
}

/// Exclusive lock on an output directory, released on destruction.
class OutputLock {
 public:
  explicit OutputLock(const std::filesystem::path& dir) : path_(dir / ".sigma2.lock") {
    std::filesystem::create_directories(dir);
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0) throw Error("output directory is locked by another run: " + path_.string());
  }
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;
  ~OutputLock() {
    ::close(fd_);
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }

 private:
  std::filesystem::path path_;
  int fd_ = -1;
};

}  // namespace sigma2::io

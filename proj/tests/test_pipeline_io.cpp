#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "sigma2/io.hpp"
#include "sigma2/pipeline.hpp"

using namespace sigma2;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("sigma2_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST(Pipeline, ToleranceTableCoarsensWithTheGrid) {
  EXPECT_EQ(pipeline_tolerance(128).max_abs_f, 1e-4);
  EXPECT_EQ(pipeline_tolerance(64).max_abs_f, 1e-4);
  EXPECT_EQ(pipeline_tolerance(32).max_abs_f, 5e-4);
  EXPECT_EQ(pipeline_tolerance(16).max_abs_f, 5e-3);
  for (std::size_t n : {16, 32, 64, 128})
    EXPECT_GE(pipeline_tolerance(n).max_abs_f, pipeline_tolerance(2 * n).max_abs_f);
}

TEST(Pipeline, TrivialPathIsRoundEverywhere) {
  PipelineConfig cfg;
  cfg.n_theta = 16;
  cfg.n_time = 16;
  cfg.lambda = 0.0;
  const auto rep = run_pipeline(cfg);
  EXPECT_TRUE(rep.degraded);
  EXPECT_TRUE(rep.passed);
  EXPECT_EQ(rep.times.size(), 16u);
  EXPECT_EQ(rep.max_abs_raw_f, 0.0);
  EXPECT_EQ(rep.max_abs_smoothed_f, 0.0);
  EXPECT_EQ(rep.andrews_gap, 0.0);
}

TEST(Pipeline, CoarseMobiusPathPassesDegradedTolerance) {
  PipelineConfig cfg;
  cfg.n_theta = 16;
  cfg.n_time = 16;
  const auto rep = run_pipeline(cfg);
  EXPECT_TRUE(rep.degraded);
  EXPECT_TRUE(rep.passed);
  EXPECT_LT(rep.max_abs_smoothed_f, rep.tolerance.max_abs_f);
  EXPECT_LE(rep.max_abs_smoothed_f, rep.max_abs_raw_f + 1e-12);
  // The endpoints are not smoothed.
  EXPECT_EQ(rep.smoothing_time.front(), 0.0);
  EXPECT_EQ(rep.smoothing_time.back(), 0.0);
}

TEST(Pipeline, RejectsTinyGrids) {
  PipelineConfig cfg;
  cfg.n_theta = 8;
  EXPECT_THROW(run_pipeline(cfg), std::invalid_argument);
}

TEST(Io, JsonReportsCarrySchemaAndAreDeterministic) {
  const auto dir = scratch_dir("json");
  AlgebraOptions opt;
  opt.samples = 200;
  for (const char* name : {"a.json", "b.json"}) {
    auto j = io::report_header("verify-algebra");
    j["result"] = io::to_json(verify_algebra(opt));
    io::write_json(dir / name, j);
  }
  const auto text = slurp(dir / "a.json");
  EXPECT_EQ(text, slurp(dir / "b.json"));
  const auto j = io::json::parse(text);
  EXPECT_EQ(j["schema_version"], io::report_schema_version);
  EXPECT_EQ(j["command"], "verify-algebra");
  EXPECT_TRUE(j["result"]["passed"].get<bool>());
  fs::remove_all(dir);
}

TEST(Io, CsvHeaders) {
  const auto dir = scratch_dir("csv");
  RadialGrid g(16);
  io::write_field_csv(dir / "f.csv", g, g.xi_field());
  EXPECT_EQ(first_line(dir / "f.csv"), "theta,value");
  io::write_spacetime_csv(dir / "u.csv", g, SpacetimeField(16, 4));
  EXPECT_EQ(first_line(dir / "u.csv"), "theta,t,u");
  const auto tr = run(g, g.constant(0.0), 1.0, 1e-6);
  io::write_trajectory_csv(dir / "tr.csv", tr);
  EXPECT_EQ(first_line(dir / "tr.csv"), "t,F,min_sigma2,sup_lap_u,t_sup_lap_u,t_sup_log_sigma2,deviation,volume");
  io::write_snapshots_csv(dir / "s.csv", g, tr);
  EXPECT_EQ(first_line(dir / "s.csv"), "t,theta,u");
  EXPECT_THROW(io::write_field_csv(dir / "missing" / "f.csv", g, g.xi_field()), Error);
  fs::remove_all(dir);
}

TEST(Io, OutputLockIsExclusive) {
  const auto dir = scratch_dir("lock");
  {
    io::OutputLock lock(dir);
    EXPECT_TRUE(fs::exists(dir / ".sigma2.lock"));
    EXPECT_THROW(io::OutputLock second(dir), Error);
  }
  EXPECT_FALSE(fs::exists(dir / ".sigma2.lock"));
  EXPECT_NO_THROW(io::OutputLock again(dir));
  fs::remove_all(dir);
}

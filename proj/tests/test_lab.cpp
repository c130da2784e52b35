#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <numbers>
#include <string>

#include <gtest/gtest.h>

#include "ximarkov/ximarkov.hpp"

using namespace ximarkov;
using namespace ximarkov::lab;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("ximarkov_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

ExperimentConfig config(const std::string& json) { return parse_config(nlohmann::json::parse(json)); }

}  // namespace

TEST(Config, ParsesAndRejectsUnknownKeys) {
  const auto c = config(R"({"experiment": "dirac", "grid": 16, "seed": 5, "params": {"variances": [1, 0.1]}})");
  EXPECT_EQ(c.experiment, "dirac");
  EXPECT_EQ(c.grid, 16);
  EXPECT_EQ(c.seed, 5u);
  EXPECT_EQ(c.param("variances", std::vector<double>{}).size(), 2u);
  EXPECT_THROW(config(R"({"experiment": "dirac", "typo": 1})"), Error);
  EXPECT_THROW(config(R"({"grid": "many"})"), Error);
  EXPECT_THROW(config(R"({"params": {"variances": "x"}, "experiment": "dirac"})").param("variances", std::vector<double>{}),
               Error);
}

TEST(Config, DomainsCheckedBeforeRunning) {
  EXPECT_THROW(run_experiment(config(R"({"experiment": "dirac", "params": {"variances": [1, -0.5]}})")), Error);
  EXPECT_THROW(run_experiment(config(R"({"experiment": "dirac", "grid": 15})")), Error);
  EXPECT_THROW(run_experiment(config(R"({"experiment": "shuffle", "params": {"stripes": [0]}})")), Error);
  EXPECT_THROW(run_experiment(config(R"({"experiment": "additive-error", "params": {"sigmas": [-1]}})")), Error);
  EXPECT_THROW(run_experiment(config(R"({"experiment": "si-convergence", "params": {"family": "joe"}})")), Error);
  EXPECT_THROW(run_experiment(config(R"({"experiment": "nope"})")), Error);
}

TEST(Emit, CsvFormatAndEmptyResult) {
  Table t{"demo", {"p", "rho"}, {}};
  EXPECT_EQ(to_csv(t), "p,rho\n");
  t.add({1, 0.1});
  t.add({2, 1.0 / 3.0});
  EXPECT_EQ(to_csv(t), "p,rho\n1,0.1\n2,0.3333333333333333\n");
  Plot empty{"demo", "t", "x", "y", {}};
  EXPECT_FALSE(emit_svg(empty, scratch("empty") / "demo.svg"));
  EXPECT_FALSE(std::filesystem::exists(scratch("empty") / "demo.svg"));
}

TEST(Emit, SvgHasViewportSeriesAndDashes) {
  Plot p{"demo", "title", "rho_XY", "T", {}};
  p.series.push_back({"solid", LineStyle::Solid, {0, 1}, {0, 1}});
  p.series.push_back({"dotted", LineStyle::Dotted, {0, 1}, {1, 0}});
  const auto svg = to_svg(p);
  EXPECT_NE(svg.find("width=\"800\" height=\"600\""), std::string::npos);
  EXPECT_NE(svg.find("stroke-dasharray"), std::string::npos);
  EXPECT_NE(svg.find("rho_XY"), std::string::npos);
  std::size_t count = 0;
  for (auto pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1)) ++count;
  EXPECT_EQ(count, 2u);
}

TEST(Emit, IoErrorsCarryPath) {
  const auto dir = scratch("io");
  std::filesystem::create_directories(dir);
  const auto blocker = dir / "file";
  std::ofstream(blocker) << "x";
  try {
    write_file(blocker / "child.csv", "a");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Io);
    EXPECT_NE(std::string(e.what()).find("child.csv"), std::string::npos);
  }
}

TEST(Csv, ParsesNumericTables) {
  std::istringstream in("a, b,c\n1,2.5,-3e2\n\n4,5,6\n");
  const auto df = parse_csv(in);
  ASSERT_EQ(df.columns.size(), 3u);
  EXPECT_EQ(df.columns[1], "b");
  EXPECT_EQ(df.values.rows(), 2);
  EXPECT_EQ(df.values(0, 2), -300.0);
  EXPECT_EQ(df.select({"c", "a"})(1, 1), 4.0);
  std::istringstream bad("a,b\n1,x\n");
  EXPECT_THROW(parse_csv(bad), Error);
  std::istringstream ragged("a,b\n1\n");
  EXPECT_THROW(parse_csv(ragged), Error);
  EXPECT_THROW(df.select({"zzz"}), Error);
}

TEST(Experiments, EquicorrelatedGridHitsLandmarks) {
  for (int p : {1, 2, 4, 10, 100}) {
    const auto grid = equicorrelated_rho_grid(p, 201, "xi-uniform");
    EXPECT_NEAR(grid.front(), -1.0 / p, 1e-12);
    EXPECT_EQ(grid[100], 0.0);
    EXPECT_NEAR(grid.back(), 1.0, 1e-12);
    for (std::size_t k = 1; k < grid.size(); ++k) EXPECT_GT(grid[k], grid[k - 1]);
  }
}

TEST(Experiments, EquicorrelatedSkipsOutOfWindowValues) {
  const auto r = run_experiment(
      config(R"({"experiment": "equicorrelated", "params": {"dims": [2], "rho_values": [-0.9, -0.5, 0, 0.5, 1]}})"));
  EXPECT_EQ(r.tables[0].rows.size(), 4u);
  EXPECT_EQ(r.warnings.size(), 1u);
}

TEST(Experiments, DiracControlsAndColumns) {
  const auto r = run_experiment(config(R"({"experiment": "dirac", "grid": 16})"));
  EXPECT_TRUE(r.controls_passed());
  const auto* t = r.table("dirac");
  ASSERT_NE(t, nullptr);
  EXPECT_EQ(t->rows.size(), 5u);
  for (const auto& row : t->rows) {
    EXPECT_NEAR(row[1], 1.0, 1e-12);
    EXPECT_NEAR(row[3], 0.25, 1e-9);
    EXPECT_NEAR(row[4], 0.5, 1e-12);
  }
}

TEST(Experiments, SiConvergenceConstantSequenceHasZeroGaps) {
  const auto r = run_experiment(
      config(R"({"experiment": "si-convergence", "grid": 32, "params": {"sequence": [0.4, 0.4], "limit": 0.4}})"));
  for (const auto& row : r.tables[0].rows) {
    EXPECT_EQ(row[1], 0.0);
    EXPECT_EQ(row[2], 0.0);
    EXPECT_EQ(row[4], 0.0);
  }
}

TEST(Experiments, SiConvergenceFrankTowardsIndependence) {
  const auto r = run_experiment(config(
      R"({"experiment": "si-convergence", "grid": 32, "params": {"family": "frank", "limit": 0, "sequence": [4, 1, 0.25, 0.01], "d1_tol": 0.01, "xi_tol": 0.001, "sup_tol": 0.001}})"));
  EXPECT_TRUE(r.controls_passed());
  EXPECT_LT(r.tables[0].rows.back()[3], 1e-3);
}

TEST(Experiments, SiConvergenceAbortsOffSi) {
  const auto r = run_experiment(
      config(R"({"experiment": "si-convergence", "grid": 16, "params": {"sequence": [-0.5], "limit": -0.3}})"));
  EXPECT_FALSE(r.controls_passed());
  EXPECT_TRUE(r.tables[0].rows.empty());
}

TEST(Experiments, ShuffleSmallRunIsReproducible) {
  const auto c = config(R"({"experiment": "shuffle", "samples": 20000, "grid": 64, "seed": 3,
                            "params": {"stripes": [1, 4, 64], "product_grid": 16}})");
  const auto a = run_experiment(c), b = run_experiment(c);
  EXPECT_EQ(to_csv(a.tables[0]), to_csv(b.tables[0]));
  EXPECT_EQ(a.tables[0].rows.size(), 3u);
  EXPECT_TRUE(a.controls_passed());
}

TEST(Experiments, AdditiveErrorSmallRun) {
  const auto r = run_experiment(config(R"({"experiment": "additive-error", "samples": 5000,
                                           "params": {"sigmas": [0, 0.5, 1], "perturbation_samples": 5000}})"));
  const auto* t = r.table("additive_error");
  ASSERT_NE(t, nullptr);
  EXPECT_EQ(t->rows[0][2], 1.0);
  EXPECT_NEAR(t->rows[2][2], 3 / std::numbers::pi * std::asin(0.75) - 0.5, 1e-12);
  EXPECT_NE(r.table("additive_error_robustness"), nullptr);
}

TEST(Experiments, T4dClosedCurvesAndSingularSkip) {
  const auto r = run_experiment(config(R"({"experiment": "t4d", "samples": 3000,
      "params": {"rho_y": [0.5, 1.0], "resolution": 21, "mc_points": 0}})"));
  const auto* t = r.table("t4d_closed");
  ASSERT_NE(t, nullptr);
  for (const auto& row : t->rows) {
    EXPECT_GE(row[2], 0.0);
    EXPECT_LE(row[2], 1.0);
    if (row[1] == 0.0) EXPECT_LE(std::abs(row[2]), 1e-10);
  }
  ASSERT_EQ(r.plots.size(), 1u);
  EXPECT_EQ(r.plots[0].series.size(), 2u);
}

TEST(Experiments, DiagnosticsControls) {
  const auto r = run_experiment(config(R"({"experiment": "diagnostics", "grid": 64, "params": {"product_grid": 16,
      "sequence": [0.9, 0.7, 0.55, 0.51, 0.501], "stripes": [1, 2, 4, 8]}})"));
  EXPECT_TRUE(r.controls_passed());
  const auto* ex = r.table("diagnostics_reflection");
  ASSERT_NE(ex, nullptr);
  EXPECT_LT(ex->rows[0][0], 1e-12);
  EXPECT_GE(ex->rows[0][1], 0.1);
}

TEST(Experiments, EmitAllIsByteIdenticalAcrossRuns) {
  const auto c = config(R"({"experiment": "equicorrelated", "params": {"dims": [1, 3], "resolution": 21}})");
  const auto d1 = scratch("emit1"), d2 = scratch("emit2");
  emit_all(run_experiment(c), d1);
  emit_all(run_experiment(c), d2);
  EXPECT_EQ(slurp(d1 / "equicorrelated.csv"), slurp(d2 / "equicorrelated.csv"));
  EXPECT_TRUE(std::filesystem::exists(d1 / "equicorrelated.svg"));
  EXPECT_TRUE(std::filesystem::exists(d1 / "equicorrelated.meta.json"));
  EXPECT_EQ(slurp(d1 / "equicorrelated.csv").substr(0, 11), "p,rho,r,xi\n");
}

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sshwalk/experiments.hpp"

using namespace sshwalk;

namespace {

nlohmann::json load_golden() {
  std::ifstream is(std::filesystem::path(SSHWALK_GOLDEN_DIR) / "walk_boundary.json");
  return nlohmann::json::parse(is);
}

double column_max(const Table& t, const std::string& col) {
  const std::size_t c = t.column(col);
  double best = -1e300;
  for (const auto& row : t.rows) best = std::max(best, row[c]);
  return best;
}

}  // namespace

TEST(ExperimentConfig, ParsesKeyValueText) {
  std::stringstream ss("# comment\nv = 0.2\n\n w=0.8 # trailing\nN=20\npairs = 0.5:0.5, 0.1:0.9\n");
  const ExperimentConfig cfg = ExperimentConfig::parse("x", ss);
  EXPECT_DOUBLE_EQ(cfg.number("v", 0), 0.2);
  EXPECT_DOUBLE_EQ(cfg.number("w", 0), 0.8);
  EXPECT_EQ(cfg.integer("N", 0), 20);
  EXPECT_EQ(cfg.pairs("pairs", {}).size(), 2u);
  EXPECT_DOUBLE_EQ(cfg.number("missing", 1.5), 1.5);
  std::stringstream bad("v 0.2\n");
  EXPECT_THROW(ExperimentConfig::parse("x", bad), InvalidParameter);
}

TEST(ExperimentConfig, ValidationErrors) {
  ExperimentConfig cfg("fig3", {{"v", "abc"}});
  EXPECT_THROW(cfg.number("v", 0), InvalidParameter);
  ExperimentConfig n("fig3", {{"N", "2.5"}});
  EXPECT_THROW(n.integer("N", 0), InvalidParameter);
  EXPECT_THROW(run_experiment(ExperimentConfig("fig3", {{"bogus", "1"}})), InvalidParameter);
  EXPECT_THROW(run_experiment(ExperimentConfig("nope")), InvalidParameter);
  EXPECT_THROW(run_experiment(ExperimentConfig("fig3", {{"v", "-1"}})), InvalidParameter);
}

TEST(ExperimentConfig, MergeLetsLaterValuesWin) {
  ExperimentConfig base("fig3", {{"v", "0.1"}, {"w", "0.9"}});
  base.merge(ExperimentConfig("fig3", {{"v", "0.3"}}));
  EXPECT_DOUBLE_EQ(base.number("v", 0), 0.3);
  EXPECT_DOUBLE_EQ(base.number("w", 0), 0.9);
}

TEST(WalkHomogeneous, SymmetricLightCone) {
  const ResultBundle b = run_walk_homogeneous(ExperimentConfig("walk_homogeneous"));
  EXPECT_TRUE(b.passed());
  EXPECT_LE(b.summary["symmetry_error"].get<double>(), 1e-8);
  const double speed = b.summary["front_speed"].get<double>();
  EXPECT_NEAR(speed, 0.5, 0.05);
  // summary recomputable from the front table
  const Table& front = b.table("front");
  EXPECT_EQ(front.rows.size(), 61u);
}

TEST(WalkHomogeneous, AsymmetricHoppingKeepsSublatticeMirror) {
  const ResultBundle b = run_walk_homogeneous(
      ExperimentConfig("walk_homogeneous", {{"v", "0.3"}, {"w", "0.7"}, {"sublattice", "B"}}));
  EXPECT_TRUE(b.passed()) << b.summary_json().dump(2);
}

TEST(WalkHomogeneous, DecoupledDimersDoNotSpread) {
  const ResultBundle b =
      run_walk_homogeneous(ExperimentConfig("walk_homogeneous", {{"v", "1"}, {"w", "0"}}));
  EXPECT_TRUE(b.passed()) << b.summary_json().dump(2);
  EXPECT_EQ(column_max(b.table("front"), "front_distance"), 0.0);
}

TEST(WalkBoundary, SuppressedAgainstControlAndGolden) {
  const nlohmann::json golden = load_golden();
  const double frozen = golden["right_mass"].get<double>();
  const ResultBundle b = run_walk_boundary(ExperimentConfig(
      "walk_boundary", {{"golden_right_mass", io::format_number(frozen)}}));
  EXPECT_TRUE(b.passed()) << b.summary_json().dump(2);
  const double right = b.summary["right_mass"].get<double>();
  const double control = b.summary["control_right_mass"].get<double>();
  EXPECT_LE(right, frozen + 1e-6);
  EXPECT_GE(control, 5.0 * right);
  // summary scalars match the last row of the mass table
  const Table& mass = b.table("right_mass");
  EXPECT_EQ(mass.rows.back()[1], right);
  EXPECT_EQ(mass.rows.back()[2], control);
}

TEST(WalkBoundary, EqualHoppingMatchesControl) {
  const ResultBundle b =
      run_walk_boundary(ExperimentConfig("walk_boundary", {{"v", "0.5"}, {"w", "0.5"}, {"t_max", "60"}}));
  EXPECT_TRUE(b.passed()) << b.summary_json().dump(2);
  EXPECT_NEAR(b.summary["right_mass"].get<double>(), b.summary["control_right_mass"].get<double>(), 1e-12);
}

TEST(Fig3, PeakEndpointsAndFlux) {
  const ResultBundle b = run_fig3(ExperimentConfig("fig3"));
  EXPECT_TRUE(b.passed()) << b.summary_json().dump(2);
  const Table& curve = b.table("curve");
  EXPECT_EQ(curve.rows.size(), 501u);
  EXPECT_EQ(column_max(curve, "t2"), b.summary["peak_t2"].get<double>());
  EXPECT_NEAR(b.summary["argmax_k"].get<double>(), pi / 2, b.summary["grid_step"].get<double>());
}

TEST(Fig4, DecreasingPeaksAndFlatCurve) {
  const ResultBundle b = run_fig4(ExperimentConfig("fig4"));
  EXPECT_TRUE(b.passed()) << b.summary_json().dump(2);
  const auto peaks = b.summary["peaks"];
  ASSERT_EQ(peaks.size(), 4u);
  EXPECT_LE(peaks[3]["t_max"].get<double>(), 1e-5);
  EXPECT_EQ(b.table("peaks").rows[2][4], peaks[2]["t_max"].get<double>());
}

TEST(TmaxScan, MonotoneAndThresholdRecorded) {
  const ResultBundle b = run_tmax_scan(ExperimentConfig("tmax_scan"));
  EXPECT_TRUE(b.summary["monotone_non_increasing"].get<bool>());
  const Table& scan = b.table("scan");
  EXPECT_EQ(scan.rows.size(), 50u);
  EXPECT_NEAR(scan.rows.front()[4], 1.0, 1e-12);
  // T_max(rho) = ((1 - rho^2) / (1 + rho^2))^2 for the interchange boundary
  for (const auto& row : scan.rows) {
    const double rho = row[0];
    EXPECT_NEAR(row[4], std::pow((1 - rho * rho) / (1 + rho * rho), 2), 1e-10);
  }
  const double threshold = b.summary["rho_threshold"].get<double>();
  EXPECT_NEAR(threshold, std::sqrt((1 - std::sqrt(1e-3)) / (1 + std::sqrt(1e-3))), 1e-9);
  EXPECT_EQ(b.table("threshold_bisection").rows.back()[2], threshold);
}

TEST(ResultBundle, WritesTablesAndSummary) {
  const auto dir = std::filesystem::temp_directory_path() / "sshwalk_bundle_test";
  std::filesystem::remove_all(dir);
  const ResultBundle b = run_fig3(ExperimentConfig("fig3", {{"points", "11"}}));
  b.write(dir);
  EXPECT_TRUE(std::filesystem::exists(dir / "curve.csv"));
  std::ifstream is(dir / "summary.json");
  const auto j = nlohmann::json::parse(is);
  EXPECT_EQ(j["config"]["name"], "fig3");
  EXPECT_EQ(j["config"]["parameters"]["points"], "11");
  EXPECT_EQ(j["provenance"]["toolkit_version"], kToolkitVersion);
  EXPECT_TRUE(j["passed"].get<bool>());
  std::filesystem::remove_all(dir);
}

TEST(ResultBundle, ReproducibleFromConfigEcho) {
  const ExperimentConfig cfg("walk_homogeneous", {{"N", "40"}, {"n0", "20"}, {"t_max", "10"}});
  const ResultBundle a = run_experiment(cfg);
  const ResultBundle b = run_experiment(a.config);
  ASSERT_EQ(a.tables.size(), b.tables.size());
  for (std::size_t i = 0; i < a.tables.size(); ++i) EXPECT_EQ(a.tables[i].rows, b.tables[i].rows);
  EXPECT_EQ(a.summary, b.summary);
}

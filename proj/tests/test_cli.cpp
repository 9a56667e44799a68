#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "sshwalk/sshwalk.hpp"

using namespace sshwalk;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string(SSHWALK_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  RunResult r;
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::stringstream ss(text);
  for (std::string line; std::getline(ss, line);) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Cli, Version) {
  const RunResult r = run("--version");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find(kToolkitVersion), std::string::npos);
  EXPECT_NE(r.out.find("format 1"), std::string::npos);
}

TEST(Cli, UnknownFlagAndMissingSubcommand) {
  EXPECT_EQ(run("bands --bogus 1").code, 2);
  EXPECT_EQ(run("").code, 2);
}

TEST(Cli, BandsGapCloses) {
  const RunResult r = run("bands --v 0.5 --w 0.5 --points 200");
  ASSERT_EQ(r.code, 0);
  const auto rows = csv_rows(r.out);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"k", "E_plus", "E_minus", "theta"}));
  double min_e = 1e9;
  for (std::size_t i = 1; i < rows.size(); ++i) min_e = std::min(min_e, std::stod(rows[i][1]));
  EXPECT_EQ(min_e, 0.0);
  EXPECT_EQ(rows.back()[3], "nan");  // theta undefined at the closing point
}

TEST(Cli, BandsMatchesLibrary) {
  const RunResult r = run("bands --v 0.1 --w 0.9 --points 100");
  ASSERT_EQ(r.code, 0);
  const auto rows = csv_rows(r.out);
  double min_gap = 1e9;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double k = std::stod(rows[i][0]);
    EXPECT_NEAR(std::stod(rows[i][1]), dispersion(HoppingPair(0.1, 0.9), k), 1e-11);
    min_gap = std::min(min_gap, std::stod(rows[i][1]) - std::stod(rows[i][2]));
  }
  EXPECT_NEAR(min_gap, 1.6, 1e-12);
}

TEST(Cli, BandsRejectsNegativeHopping) {
  EXPECT_EQ(run("bands --v -1 --w 0.5").code, 2);
}

TEST(Cli, Winding) {
  RunResult r = run("winding --v 0.9 --w 0.1");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "0\n");
  r = run("winding --v 0.1 --w 0.9");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "1\n");
  EXPECT_EQ(run("winding --v 0.5 --w 0.5").code, 4);
}

TEST(Cli, EvolveDeltaAtZeroAndDimerFlop) {
  RunResult r = run("evolve --N 10 --n0 3 --t 0");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("# sshwalk-state format 1", 0), 0u);
  std::stringstream ss(r.out);
  const StateVector s = io::read_state_csv(ss);
  EXPECT_NEAR(std::norm(s.at(3, Sublattice::A)), 1.0, 1e-12);

  r = run("evolve --v 1 --w 0 --N 10 --n0 3 --t 1.5707963267948966");
  ASSERT_EQ(r.code, 0);
  std::stringstream flop(r.out);
  EXPECT_NEAR(std::norm(io::read_state_csv(flop).at(3, Sublattice::B)), 1.0, 1e-10);
}

TEST(Cli, EvolveMatchesLibraryAndIsSymmetric) {
  const RunResult r = run("evolve --v 0.5 --w 0.5 --N 150 --n0 70 --t 40");
  ASSERT_EQ(r.code, 0);
  const LatticeSpec l(150);
  const StateVector lib = evolve(localized_A(l, HoppingPair(0.5, 0.5), 70), 40.0);
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), lib.size() + 1);
  for (std::size_t i = 0; i < lib.size(); ++i) {
    EXPECT_EQ(rows[i + 1][2], io::format_number(lib[i].real()));
    EXPECT_EQ(rows[i + 1][3], io::format_number(lib[i].imag()));
  }
  const std::size_t i0 = l.site(70, Sublattice::A);
  for (std::size_t d = 1; d < 50; ++d)
    EXPECT_NEAR(std::stod(rows[i0 + d + 1][4]), std::stod(rows[i0 - d + 1][4]), 1e-8);
}

TEST(Cli, EvolveFramesAndJson) {
  const auto dir = temp_dir("sshwalk_cli_frames");
  EXPECT_EQ(run("evolve --N 20 --n0 10 --frames " + dir.string() + " --t-max 2 --t-step 1").code, 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "frame_000002.csv"));
  EXPECT_FALSE(std::filesystem::exists(dir / "frame_000003.csv"));
  std::filesystem::remove_all(dir);
  const RunResult j = run("evolve --N 4 --n0 1 --format json");
  ASSERT_EQ(j.code, 0);
  EXPECT_EQ(nlohmann::json::parse(j.out)["sites"].size(), 8u);
}

TEST(Cli, EvolveWithBoundaryUsesOracle) {
  const RunResult r = run("evolve --v 0.1 --w 0.9 --N 60 --n0 20 --boundary 30 --t 25");
  ASSERT_EQ(r.code, 0);
  const LatticeSpec l(60, BoundaryCondition::open);
  const StateVector lib = evolve_dense(build_dense(l, HoppingPair(0.1, 0.9), 30),
                                       StateVector::localized(l, 20, Sublattice::A), 25.0);
  const auto rows = csv_rows(r.out);
  for (std::size_t i = 0; i < lib.size(); ++i)
    EXPECT_NEAR(std::stod(rows[i + 1][4]), std::norm(lib[i]), 1e-11);
}

TEST(Cli, ScatterEqualParametersAndPeak) {
  RunResult r = run("scatter --v 0.5 --w 0.5 --points 21");
  ASSERT_EQ(r.code, 0);
  auto rows = csv_rows(r.out);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"k", "t2", "r2", "cond"}));
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_NEAR(std::stod(rows[i][1]), 1.0, 1e-10);

  r = run("scatter --v 0.1 --w 0.9");
  ASSERT_EQ(r.code, 0);
  rows = csv_rows(r.out);
  EXPECT_EQ(rows.size(), 502u);
  std::size_t best = 1;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_NEAR(std::stod(rows[i][1]) + std::stod(rows[i][2]), 1.0, 1e-9);
    if (std::stod(rows[i][1]) > std::stod(rows[best][1])) best = i;
  }
  EXPECT_NEAR(std::stod(rows[best][0]), pi / 2, pi / 500);
}

TEST(Cli, ScatterSinglePointMatchesLibrary) {
  const RunResult r = run("scatter --v 0.2 --w 0.8 --k 1.1 --format json");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  const ScatteringSolution s = solve_boundary(BoundaryProblem(HoppingPair(0.2, 0.8), 1.1));
  EXPECT_EQ(j[0]["t2"].get<double>(), s.transmittance);
  EXPECT_EQ(run("scatter --k 4").code, 2);
}

TEST(Cli, Tmax) {
  const RunResult r = run("tmax --v 0.1 --w 0.9");
  ASSERT_EQ(r.code, 0);
  const auto rows = csv_rows(r.out);
  const PeakTransmission p = t_max(HoppingPair(0.1, 0.9));
  EXPECT_EQ(rows[1][3], io::format_number(p.t2));
}

TEST(Cli, ConfigFileFillsUnsetFlags) {
  const auto dir = temp_dir("sshwalk_cli_config");
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "p.cfg") << "v = 0.9\nw = 0.1\n";
  EXPECT_EQ(run("winding --config " + (dir / "p.cfg").string()).out, "0\n");
  // the flag wins over the file
  EXPECT_EQ(run("winding --config " + (dir / "p.cfg").string() + " --v 0.05").out, "1\n");
  std::ofstream(dir / "bad.cfg") << "colour = red\n";
  EXPECT_EQ(run("winding --config " + (dir / "bad.cfg").string()).code, 2);
  EXPECT_EQ(run("winding --config " + (dir / "missing.cfg").string()).code, 3);
  std::filesystem::remove_all(dir);
}

TEST(Cli, FigurePipeline) {
  const auto dir = temp_dir("sshwalk_cli_fig3");
  const RunResult r = run("figure fig3 --set points=101 --out " + dir.string());
  EXPECT_EQ(r.code, 0);
  std::ifstream is(dir / "summary.json");
  const auto j = nlohmann::json::parse(is);
  EXPECT_TRUE(j["passed"].get<bool>());
  const ResultBundle lib = run_fig3(ExperimentConfig("fig3", {{"points", "101"}}));
  EXPECT_EQ(j["summary"]["peak_t2"].get<double>(), lib.summary["peak_t2"].get<double>());
  std::filesystem::remove_all(dir);
}

TEST(Cli, FigureOverridesAndFailures) {
  const auto dir = temp_dir("sshwalk_cli_fig_cfg");
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "f.cfg") << "points = 11\nv = 0.3\n";
  EXPECT_EQ(run("figure fig3 --config " + (dir / "f.cfg").string() + " --set v=0.2 --out " +
                (dir / "out").string())
                .code,
            0);
  std::ifstream is(dir / "out" / "summary.json");
  const auto j = nlohmann::json::parse(is);
  EXPECT_EQ(j["config"]["parameters"]["v"], "0.2");
  EXPECT_EQ(run("figure fig3 --set bogus=1 --out " + (dir / "x").string()).code, 2);
  EXPECT_EQ(run("figure unknown").code, 2);
  // a pipeline whose embedded assertion fails exits 1
  EXPECT_EQ(run("figure walk_boundary --set t_max=20 --set golden_right_mass=-1 --out " +
                (dir / "wb").string())
                .code,
            1);
  std::filesystem::remove_all(dir);
}

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include <json.hpp>

namespace {

namespace fs = std::filesystem;

const fs::path kScenarios = TASOLVE_SCENARIO_DIR;

int run_cli(const std::string& args) {
  const std::string cmd = std::string(TASOLVE_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path fresh(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("tasolve_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

TEST(Cli, SolveStaticScenario) {
  const fs::path out = fresh("static");
  EXPECT_EQ(run_cli("solve --scenario " + (kScenarios / "paper_fig3_static.json").string() +
                    " --out " + out.string()),
            0);
  EXPECT_EQ(slurp(out / "assignment.csv"), "path_id,timestep,value_vph\n1,0,1300\n2,0,0\n3,0,300\n");
  EXPECT_FALSE(fs::exists(out / "state.csv"));
  const auto report = nlohmann::json::parse(slurp(out / "report.json"));
  EXPECT_EQ(report["config"]["solver"]["method"], "fw");
}

TEST(Cli, OutputsAreByteIdenticalAcrossRuns) {
  const std::string scenario = (kScenarios / "paper_fig3_dynamic.json").string();
  const fs::path a = fresh("det_a");
  const fs::path b = fresh("det_b");
  ASSERT_EQ(run_cli("solve --scenario " + scenario + " --out " + a.string()), 0);
  ASSERT_EQ(run_cli("solve --scenario " + scenario + " --out " + b.string()), 0);
  for (const char* f : {"assignment.csv", "path_costs.csv", "state.csv", "metrics.csv"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
}

TEST(Cli, OverridesAndExitCodes) {
  const std::string scenario = (kScenarios / "paper_fig3_dynamic.json").string();
  const fs::path out = fresh("budget");
  EXPECT_EQ(run_cli("solve --scenario " + scenario + " --out " + out.string() + " --max-iters 3"), 2);
  const auto report = nlohmann::json::parse(slurp(out / "report.json"));
  EXPECT_EQ(report["converged"], false);
  EXPECT_EQ(report["termination"], "max_iters");
  EXPECT_EQ(report["overrides"][0]["flag"], "--max-iters");
  EXPECT_EQ(report["config"]["solver"]["max_iters"], 3);

  EXPECT_EQ(run_cli("solve --scenario " + scenario + " --out " + out.string() + " --solver fw"), 1);
  EXPECT_EQ(run_cli("solve --scenario /nonexistent.json --out " + out.string()), 1);
  EXPECT_EQ(run_cli("solve --out " + out.string()), 1);
}

TEST(Cli, MerchantNemhauserOverride) {
  const fs::path out = fresh("mn");
  ASSERT_EQ(run_cli("solve --scenario " + (kScenarios / "paper_fig3_dynamic.json").string() +
                    " --out " + out.string() + " --model mn --cost-mode instantaneous"),
            0);
  std::istringstream csv(slurp(out / "assignment.csv"));
  std::string line;
  std::getline(csv, line);
  int rows = 0;
  while (std::getline(csv, line)) {
    if (line.rfind("2,", 0) == 0) {
      EXPECT_EQ(line.substr(line.rfind(',') + 1), "0") << line;
      ++rows;
    }
  }
  EXPECT_EQ(rows, 120);
}

TEST(Cli, Validate) {
  EXPECT_EQ(run_cli("validate --scenario " + (kScenarios / "paper_fig3_dynamic.json").string()), 0);
  const fs::path dir = fresh("validate");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.json") << R"({"model": "ctm", "extra": 1})";
  EXPECT_EQ(run_cli("validate --scenario " + (dir / "bad.json").string()), 1);
}

TEST(Cli, Compare) {
  const fs::path out = fresh("compare");
  const std::string dyn = (kScenarios / "paper_fig3_dynamic.json").string();
  ASSERT_EQ(run_cli("compare --scenario " + dyn + " --out " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out / "comparison.csv"));
  EXPECT_TRUE(fs::exists(out / "summary.csv"));
  EXPECT_EQ(run_cli("compare --scenario " + dyn + " --scenario " +
                    (kScenarios / "paper_fig3_static.json").string() + " --out " + out.string()),
            1);
}

}  // namespace

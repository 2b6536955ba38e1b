#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <regex>
#include <string>

#include "gsql/io.hpp"
#include "gsql/mdp.hpp"

namespace {

namespace fs = std::filesystem;

struct Result {
  int code = -1;
  std::string output;
};

Result gsql_cli(const std::string& args) {
  const std::string cmd = std::string(GSQL_CLI_PATH) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe)) r.output += buf;
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string manifest_hash(const std::string& output) {
  std::smatch m;
  if (std::regex_search(output, m, std::regex("manifest hash: ([0-9a-f]+)"))) return m[1];
  return {};
}

class cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("gsql_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  void write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name) << text;
  }
  fs::path dir_;
};

constexpr const char* kSingleState =
    R"({"num_states": 1, "num_actions": 1, "discount": 0.5, "rewards": [[1.0]], "transitions": [[[1.0]]]})";

TEST_F(cli, help_lists_exit_codes) {
  const auto r = gsql_cli("--help");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.output.find("Exit codes"), std::string::npos);
  EXPECT_NE(r.output.find("bound-check"), std::string::npos);
}

TEST_F(cli, missing_subcommand_is_usage_error) { EXPECT_EQ(gsql_cli("").code, 1); }

TEST_F(cli, solve_single_state_auto) {
  write("m.json", kSingleState);
  const auto r = gsql_cli("solve " + path("m.json") + " --w auto --tol 1e-12 --out " + path("out"));
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("w* = 2\n"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("V* = [2"), std::string::npos) << r.output;
  bool found = false;
  for (const auto& e : fs::recursive_directory_iterator(dir_ / "out")) {
    found = found || e.path().filename() == "qstar.json";
  }
  EXPECT_TRUE(found);
}

TEST_F(cli, solve_w_above_w_star) {
  write("m.json", kSingleState);
  const auto r = gsql_cli("solve " + path("m.json") + " --w 2.5 --out " + path("out"));
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(r.output.find("w* = 2"), std::string::npos) << r.output;
}

TEST_F(cli, solve_error_codes) {
  EXPECT_EQ(gsql_cli("solve " + path("missing.json")).code, 6);
  write("bad.json", "{not json");
  EXPECT_EQ(gsql_cli("solve " + path("bad.json")).code, 2);
  write("rows.json",
        R"({"num_states": 1, "num_actions": 1, "discount": 0.5, "rewards": [[1.0]], "transitions": [[[0.5]]]})");
  EXPECT_EQ(gsql_cli("solve " + path("rows.json")).code, 3);
  write("m.json", kSingleState);
  const auto r = gsql_cli("solve " + path("m.json") + " --w 1 --tol 1e-14 --iters 3 --out " + path("out"));
  EXPECT_EQ(r.code, 5);
  EXPECT_NE(r.output.find("residual"), std::string::npos);
}

TEST_F(cli, gen_mdp_high_self_loop_then_solve) {
  auto r = gsql_cli("gen-mdp --states 10 --actions 5 --min-self-loop 0.9 --spread 0 --discount 0.9 --seed 3 --out " +
                    path("fig1b.json"));
  ASSERT_EQ(r.code, 0) << r.output;
  const auto m = gsql::load_mdp(path("fig1b.json"));
  EXPECT_EQ(m.num_states(), 10u);
  r = gsql_cli("solve " + path("fig1b.json") + " --out " + path("out"));
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("w* = 5.26"), std::string::npos) << r.output;
}

TEST_F(cli, run_is_deterministic_per_seed) {
  const std::string cfg = std::string(GSQL_CONFIG_DIR) + "/fig1a.json";
  const std::string common = "run --config " + cfg + " --iters 200 --out " + path("out");
  const auto a = gsql_cli(common);
  const auto b = gsql_cli(common);
  const auto c = gsql_cli(common + " --seed 7");
  ASSERT_EQ(a.code, 0) << a.output;
  ASSERT_EQ(c.code, 0) << c.output;
  EXPECT_FALSE(manifest_hash(a.output).empty());
  EXPECT_EQ(manifest_hash(a.output), manifest_hash(b.output));
  EXPECT_NE(manifest_hash(a.output), manifest_hash(c.output));
  for (const char* alg : {"ql", "sql", "dql", "gsql1", "gsql2"}) {
    EXPECT_NE(a.output.find(std::string("\n") + alg + " "), std::string::npos) << alg;
  }
  std::size_t dirs = 0;
  for (const auto& e : fs::directory_iterator(dir_ / "out")) {
    ++dirs;
    for (const char* f : {"curves.csv", "curves.svg", "manifest.json", "runs.csv"}) {
      EXPECT_TRUE(fs::exists(e.path() / f)) << f;
    }
  }
  EXPECT_EQ(dirs, 2u);
}

TEST_F(cli, output_dir_from_environment_and_default) {
  const std::string cfg = std::string(GSQL_CONFIG_DIR) + "/fig1b.json";
  const std::string tail = std::string(GSQL_CLI_PATH) + " run --config " + cfg + " --iters 20 > /dev/null 2>&1";
  ASSERT_EQ(std::system(("GSQL_OUT_DIR=" + path("env") + " " + tail).c_str()), 0);
  EXPECT_FALSE(fs::is_empty(dir_ / "env"));
  ASSERT_EQ(std::system(("cd " + dir_.string() + " && GSQL_OUT_DIR= " + tail).c_str()), 0);
  EXPECT_FALSE(fs::is_empty(dir_ / "gsql-out"));
}

TEST_F(cli, invalid_config_reports_field) {
  write("c.json", R"({"experiment_id": "x", "mdp": {"num_states": 3, "num_actions": 2, "discount": 0.6},
                      "algorithms": [{"id": "sql"}], "ensemble_sise": 3})");
  const auto r = gsql_cli("run --config " + path("c.json") + " --out " + path("out"));
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.output.find("ensemble_sise"), std::string::npos) << r.output;
  write("w.json", R"({"experiment_id": "x", "mdp": {"num_states": 3, "num_actions": 2, "discount": 0.6},
                      "algorithms": [{"id": "gsql1", "w": 40}]})");
  EXPECT_EQ(gsql_cli("run --config " + path("w.json") + " --out " + path("out")).code, 4);
  EXPECT_EQ(gsql_cli("run --config " + path("none.json")).code, 6);
}

TEST_F(cli, sweep_scale_and_bound_check) {
  const std::string dir = std::string(GSQL_CONFIG_DIR);
  auto r = gsql_cli("sweep-w --config " + dir + "/fig1c.json --iters 100 --out " + path("out"));
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("gsql1(w=0.5)"), std::string::npos);
  r = gsql_cli("scale --config " + dir + "/table1.json --iters 5 --out " + path("out"));
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("E^SQL - E^GSQL"), std::string::npos);
  r = gsql_cli("bound-check --config " + dir + "/bound_check.json --iters 50 --out " + path("out"));
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("violation rate"), std::string::npos);
}

}  // namespace

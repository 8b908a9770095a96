// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "test_helpers.hpp"
#include "thermident/config.hpp"
#include "thermident/csv_io.hpp"
#include "thermident/pipeline.hpp"

using namespace thermident;
using thermident::testing::TempDir;
namespace fs = std::filesystem;

namespace {

const char *kSmallConfig =
    "scenario.name = small\n"
    "scenario.building = house\n"
    "scenario.season_days = 12\n"
    "scenario.training_end_day = 5\n"
    "scenario.windows = 3\n"
    "scenario.methods = NLS, MLE, ALS\n"
    "scenario.rc_architectures = R-1\n"
    "optimizer.max_iters = 200\n"
    "optimizer.f_tol = 1e-8\n"
    "optimizer.multistart_count = 1\n";

std::string slurp(const fs::path &p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

struct Cli {
  std::ostringstream out, err;
  int operator()(std::vector<std::string> args) { return run_command(args, out, err); }
};

fs::path write_config(const fs::path &dir, const std::string &text) {
  const fs::path p = dir / "scenario.cfg";
  std::ofstream(p) << text;
  return p;
}

int run_all(const fs::path &cfg, const fs::path &out) {
  for (const char *stage : {"generate", "estimate", "evaluate", "report"}) {
    Cli cli;
    const int code = cli({stage, "--config", cfg.string(), "--out", out.string()});
    if (code != kExitOk) return code;
  }
  return kExitOk;
}

}  // namespace

TEST(Pipeline, CellEnumeration) {
  const ScenarioConfig cfg = parse_config(kSmallConfig);
  const std::vector<CellSpec> cells = estimation_cells(cfg);
  ASSERT_EQ(cells.size(), 3u);
  EXPECT_EQ(cells[0].id(), "NLS_R-1_3d");
  EXPECT_EQ(cells[1].id(), "MLE_R-1_3d");
  EXPECT_EQ(cells[2].id(), "ALS_R-A_5d");
}

TEST(Pipeline, WindowsPrecedeTestWeek) {
  const ScenarioConfig cfg = parse_config(kSmallConfig);
  const Dataset season = generate_scenario(cfg);
  EXPECT_EQ(season.size(), 12 * 144);
  const Dataset test = test_window(cfg, season);
  const Dataset train = training_window(cfg, season, {"NLS", "R-1", 3});
  EXPECT_EQ(test.size(), 7 * 144);
  EXPECT_EQ(train.size(), 3 * 144);
  EXPECT_EQ(train.timestamp(train.size() - 1) + 600, test.timestamp(0));
}

TEST(Pipeline, EndToEndSmallScenario) {
  TempDir dir("pipe");
  const fs::path cfg = write_config(dir.path(), kSmallConfig);
  const fs::path out = dir.path() / "out";
  ASSERT_EQ(run_all(cfg, out), kExitOk);
  for (const char *f : {"dataset.csv", "truth_params.csv", "params/NLS_R-1_3d.csv",
                        "params/ALS_R-A_5d.csv", "traces/MLE_R-1_3d_Sim3.csv",
                        "evaluation.csv", "report.csv"})
    EXPECT_TRUE(fs::exists(out / f)) << f;
  const std::vector<EvalReport> rows = read_report(out / "report.csv");
  EXPECT_EQ(rows.size(), 9u);
  for (const EvalReport &r : rows) {
    if (r.sim_type == SimType::Sim3)
      EXPECT_TRUE(r.deadband_occupancy.has_value());
    else
      EXPECT_TRUE(r.average_accuracy.has_value());
  }
  const Dataset d = read_dataset(out / "dataset.csv");
  EXPECT_EQ(d.t_s, 600.0);

  // Round trip of a fitted cell through its parameter file.
  const ScenarioConfig sc = parse_config(kSmallConfig);
  const ParamTable table = read_params(out / "params" / "ALS_R-A_5d.csv");
  const CellFit back = from_param_table({"ALS", "R-A", 5}, table);
  const ParamTable again = to_param_table(sc, back);
  for (const auto &[name, value] : table.values) EXPECT_EQ(again.get(name), value) << name;

  // Re-running a stage leaves the report byte-identical.
  const std::string first = slurp(out / "report.csv");
  Cli cli;
  ASSERT_EQ(cli({"report", "--config", cfg.string(), "--out", out.string()}), kExitOk);
  EXPECT_EQ(slurp(out / "report.csv"), first);
}

TEST(Pipeline, StaleArtifactsRejected) {
  TempDir dir("stale");
  const fs::path cfg = write_config(dir.path(), kSmallConfig);
  const fs::path out = dir.path() / "out";
  Cli gen;
  ASSERT_EQ(gen({"generate", "--config", cfg.string(), "--out", out.string()}), kExitOk);
  Cli est;
  EXPECT_EQ(est({"estimate", "--config", cfg.string(), "--out", out.string(), "--seed", "5"}),
            kExitConfigError);
  EXPECT_NE(est.err.str().find("config hash"), std::string::npos) << est.err.str();
  Cli eval;
  EXPECT_EQ(eval({"evaluate", "--config", cfg.string(), "--out", out.string()}),
            kExitConfigError);
}

TEST(Pipeline, CommandLineErrors) {
  TempDir dir("cli");
  const fs::path cfg = write_config(dir.path(), kSmallConfig);
  Cli unknown;
  EXPECT_EQ(unknown({"frobnicate", "--config", cfg.string()}), kExitConfigError);
  EXPECT_NE(unknown.err.str().find("generate"), std::string::npos);
  Cli none;
  EXPECT_EQ(none({}), kExitConfigError);
  Cli missing;
  EXPECT_EQ(missing({"generate"}), kExitConfigError);
  Cli bad_cfg;
  const fs::path broken = dir.path() / "broken.cfg";
  std::ofstream(broken) << "scenario.windows = 4\n";
  EXPECT_EQ(bad_cfg({"generate", "--config", broken.string(), "--out",
                     (dir.path() / "o").string()}),
            kExitConfigError);
  EXPECT_NE(bad_cfg.err.str().find("scenario.windows"), std::string::npos);
  Cli no_file;
  EXPECT_EQ(no_file({"generate", "--config", (dir.path() / "nope.cfg").string()}),
            kExitConfigError);
  Cli help;
  EXPECT_EQ(help({"--help"}), kExitOk);
}

TEST(Pipeline, NonConvergenceStillWritesParams) {
  TempDir dir("nonconv");
  std::string text = kSmallConfig;
  text.replace(text.find("optimizer.max_iters = 200"), 25, "optimizer.max_iters = 2");
  const fs::path cfg = write_config(dir.path(), text);
  const fs::path out = dir.path() / "out";
  Cli gen;
  ASSERT_EQ(gen({"generate", "--config", cfg.string(), "--out", out.string()}), kExitOk);
  Cli est;
  EXPECT_EQ(est({"estimate", "--config", cfg.string(), "--out", out.string()}),
            kExitNotConverged);
  EXPECT_TRUE(fs::exists(out / "params" / "NLS_R-1_3d.csv"));
  const Metadata meta = read_params(out / "params" / "NLS_R-1_3d.csv").metadata;
  const auto it = std::find_if(meta.begin(), meta.end(),
                               [](const auto &kv) { return kv.first == "converged"; });
  ASSERT_NE(it, meta.end());
  EXPECT_EQ(it->second, "0");
}

TEST(Pipeline, ThreadCountDoesNotChangeResults) {
  TempDir dir("threads");
  const fs::path cfg = write_config(dir.path(), kSmallConfig);
  setenv("THERMIDENT_THREADS", "1", 1);
  ASSERT_EQ(run_all(cfg, dir.path() / "a"), kExitOk);
  setenv("THERMIDENT_THREADS", "3", 1);
  ASSERT_EQ(run_all(cfg, dir.path() / "b"), kExitOk);
  unsetenv("THERMIDENT_THREADS");
  EXPECT_EQ(slurp(dir.path() / "a" / "report.csv"), slurp(dir.path() / "b" / "report.csv"));
  EXPECT_EQ(slurp(dir.path() / "a" / "evaluation.csv"),
            slurp(dir.path() / "b" / "evaluation.csv"));
}

// SPDX-License-Identifier: Apache-2.0
//
// generate -> estimate -> evaluate -> report over one scenario config.
//
//   out/dataset.csv, out/truth_params.csv            generate
//   out/params/<cell>.csv                            estimate
//   out/traces/<cell>_<sim>.csv, out/evaluation.csv  evaluate
//   out/report.csv                                   report
//
// A cell is one (method, architecture, training window) combination; its id
// reads e.g. "NLS_R-2_7d".

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "thermident/config.hpp"
#include "thermident/csv_io.hpp"
#include "thermident/dataset.hpp"
#include "thermident/evaluation.hpp"

namespace thermident {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfigError = 2,
  kExitNotConverged = 3,
};

struct CellSpec {
  std::string method;
  std::string architecture;
  int training_days = 0;

  std::string id() const;
};

// Every cell the config requests, in report order.
std::vector<CellSpec> estimation_cells(const ScenarioConfig &cfg);

// Full season of closed-loop truth data under the training thermostat.
Dataset generate_scenario(const ScenarioConfig &cfg);
Dataset training_window(const ScenarioConfig &cfg, const Dataset &season,
                        const CellSpec &cell);
Dataset test_window(const ScenarioConfig &cfg, const Dataset &season);

struct CellFit {
  CellSpec cell;
  FittedModel model;
  ThermalState x0;  // RC only: estimated initial state of the window
  bool converged = true;
  double objective = 0.0;
  int iterations = 0;
};

CellFit fit_cell(const ScenarioConfig &cfg, const Dataset &season,
                 const CellSpec &cell);

// Sim1, Sim2 and Sim3 on the held-out week, with method, window and trace
// ids filled in.
std::vector<SimOutcome> evaluate_cell(const ScenarioConfig &cfg,
                                      const Dataset &season,
                                      const CellFit &fit);

ParamTable to_param_table(const ScenarioConfig &cfg, const CellFit &fit);
CellFit from_param_table(const CellSpec &cell, const ParamTable &table);

// config_hash, seed, scenario and artifact kind.
Metadata artifact_metadata(const ScenarioConfig &cfg, const std::string &kind);
// Throws ConfigError when `path` was produced under a different config.
void verify_artifact(const ScenarioConfig &cfg, const std::filesystem::path &path);

struct StageResult {
  int exit_code = kExitOk;
  std::vector<std::string> messages;
};

StageResult run_generate(const ScenarioConfig &cfg, const std::filesystem::path &out);
StageResult run_estimate(const ScenarioConfig &cfg, const std::filesystem::path &out);
StageResult run_evaluate(const ScenarioConfig &cfg, const std::filesystem::path &out);
StageResult run_report(const ScenarioConfig &cfg, const std::filesystem::path &out);

// Worker count for cell fan-out: THERMIDENT_THREADS if set and positive,
// otherwise the hardware concurrency.
unsigned worker_threads();

// `thermident generate|estimate|evaluate|report --config <path>
// [--out <dir>] [--seed <n>]`. args excludes the program name. Returns the
// process exit status.
int run_command(const std::vector<std::string> &args, std::ostream &out,
                std::ostream &err);

}  // namespace thermident

// SPDX-License-Identifier: Apache-2.0

#include "thermident/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "thermident/errors.hpp"
#include "thermident/estimation.hpp"
#include "thermident/plant_sim.hpp"
#include "thermident/regression.hpp"

namespace thermident {

namespace fs = std::filesystem;

std::string CellSpec::id() const {
  return method + "_" + architecture + "_" + std::to_string(training_days) + "d";
}

std::vector<CellSpec> estimation_cells(const ScenarioConfig &cfg) {
  std::vector<int> windows = cfg.windows;
  std::sort(windows.begin(), windows.end());
  windows.erase(std::unique(windows.begin(), windows.end()), windows.end());

  std::vector<CellSpec> cells;
  for (const char *m : {"NLS", "BE", "MLE"}) {
    if (!cfg.has_method(m))
      continue;
    for (Preset p : cfg.rc_architectures)
      for (int w : windows)
        cells.push_back({m, std::string(preset_name(p)), w});
  }
  if (cfg.has_method("ALS"))
    cells.push_back({"ALS", std::string(almon_preset_name(cfg.als_architecture)),
                     cfg.training_end_day});
  return cells;
}

Dataset generate_scenario(const ScenarioConfig &cfg) {
  const DisturbanceSeq weather = gen_weather(cfg.weather);
  Dataset ds = generate_dataset(cfg.truth_plant(), cfg.training_thermostat(),
                                weather, cfg.measurement_noise_std,
                                cfg.measurement_seed(), cfg.t_s());
  return ds;
}

Dataset training_window(const ScenarioConfig &cfg, const Dataset &season,
                        const CellSpec &cell) {
  return season.days(cfg.window_first_day(cell.training_days), cell.training_days);
}

Dataset test_window(const ScenarioConfig &cfg, const Dataset &season) {
  return season.days(cfg.test_first_day(), cfg.test_days);
}

namespace {
  NoiseHyperParams noise_for(const ScenarioConfig &cfg, int dim, double y0) {
    return NoiseHyperParams::defaults(dim, y0, cfg.noise_q, cfg.noise_r,
                                      cfg.noise_p0);
  }
}  // namespace

CellFit fit_cell(const ScenarioConfig &cfg, const Dataset &season,
                 const CellSpec &cell) {
  const Dataset train = training_window(cfg, season, cell);
  CellFit fit{cell, RcModel{}, {}, true, 0.0, 0};
  if (cell.method == "ALS") {
    const AlmonPreset preset = parse_almon_preset(cell.architecture);
    const DesignMatrix design = build_design(train, almon_preset(preset));
    AlmonModel m = lls_fit(design);
    m.preset = cell.architecture;
    const Eigen::VectorXd resid = design.target - design.x * [&] {
      Eigen::VectorXd beta(design.x.cols());
      beta(0) = m.alpha0;
      for (size_t b = 0; b < m.specs.size(); ++b)
        beta.segment(design.block_offsets[b], m.omega[b].size()) = m.omega[b];
      return beta;
    }();
    fit.objective = resid.squaredNorm();
    fit.model = std::move(m);
    return fit;
  }

  const RcTopology topo = RcTopology::preset(parse_preset(cell.architecture));
  const RcMethod method = parse_rc_method(cell.method);
  const EstimationResult r =
      estimate(method, train, topo, noise_for(cfg, topo.state_dim(), train.t_z(0)),
               cfg.optimizer);
  fit.model = RcModel{topo, r.theta_hat};
  fit.x0 = r.x0_hat;
  fit.converged = r.converged;
  fit.objective = r.objective;
  fit.iterations = r.iterations;
  return fit;
}

std::vector<SimOutcome> evaluate_cell(const ScenarioConfig &cfg,
                                      const Dataset &season, const CellFit &fit) {
  const Dataset test = test_window(cfg, season);
  Sim3Options opts;
  opts.thermostat = cfg.evaluation_thermostat();
  opts.power = cfg.power;
  opts.transient_samples = test.samples_per_day();

  std::vector<SimOutcome> out;
  out.push_back(run_sim1(fit.model, test, std::nullopt, cfg.power));
  out.push_back(run_sim2(fit.model, test, std::nullopt, cfg.power));
  out.push_back(run_sim3(fit.model, test, opts));
  for (SimOutcome &o : out) {
    o.report.method = fit.cell.method;
    o.report.training_days = fit.cell.training_days;
    o.report.trace_id = fit.cell.id() + "_" + std::string(sim_name(o.report.sim_type));
  }
  return out;
}

Metadata artifact_metadata(const ScenarioConfig &cfg, const std::string &kind) {
  return {{"artifact", kind},
          {"config_hash", config_hash(cfg)},
          {"seed", std::to_string(cfg.seed)},
          {"scenario", cfg.name},
          {"building", std::string(building_name(cfg.building))}};
}

void verify_artifact(const ScenarioConfig &cfg, const fs::path &path) {
  if (!fs::exists(path))
    throw ConfigError("missing artifact '" + path.string() +
                      "'; run the preceding stage first");
  const Metadata meta = read_metadata(path);
  const std::string want = config_hash(cfg);
  for (const auto &[k, v] : meta)
    if (k == "config_hash") {
      if (v != want)
        throw ConfigError("artifact '" + path.string() + "' has config hash " +
                          v + " but the current config hashes to " + want +
                          "; re-run the earlier stages");
      return;
    }
  throw ConfigError("artifact '" + path.string() + "' carries no config hash");
}

ParamTable to_param_table(const ScenarioConfig &cfg, const CellFit &fit) {
  ParamTable t;
  t.metadata = artifact_metadata(cfg, "params");
  t.metadata.emplace_back("method", fit.cell.method);
  t.metadata.emplace_back("architecture", fit.cell.architecture);
  t.metadata.emplace_back("training_days", std::to_string(fit.cell.training_days));
  t.metadata.emplace_back("converged", fit.converged ? "1" : "0");
  t.metadata.emplace_back("objective", format_number(fit.objective));
  t.metadata.emplace_back("iterations", std::to_string(fit.iterations));

  if (const auto *rc = std::get_if<RcModel>(&fit.model)) {
    for (const ParamRef &ref : rc->topology.present_params())
      t.values.emplace_back(param_label(ref), rc->params.get(ref));
    for (Eigen::Index i = 0; i < fit.x0.size(); ++i)
      t.values.emplace_back("x0[" + std::to_string(i) + "]", fit.x0(i));
    return t;
  }
  const auto &als = std::get<AlmonModel>(fit.model);
  for (const AlmonSpec &s : als.specs)
    t.metadata.emplace_back("almon." + std::string(regressor_name(s.regressor)),
                            std::to_string(s.start_lag) + "," +
                                std::to_string(s.end_lag) + "," +
                                std::to_string(s.poly_order));
  t.values.emplace_back("alpha0", als.alpha0);
  for (size_t b = 0; b < als.specs.size(); ++b) {
    const std::string name(regressor_name(als.specs[b].regressor));
    for (Eigen::Index j = 0; j < als.omega[b].size(); ++j)
      t.values.emplace_back("omega." + name + "[" + std::to_string(j) + "]",
                            als.omega[b](j));
  }
  for (size_t b = 0; b < als.specs.size(); ++b) {
    const std::string name(regressor_name(als.specs[b].regressor));
    for (Eigen::Index i = 0; i < als.zeta[b].size(); ++i)
      t.values.emplace_back("zeta." + name + "[" +
                                std::to_string(als.specs[b].start_lag + i) + "]",
                            als.zeta[b](i));
  }
  return t;
}

CellFit from_param_table(const CellSpec &cell, const ParamTable &table) {
  CellFit fit{cell, RcModel{}, {}, true, 0.0, 0};
  for (const auto &[k, v] : table.metadata) {
    if (k == "converged")
      fit.converged = v == "1";
    else if (k == "objective")
      fit.objective = parse_number(v);
    else if (k == "iterations")
      fit.iterations = static_cast<int>(parse_number(v));
  }
  if (cell.method == "ALS") {
    AlmonModel m;
    m.preset = cell.architecture;
    m.specs = almon_preset(parse_almon_preset(cell.architecture));
    m.alpha0 = table.get("alpha0");
    for (const AlmonSpec &s : m.specs) {
      const std::string name(regressor_name(s.regressor));
      Eigen::VectorXd omega(s.poly_order + 1);
      for (int j = 0; j <= s.poly_order; ++j)
        omega(j) = table.get("omega." + name + "[" + std::to_string(j) + "]");
      m.zeta.push_back(almon_basis(s.start_lag, s.end_lag, s.poly_order) * omega);
      m.omega.push_back(std::move(omega));
    }
    fit.model = std::move(m);
    return fit;
  }
  const RcTopology topo = RcTopology::preset(parse_preset(cell.architecture));
  RcParameters p = RcParameters::zeros(topo);
  for (const ParamRef &ref : topo.present_params())
    p.set(ref, table.get(param_label(ref)));
  validate(topo, p);
  fit.x0.resize(topo.state_dim());
  for (int i = 0; i < topo.state_dim(); ++i)
    fit.x0(i) = table.get("x0[" + std::to_string(i) + "]");
  fit.model = RcModel{topo, std::move(p)};
  return fit;
}

unsigned worker_threads() {
  if (const char *env = std::getenv("THERMIDENT_THREADS")) {
    char *end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0)
      return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {
  // Runs fn(i) for i in [0, n) on up to worker_threads() threads. The first
  // exception is rethrown after all workers finish.
  template <class Fn> void parallel_for(size_t n, Fn fn) {
    const size_t workers = std::min<size_t>(worker_threads(), n);
    if (workers <= 1) {
      for (size_t i = 0; i < n; ++i)
        fn(i);
      return;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (size_t t = 0; t < workers; ++t)
      pool.emplace_back([&] {
        for (size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error)
              error = std::current_exception();
          }
        }
      });
    for (auto &th : pool)
      th.join();
    if (error)
      std::rethrow_exception(error);
  }

  fs::path dataset_path(const fs::path &out) { return out / "dataset.csv"; }
  fs::path params_path(const fs::path &out, const CellSpec &c) {
    return out / "params" / (c.id() + ".csv");
  }
  fs::path evaluation_path(const fs::path &out) { return out / "evaluation.csv"; }

  Dataset load_season(const ScenarioConfig &cfg, const fs::path &out) {
    verify_artifact(cfg, dataset_path(out));
    Dataset ds = read_dataset(dataset_path(out));
    if (ds.t_s != cfg.t_s())
      throw ConfigError("dataset sample period " + format_number(ds.t_s) +
                        " s differs from the config's " + format_number(cfg.t_s()));
    return ds;
  }
}  // namespace

StageResult run_generate(const ScenarioConfig &cfg, const fs::path &out) {
  Dataset ds = generate_scenario(cfg);
  ds.metadata = artifact_metadata(cfg, "dataset");
  const TruthPlant plant = cfg.truth_plant();
  ds.metadata.emplace_back("truth_plant", plant.name);
  if (cfg.building == Building::Commercial)
    ds.metadata.emplace_back(
        "note", "commercial data come from a 2-state RC surrogate plant");
  ds.metadata.emplace_back("training_setpoint", format_number(cfg.training_setpoint));
  ds.metadata.emplace_back("cop", format_number(plant.cop));
  write_dataset(ds, dataset_path(out));

  ParamTable truth;
  truth.metadata = artifact_metadata(cfg, "truth_params");
  truth.metadata.emplace_back("truth_plant", plant.name);
  truth.metadata.emplace_back("n_hidden", std::to_string(plant.topology.n_hidden()));
  for (const ParamRef &ref : plant.topology.present_params())
    truth.values.emplace_back(param_label(ref), plant.params.get(ref));
  write_params(truth, out / "truth_params.csv");

  return {kExitOk, {"wrote " + std::to_string(ds.size()) + " samples to " +
                    dataset_path(out).string()}};
}

StageResult run_estimate(const ScenarioConfig &cfg, const fs::path &out) {
  const Dataset season = load_season(cfg, out);
  const std::vector<CellSpec> cells = estimation_cells(cfg);
  std::vector<std::optional<CellFit>> fits(cells.size());
  parallel_for(cells.size(), [&](size_t i) { fits[i] = fit_cell(cfg, season, cells[i]); });

  StageResult res;
  for (const auto &fit : fits) {
    write_params(to_param_table(cfg, *fit), params_path(out, fit->cell));
    if (!fit->converged) {
      res.exit_code = kExitNotConverged;
      res.messages.push_back(fit->cell.id() + ": optimizer did not converge");
    }
  }
  res.messages.push_back("estimated " + std::to_string(cells.size()) + " cells");
  return res;
}

StageResult run_evaluate(const ScenarioConfig &cfg, const fs::path &out) {
  const Dataset season = load_season(cfg, out);
  const std::vector<CellSpec> cells = estimation_cells(cfg);
  std::vector<CellFit> fits;
  for (const CellSpec &c : cells) {
    verify_artifact(cfg, params_path(out, c));
    fits.push_back(from_param_table(c, read_params(params_path(out, c))));
  }
  std::vector<std::vector<SimOutcome>> results(cells.size());
  parallel_for(cells.size(),
               [&](size_t i) { results[i] = evaluate_cell(cfg, season, fits[i]); });

  std::vector<EvalReport> reports;
  for (const auto &cell_results : results) {
    for (const SimOutcome &o : cell_results) {
      Metadata meta = artifact_metadata(cfg, "trace");
      meta.emplace_back("trace_id", o.report.trace_id);
      meta.emplace_back("sim_type", std::string(sim_name(o.report.sim_type)));
      meta.emplace_back("initial_state", "first measured T_z on every node");
      write_trace(o.trace, meta, out / "traces" / (o.report.trace_id + ".csv"));
      reports.push_back(o.report);
    }
  }
  Metadata meta = artifact_metadata(cfg, "evaluation");
  meta.emplace_back("deadband_occupancy",
                    "fraction of samples after a 1-day transient with "
                    "|T_z - setpoint| <= deadband + 0.2");
  write_report(reports, meta, evaluation_path(out), true);
  return {kExitOk, {"evaluated " + std::to_string(cells.size()) + " cells"}};
}

StageResult run_report(const ScenarioConfig &cfg, const fs::path &out) {
  verify_artifact(cfg, evaluation_path(out));
  std::vector<EvalReport> reports = read_report(evaluation_path(out));
  const std::vector<CellSpec> cells = estimation_cells(cfg);
  for (const CellSpec &c : cells)
    for (SimType s : {SimType::Sim1, SimType::Sim2, SimType::Sim3}) {
      const bool found = std::any_of(reports.begin(), reports.end(), [&](const EvalReport &r) {
        return r.method == c.method && r.architecture == c.architecture &&
               r.training_days == c.training_days && r.sim_type == s;
      });
      if (!found)
        throw ConfigError("evaluation.csv lacks " + c.id() + " " +
                          std::string(sim_name(s)) + "; re-run evaluate");
    }
  Metadata meta = artifact_metadata(cfg, "report");
  if (cfg.building == Building::Commercial)
    meta.emplace_back("note", "commercial data come from a 2-state RC surrogate plant");
  write_report(reports, meta, out / "report.csv");
  return {kExitOk, {"wrote " + (out / "report.csv").string()}};
}

int run_command(const std::vector<std::string> &args, std::ostream &out,
                std::ostream &err) {
  CLI::App app{"Grey-box and regression thermal model identification", "thermident"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  const std::pair<const char *, const char *> stages[] = {
      {"generate", "simulate the season and write dataset.csv"},
      {"estimate", "fit every configured cell to params/"},
      {"evaluate", "run Sim1/Sim2/Sim3 on the test week"},
      {"report", "collect evaluation rows into report.csv"},
  };
  for (const auto &[name, help] : stages) {
    CLI::App *sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "scenario config file")->required();
    sub->add_option("--out", out_dir, "artifact directory");
    sub->add_option("--seed", seed, "override the config seed");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitConfigError;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    ScenarioConfig cfg = load_config(config_path);
    if (seed)
      cfg.set_seed(*seed);
    const fs::path dir(out_dir);
    StageResult res;
    if (command == "generate")
      res = run_generate(cfg, dir);
    else if (command == "estimate")
      res = run_estimate(cfg, dir);
    else if (command == "evaluate")
      res = run_evaluate(cfg, dir);
    else
      res = run_report(cfg, dir);
    for (const auto &m : res.messages)
      (res.exit_code == kExitOk ? out : err) << m << '\n';
    return res.exit_code;
  } catch (const ConfigError &e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace thermident

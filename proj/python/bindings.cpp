// SPDX-License-Identifier: Apache-2.0

#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "thermident/config.hpp"
#include "thermident/csv_io.hpp"
#include "thermident/errors.hpp"
#include "thermident/estimation.hpp"
#include "thermident/evaluation.hpp"
#include "thermident/grid_edge.hpp"
#include "thermident/pipeline.hpp"
#include "thermident/plant_sim.hpp"
#include "thermident/regression.hpp"

namespace py = pybind11;
using namespace thermident;

namespace {

py::dict params_dict(const RcTopology &topo, const RcParameters &p) {
  py::dict d;
  for (const ParamRef &ref : topo.present_params()) d[py::str(param_label(ref))] = p.get(ref);
  return d;
}

RcParameters params_from(const RcTopology &topo, const py::dict &values) {
  RcParameters p = RcParameters::zeros(topo);
  for (const auto &[k, v] : values) p.set(parse_param_label(k.cast<std::string>()), v.cast<double>());
  validate(topo, p);
  return p;
}

py::dict report_dict(const EvalReport &r) {
  py::dict d;
  d["method"] = r.method;
  d["architecture"] = r.architecture;
  d["sim_type"] = std::string(sim_name(r.sim_type));
  d["training_days"] = r.training_days;
  d["average_accuracy"] = r.average_accuracy;
  d["deadband_occupancy"] = r.deadband_occupancy;
  d["divergent"] = r.divergent;
  return d;
}

py::dict outcome_dict(const SimOutcome &o) {
  py::dict d = report_dict(o.report);
  d["y_ref"] = o.trace.y_ref;
  d["y_hat"] = o.trace.y_hat;
  d["q_hvac"] = o.trace.q_hvac;
  std::vector<double> p_total, q_reactive;
  for (const PowerSample &s : o.trace.power) {
    p_total.push_back(s.p_total);
    q_reactive.push_back(s.q_reactive);
  }
  d["p_total"] = p_total;
  d["q_reactive"] = q_reactive;
  return d;
}

py::dict model_dict(const FittedModel &model) {
  if (const auto *rc = std::get_if<RcModel>(&model)) return params_dict(rc->topology, rc->params);
  const auto &als = std::get<AlmonModel>(model);
  py::dict d;
  d["alpha0"] = als.alpha0;
  py::dict zeta;
  for (size_t b = 0; b < als.specs.size(); ++b)
    zeta[py::str(std::string(regressor_name(als.specs[b].regressor)))] = als.zeta[b];
  d["zeta"] = zeta;
  return d;
}

SimOutcome run_sim(const ScenarioConfig &cfg, const FittedModel &model, const Dataset &data,
                   const std::string &sim) {
  switch (parse_sim_type(sim)) {
  case SimType::Sim1:
    return run_sim1(model, data, std::nullopt, cfg.power);
  case SimType::Sim2:
    return run_sim2(model, data, std::nullopt, cfg.power);
  case SimType::Sim3:
    break;
  }
  Sim3Options opts;
  opts.thermostat = cfg.evaluation_thermostat();
  opts.power = cfg.power;
  opts.transient_samples = data.samples_per_day();
  return run_sim3(model, data, opts);
}

}  // namespace

PYBIND11_MODULE(_thermident, m) {
  m.doc() = "RC and Almon-lag thermal model identification";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", error.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", error.ptr());
  py::register_exception<DataFormatError>(m, "DataFormatError", error.ptr());
  py::register_exception<RankDeficientError>(m, "RankDeficientError", error.ptr());

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def_readonly("name", &ScenarioConfig::name)
      .def_property_readonly("building",
                             [](const ScenarioConfig &c) { return std::string(building_name(c.building)); })
      .def_readonly("season_days", &ScenarioConfig::season_days)
      .def_readonly("training_end_day", &ScenarioConfig::training_end_day)
      .def_readonly("windows", &ScenarioConfig::windows)
      .def_readonly("methods", &ScenarioConfig::methods)
      .def_readonly("seed", &ScenarioConfig::seed)
      .def_property_readonly("t_s", &ScenarioConfig::t_s)
      .def("set_seed", &ScenarioConfig::set_seed)
      .def("canonical_text", [](const ScenarioConfig &c) { return canonical_text(c); })
      .def("hash", [](const ScenarioConfig &c) { return config_hash(c); });

  m.def("parse_config", [](const std::string &text) { return parse_config(text); });
  m.def("load_config", &load_config);

  py::class_<Dataset>(m, "Dataset")
      .def_readonly("t_s", &Dataset::t_s)
      .def_readonly("start_epoch", &Dataset::start_epoch)
      .def_readonly("t_z", &Dataset::t_z)
      .def_readonly("q_hvac", &Dataset::q_hvac)
      .def_readonly("p_c", &Dataset::p_c)
      .def_readonly("p_h", &Dataset::p_h)
      .def_readonly("t_am", &Dataset::t_am)
      .def_readonly("q_int", &Dataset::q_int)
      .def_readonly("q_solar", &Dataset::q_solar)
      .def_readonly("metadata", &Dataset::metadata)
      .def("__len__", &Dataset::size)
      .def_property_readonly("samples_per_day", &Dataset::samples_per_day)
      .def("days", &Dataset::days, py::arg("first_day"), py::arg("n_days"))
      .def("slice", &Dataset::slice, py::arg("begin"), py::arg("count"));

  m.def("read_dataset", py::overload_cast<const std::filesystem::path &>(&read_dataset));
  m.def("write_dataset",
        py::overload_cast<const Dataset &, const std::filesystem::path &>(&write_dataset));

  m.def("generate_scenario", &generate_scenario);
  m.def("training_window", [](const ScenarioConfig &cfg, const Dataset &season,
                              const std::string &method, const std::string &arch, int days) {
    return training_window(cfg, season, {method, arch, days});
  });
  m.def("test_window", &test_window);

  m.def("truth_params", [](const ScenarioConfig &cfg) {
    const TruthPlant plant = cfg.truth_plant();
    return params_dict(plant.topology, plant.params);
  });

  m.def(
      "estimate",
      [](const std::string &method, const Dataset &data, const std::string &architecture,
         double q, double r, double p0, int max_iters, int multistart, std::uint64_t seed) {
        const RcTopology topo = RcTopology::preset(parse_preset(architecture));
        OptimizerConfig opt;
        opt.max_iters = max_iters;
        opt.multistart_count = multistart;
        opt.rng_seed = seed;
        const EstimationResult res =
            estimate(parse_rc_method(method), data, topo,
                     NoiseHyperParams::defaults(topo.state_dim(), data.t_z(0), q, r, p0), opt);
        py::dict d;
        d["params"] = params_dict(topo, res.theta_hat);
        d["x0"] = res.x0_hat;
        d["objective"] = res.objective;
        d["iterations"] = res.iterations;
        d["converged"] = res.converged;
        return d;
      },
      py::arg("method"), py::arg("data"), py::arg("architecture"), py::arg("q") = 1e-4,
      py::arg("r") = 1e-2, py::arg("p0") = 1.0, py::arg("max_iters") = 500,
      py::arg("multistart") = 3, py::arg("seed") = 1);

  m.def(
      "objective",
      [](const std::string &method, const Dataset &data, const std::string &architecture,
         const py::dict &params, double q, double r, double p0) {
        const RcTopology topo = RcTopology::preset(parse_preset(architecture));
        const RcParameters theta = params_from(topo, params);
        const NoiseHyperParams noise =
            NoiseHyperParams::defaults(topo.state_dim(), data.t_z(0), q, r, p0);
        switch (parse_rc_method(method)) {
        case RcMethod::NLS:
          return nls_objective(theta, noise.x0_prior, data, topo);
        case RcMethod::MLE:
          return mle_objective(theta, data, noise, topo);
        case RcMethod::BE:
          break;
        }
        return be_concentrated_objective(theta, data, noise, topo);
      },
      py::arg("method"), py::arg("data"), py::arg("architecture"), py::arg("params"),
      py::arg("q") = 1e-4, py::arg("r") = 1e-2, py::arg("p0") = 1.0);

  py::class_<CellFit>(m, "CellFit")
      .def_property_readonly("method", [](const CellFit &f) { return f.cell.method; })
      .def_property_readonly("architecture", [](const CellFit &f) { return f.cell.architecture; })
      .def_property_readonly("training_days", [](const CellFit &f) { return f.cell.training_days; })
      .def_property_readonly("id", [](const CellFit &f) { return f.cell.id(); })
      .def_readonly("converged", &CellFit::converged)
      .def_readonly("objective", &CellFit::objective)
      .def_readonly("iterations", &CellFit::iterations)
      .def_property_readonly("params", [](const CellFit &f) { return model_dict(f.model); });

  m.def("fit_cell",
        [](const ScenarioConfig &cfg, const Dataset &season, const std::string &method,
           const std::string &arch, int days) { return fit_cell(cfg, season, {method, arch, days}); },
        py::arg("cfg"), py::arg("season"), py::arg("method"), py::arg("architecture"),
        py::arg("training_days"));
  m.def("evaluate_cell", [](const ScenarioConfig &cfg, const Dataset &season, const CellFit &fit) {
    py::list out;
    for (const SimOutcome &o : evaluate_cell(cfg, season, fit)) out.append(report_dict(o.report));
    return out;
  });
  m.def(
      "simulate",
      [](const ScenarioConfig &cfg, const CellFit &fit, const Dataset &data, const std::string &sim) {
        return outcome_dict(run_sim(cfg, fit.model, data, sim));
      },
      py::arg("cfg"), py::arg("fit"), py::arg("data"), py::arg("sim"));

  m.def("average_accuracy", [](const Eigen::VectorXd &y, const Eigen::VectorXd &y_hat) {
    return average_accuracy(y, y_hat);
  });
  m.def("degree_days", [](double t_am) {
    const DegreeDays d = degree_days(t_am);
    return py::make_tuple(d.cooling, d.heating);
  });
  m.def("almon_basis", &almon_basis, py::arg("start_lag"), py::arg("end_lag"),
        py::arg("poly_order"));
  m.def(
      "power_sample",
      [](double q_hvac, double p_other, double pf, double cop) {
        const PowerSample s = power_sample(q_hvac, p_other, pf, PowerParams{cop, p_other, pf});
        py::dict d;
        d["p_hvac"] = s.p_hvac;
        d["p_total"] = s.p_total;
        d["q_reactive"] = s.q_reactive;
        return d;
      },
      py::arg("q_hvac"), py::arg("p_other") = 0.0, py::arg("power_factor") = 1.0,
      py::arg("cop") = 3.0);

  m.def("run_command", [](const std::vector<std::string> &args) {
    std::ostringstream out, err;
    int code;
    {
      py::gil_scoped_release release;
      code = run_command(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
  });
}

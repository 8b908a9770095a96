// SPDX-License-Identifier: Apache-2.0

#include "thermident/evaluation.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "thermident/errors.hpp"

namespace thermident {

std::string_view sim_name(SimType s) {
  switch (s) {
  case SimType::Sim1:
    return "Sim1";
  case SimType::Sim2:
    return "Sim2";
  case SimType::Sim3:
    return "Sim3";
  }
  return "Sim1";
}

SimType parse_sim_type(std::string_view name) {
  for (SimType s : {SimType::Sim1, SimType::Sim2, SimType::Sim3})
    if (sim_name(s) == name)
      return s;
  throw InvalidArgument("unknown simulation type '" + std::string(name) + "'");
}

double average_accuracy(const Eigen::Ref<const Eigen::VectorXd> &y,
                        const Eigen::Ref<const Eigen::VectorXd> &y_hat) {
  if (y.size() != y_hat.size() || y.size() == 0)
    throw InvalidArgument("accuracy needs equal, nonzero-length series");
  double sum = 0.0;
  for (Eigen::Index k = 0; k < y.size(); ++k) {
    if (y(k) == 0.0)
      throw MetricUndefined("reference sample " + std::to_string(k) +
                            " is zero; percentage error undefined");
    sum += std::abs(y(k) - y_hat(k)) / std::abs(y(k));
  }
  return 100.0 - 100.0 * sum / static_cast<double>(y.size());
}

std::string architecture_name(const FittedModel &model) {
  if (const auto *rc = std::get_if<RcModel>(&model))
    return rc->topology.name();
  return std::get<AlmonModel>(model).preset;
}

namespace {
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

  SimTrace empty_trace(const Dataset &data) {
    SimTrace t;
    t.t_s = data.t_s;
    t.start_epoch = data.start_epoch;
    t.y_ref = data.t_z;
    t.y_hat = Eigen::VectorXd::Constant(data.size(), kNaN);
    t.q_hvac = data.q_hvac;
    return t;
  }

  void fill_power(SimTrace &t, const PowerParams &p) {
    t.power.clear();
    t.power.reserve(t.q_hvac.size());
    for (Eigen::Index k = 0; k < t.q_hvac.size(); ++k)
      t.power.push_back(power_sample(t.q_hvac(k), p.p_other, p.power_factor, p));
  }

  // Accuracy over indices where both reference and prediction exist.
  double scored_accuracy(const SimTrace &t) {
    std::vector<double> ref, hat;
    for (Eigen::Index k = 0; k < t.y_hat.size(); ++k) {
      if (std::isnan(t.y_hat(k)) || std::isnan(t.y_ref(k)))
        continue;
      ref.push_back(t.y_ref(k));
      hat.push_back(t.y_hat(k));
    }
    return average_accuracy(
        Eigen::Map<const Eigen::VectorXd>(ref.data(), static_cast<Eigen::Index>(ref.size())),
        Eigen::Map<const Eigen::VectorXd>(hat.data(), static_cast<Eigen::Index>(hat.size())));
  }

  bool diverged(double v) { return !(std::abs(v) <= kDivergenceLimit); }

  // After a divergence the remaining predictions hold the clamped last value
  // so the accuracy still reflects the failure.
  void hold_after(Eigen::VectorXd &y_hat, Eigen::Index from, double v) {
    const double held = std::isfinite(v) ? std::copysign(std::min(std::abs(v), 1e3), v) : 1e3;
    for (Eigen::Index k = from; k < y_hat.size(); ++k)
      y_hat(k) = held;
  }

  ThermalState initial_state(const RcModel &m, const Dataset &data,
                             const std::optional<ThermalState> &x0) {
    if (x0) {
      if (x0->size() != m.topology.state_dim())
        throw InvalidArgument("initial state dimension does not match model");
      return *x0;
    }
    return ThermalState::Constant(m.topology.state_dim(), data.t_z(0));
  }

  EvalReport base_report(const FittedModel &model, SimType s) {
    EvalReport r;
    r.architecture = architecture_name(model);
    r.sim_type = s;
    return r;
  }

  void require_len(const Dataset &data, Eigen::Index n) {
    if (data.size() < n)
      throw InvalidArgument("dataset has " + std::to_string(data.size()) +
                            " samples; at least " + std::to_string(n) +
                            " required");
  }
}  // namespace

SimOutcome run_sim1(const FittedModel &model, const Dataset &data,
                    const std::optional<ThermalState> &x0,
                    const PowerParams &power) {
  SimOutcome out{empty_trace(data), base_report(model, SimType::Sim1)};
  SimTrace &t = out.trace;

  if (const auto *rc = std::get_if<RcModel>(&model)) {
    require_len(data, 2);
    const DiscreteStateSpace dss = discretize(rc->topology, rc->params, data.t_s);
    const DisturbanceSeq w = data.disturbances();
    ThermalState x = initial_state(*rc, data, x0);
    for (Eigen::Index k = 0; k + 1 < data.size(); ++k) {
      x(0) = data.t_z(k);
      x = (dss.ad * x + dss.bd * data.q_hvac(k) + dss.dd * w.col(k)).eval();
      t.y_hat(k + 1) = x(0);
      if (diverged(x(0))) {
        out.report.divergent = true;
        hold_after(t.y_hat, k + 1, x(0));
        break;
      }
    }
  } else {
    const auto &als = std::get<AlmonModel>(model);
    require_len(data, als.burn_in() + 2);
    const Eigen::VectorXd pred =
        predict_one_step(als, RegressorSeries::from_dataset(data));
    t.y_hat.tail(pred.size()) = pred;
    for (Eigen::Index k = 0; k < pred.size(); ++k)
      if (diverged(pred(k)))
        out.report.divergent = true;
  }
  fill_power(t, power);
  out.report.average_accuracy = scored_accuracy(t);
  return out;
}

SimOutcome run_sim2(const FittedModel &model, const Dataset &data,
                    const std::optional<ThermalState> &x0,
                    const PowerParams &power) {
  SimOutcome out{empty_trace(data), base_report(model, SimType::Sim2)};
  SimTrace &t = out.trace;

  if (const auto *rc = std::get_if<RcModel>(&model)) {
    require_len(data, 2);
    const DiscreteStateSpace dss = discretize(rc->topology, rc->params, data.t_s);
    const DisturbanceSeq w = data.disturbances();
    ThermalState x = initial_state(*rc, data, x0);
    for (Eigen::Index k = 0; k + 1 < data.size(); ++k) {
      x = (dss.ad * x + dss.bd * data.q_hvac(k) + dss.dd * w.col(k)).eval();
      t.y_hat(k + 1) = x(0);
      if (diverged(x(0))) {
        out.report.divergent = true;
        hold_after(t.y_hat, k + 1, x(0));
        break;
      }
    }
  } else {
    const auto &als = std::get<AlmonModel>(model);
    const Eigen::Index h = als.burn_in() + 1;
    require_len(data, h + 1);
    const Eigen::VectorXd traj = simulate_regression(
        als, data.t_z.head(h), data.p_c, data.p_h, data.t_am);
    for (Eigen::Index k = h; k < data.size(); ++k) {
      t.y_hat(k) = traj(k);
      if (diverged(traj(k))) {
        out.report.divergent = true;
        hold_after(t.y_hat, k, traj(k));
        break;
      }
    }
  }
  fill_power(t, power);
  out.report.average_accuracy = scored_accuracy(t);
  return out;
}

SimOutcome run_sim3(const FittedModel &model, const Dataset &conditions,
                    const Sim3Options &opts,
                    const std::optional<ThermalState> &x0) {
  opts.thermostat.validate();
  opts.power.validate();
  SimOutcome out{empty_trace(conditions), base_report(model, SimType::Sim3)};
  SimTrace &t = out.trace;
  t.y_ref.setConstant(kNaN);
  t.band_lo = opts.thermostat.setpoint - opts.thermostat.deadband;
  t.band_hi = opts.thermostat.setpoint + opts.thermostat.deadband;
  const Eigen::Index n = conditions.size();
  ThermostatConfig policy = opts.thermostat;
  policy.mode = ThermostatMode::Off;

  if (const auto *rc = std::get_if<RcModel>(&model)) {
    require_len(conditions, 1);
    const DiscreteStateSpace dss =
        discretize(rc->topology, rc->params, conditions.t_s);
    ThermalState x = initial_state(*rc, conditions, x0);
    for (Eigen::Index k = 0; k < n; ++k) {
      const double y = x(0);
      t.y_hat(k) = y;
      if (diverged(y)) {
        out.report.divergent = true;
        hold_after(t.y_hat, k, y);
        t.q_hvac.tail(n - k).setZero();
        break;
      }
      const ThermostatDecision d = thermostat_step(y, policy);
      policy.mode = d.mode;
      t.q_hvac(k) = d.q_hvac;
      const DisturbanceSample w{conditions.t_am(k), conditions.q_int(k),
                                conditions.q_solar(k)};
      x = grid_edge_step(x, d.q_hvac, w, dss, opts.power).next;
    }
  } else {
    const auto &als = std::get<AlmonModel>(model);
    const Eigen::Index h = als.burn_in() + 1;
    require_len(conditions, h + 1);
    RegressorSeries s = RegressorSeries::from_dataset(conditions);
    s.t_z.tail(n - h).setConstant(kNaN);
    for (Eigen::Index k = h - 1; k < n; ++k) {
      const double y = s.t_z(k);
      if (diverged(y)) {
        out.report.divergent = true;
        t.y_hat.head(k) = s.t_z.head(k);
        hold_after(t.y_hat, k, y);
        t.q_hvac.tail(n - k).setZero();
        break;
      }
      const ThermostatDecision d = thermostat_step(y, policy);
      policy.mode = d.mode;
      t.q_hvac(k) = d.q_hvac;
      s.p_c(k) = d.q_hvac < 0.0 ? -d.q_hvac / opts.power.cop : 0.0;
      s.p_h(k) = d.q_hvac > 0.0 ? d.q_hvac / opts.power.cop : 0.0;
      if (k + 1 < n)
        s.t_z(k + 1) = als.predict(s, k);
    }
    if (!out.report.divergent)
      t.y_hat = s.t_z;
  }
  fill_power(t, opts.power);

  const Eigen::Index first = std::min<Eigen::Index>(opts.transient_samples, n - 1);
  const double limit = opts.thermostat.deadband + opts.margin;
  Eigen::Index inside = 0;
  for (Eigen::Index k = first; k < n; ++k)
    if (std::abs(t.y_hat(k) - opts.thermostat.setpoint) <= limit)
      ++inside;
  out.report.deadband_occupancy =
      static_cast<double>(inside) / static_cast<double>(n - first);
  return out;
}

}  // namespace thermident

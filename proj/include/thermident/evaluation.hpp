// SPDX-License-Identifier: Apache-2.0
//
// The three simulation regimes used to score a fitted model:
//   Sim1  one-step prediction from measured data,
//   Sim2  free-running rollout on recorded inputs,
//   Sim3  closed loop under a thermostat policy the data never saw.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "thermident/dataset.hpp"
#include "thermident/grid_edge.hpp"
#include "thermident/plant_sim.hpp"
#include "thermident/regression.hpp"
#include "thermident/thermal_core.hpp"

namespace thermident {

enum class SimType { Sim1, Sim2, Sim3 };

std::string_view sim_name(SimType s);
SimType parse_sim_type(std::string_view name);

// Rollouts abort once |T_z| exceeds this and are flagged divergent.
inline constexpr double kDivergenceLimit = 100.0;
// Sim3 counts a sample as in band when |T_z - setpoint| <= deadband + margin.
inline constexpr double kOccupancyMargin = 0.2;

struct EvalReport {
  std::string method;
  std::string architecture;
  SimType sim_type = SimType::Sim1;
  int training_days = 0;
  std::optional<double> average_accuracy;    // Sim1 / Sim2
  std::optional<double> deadband_occupancy;  // Sim3
  std::string trace_id;
  bool divergent = false;
};

// 100 - MAPE in percent. Throws MetricUndefined on a zero reference sample
// and InvalidArgument on empty or mismatched inputs.
double average_accuracy(const Eigen::Ref<const Eigen::VectorXd> &y,
                        const Eigen::Ref<const Eigen::VectorXd> &y_hat);

struct RcModel {
  RcTopology topology;
  RcParameters params;
};

using FittedModel = std::variant<RcModel, AlmonModel>;

std::string architecture_name(const FittedModel &model);

struct SimTrace {
  double t_s = 0.0;
  std::int64_t start_epoch = 0;
  Eigen::VectorXd y_ref;  // NaN where no reference exists
  Eigen::VectorXd y_hat;  // NaN where the model made no prediction
  Eigen::VectorXd q_hvac;
  std::vector<PowerSample> power;
  std::optional<double> band_lo, band_hi;  // Sim3 comfort band
};

struct SimOutcome {
  SimTrace trace;
  EvalReport report;
};

// RC: hidden states roll forward while the zone state is reset to each
// measurement. ALS: predictions from measured lags. x0 defaults to the
// first measurement on every node.
SimOutcome run_sim1(const FittedModel &model, const Dataset &data,
                    const std::optional<ThermalState> &x0 = std::nullopt,
                    const PowerParams &power = {});

// Free rollout on the recorded q_hvac / P_c / P_h and disturbances. ALS
// seeds its T_z lags with the first burn_in + 1 measurements.
SimOutcome run_sim2(const FittedModel &model, const Dataset &data,
                    const std::optional<ThermalState> &x0 = std::nullopt,
                    const PowerParams &power = {});

struct Sim3Options {
  ThermostatConfig thermostat;
  PowerParams power;
  Eigen::Index transient_samples = 0;  // excluded from the occupancy score
  double margin = kOccupancyMargin;
};

// Closed loop of the model under `opts.thermostat`. `conditions` supplies
// the disturbances (and, for ALS, the measured history window); its recorded
// HVAC inputs are otherwise ignored.
SimOutcome run_sim3(const FittedModel &model, const Dataset &conditions,
                    const Sim3Options &opts,
                    const std::optional<ThermalState> &x0 = std::nullopt);

}  // namespace thermident

// SPDX-License-Identifier: Apache-2.0
//
// Synthetic truth data: weather disturbances, a hysteresis thermostat and
// closed-loop rollouts of fixed "truth" RC plants.

#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "thermident/dataset.hpp"
#include "thermident/thermal_core.hpp"

namespace thermident {

struct WeatherConfig {
  int n_days = 7;
  double t_s = 600.0;
  double ambient_mean = 25.0;      // °C
  double ambient_amplitude = 6.0;  // °C, diurnal; minimum 03:00, peak 15:00
  double solar_peak = 3000.0;      // W at noon
  double internal_base = 300.0;    // W
  double internal_peak = 1000.0;   // W during occupancy hours
  int occupancy_start_hour = 17;
  int occupancy_end_hour = 23;
  double noise_std = 0.0;          // °C, stationary std of the AR(1) noise
  double noise_corr_hours = 6.0;   // AR(1) correlation time
  std::uint64_t rng_seed = 1;

  void validate() const;
  Eigen::Index samples() const;
};

// 3 x (n_days * 86400 / t_s) sequence of [T_am, Q_int, Q_solar].
DisturbanceSeq gen_weather(const WeatherConfig &cfg);

enum class ThermostatMode { Off, Cooling, Heating };

struct ThermostatConfig {
  double setpoint = 22.0;  // °C
  double deadband = 1.0;   // °C, half-width of the hysteresis band
  double cool_capacity = 0.0;  // W
  double heat_capacity = 0.0;  // W
  ThermostatMode mode = ThermostatMode::Off;

  void validate() const;
};

struct ThermostatDecision {
  ThermostatMode mode = ThermostatMode::Off;
  double q_hvac = 0.0;  // W, negative while cooling
};

// Cooling engages above setpoint + deadband and releases below
// setpoint - deadband; heating mirrors it when heat_capacity > 0.
ThermostatDecision thermostat_step(double t_z, const ThermostatConfig &cfg);

struct TruthPlant {
  std::string name;
  RcTopology topology;
  RcParameters params;
  double cop = 3.0;
  ThermalState x0;  // empty: start every node at the thermostat setpoint
};

// 4-state house (3 hidden nodes, gains on walls) at 10-minute resolution.
TruthPlant house_truth();
// 2-state commercial surrogate at 5-minute resolution.
TruthPlant commercial_truth();
// Plants that lie inside a preset architecture, for recovery experiments.
TruthPlant in_family_truth(Preset preset);

// Cooling-only thermostat sized for house_truth().
ThermostatConfig house_thermostat(double setpoint);
ThermostatConfig commercial_thermostat(double setpoint);

// Closed loop: the thermostat sees the measured y(k), its command is applied
// over [k, k+1). Samples = weather columns.
Dataset generate_dataset(const TruthPlant &plant, const ThermostatConfig &thermo,
                         const DisturbanceSeq &weather, double meas_noise_std,
                         std::uint64_t rng_seed, double t_s,
                         std::int64_t start_epoch = scenario_epoch());

// Open-loop replay of the inputs recorded in `inputs` through a stochastic
// plant: x(k+1) = Euler step + w_n, w_n ~ N(0, q_proc); y = T_z + v,
// v ~ N(0, r_meas).
Dataset simulate_with_noise(const RcTopology &topology,
                            const RcParameters &params, const ThermalState &x0,
                            const Dataset &inputs,
                            const Eigen::MatrixXd &q_proc, double r_meas,
                            std::uint64_t rng_seed);

}  // namespace thermident

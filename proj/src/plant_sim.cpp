// SPDX-License-Identifier: Apache-2.0

#include "thermident/plant_sim.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "thermident/errors.hpp"

namespace thermident {

void WeatherConfig::validate() const {
  if (n_days < 1)
    throw ConfigError("weather needs at least one day");
  if (!(t_s > 0.0) || std::fmod(86400.0, t_s) != 0.0)
    throw ConfigError("weather t_s must divide one day");
  if (ambient_amplitude < 0.0 || solar_peak < 0.0 || internal_base < 0.0 ||
      internal_peak < 0.0 || noise_std < 0.0 || !(noise_corr_hours > 0.0))
    throw ConfigError("weather amplitudes must be non-negative");
  if (occupancy_start_hour < 0 || occupancy_end_hour > 24 ||
      occupancy_start_hour > occupancy_end_hour)
    throw ConfigError("occupancy hours must satisfy 0 <= start <= end <= 24");
}

Eigen::Index WeatherConfig::samples() const {
  return static_cast<Eigen::Index>(n_days) *
         static_cast<Eigen::Index>(std::llround(86400.0 / t_s));
}

DisturbanceSeq gen_weather(const WeatherConfig &cfg) {
  cfg.validate();
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const Eigen::Index n = cfg.samples();
  DisturbanceSeq w(3, n);

  std::mt19937_64 rng(cfg.rng_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double phi = std::exp(-cfg.t_s / (cfg.noise_corr_hours * 3600.0));
  const double innovation = std::sqrt(1.0 - phi * phi);
  double noise = cfg.noise_std * normal(rng);

  for (Eigen::Index k = 0; k < n; ++k) {
    const double seconds = std::fmod(k * cfg.t_s, 86400.0);
    const double hour = seconds / 3600.0;
    if (k > 0)
      noise = phi * noise + innovation * cfg.noise_std * normal(rng);
    const double ambient =
        cfg.ambient_mean +
        cfg.ambient_amplitude * std::sin(two_pi * (hour - 9.0) / 24.0);
    const double solar =
        cfg.solar_peak * std::max(0.0, std::sin(two_pi * (hour - 6.0) / 24.0));
    const bool occupied =
        hour >= cfg.occupancy_start_hour && hour < cfg.occupancy_end_hour;
    w(0, k) = ambient + (cfg.noise_std > 0.0 ? noise : 0.0);
    w(1, k) = occupied ? cfg.internal_peak : cfg.internal_base;
    w(2, k) = solar;
  }
  return w;
}

void ThermostatConfig::validate() const {
  if (!(deadband > 0.0))
    throw ConfigError("thermostat deadband must be positive");
  if (!std::isfinite(setpoint) || !std::isfinite(cool_capacity) ||
      !std::isfinite(heat_capacity) || cool_capacity < 0.0 ||
      heat_capacity < 0.0)
    throw ConfigError("thermostat capacities must be finite and >= 0");
}

ThermostatDecision thermostat_step(double t_z, const ThermostatConfig &cfg) {
  const double upper = cfg.setpoint + cfg.deadband;
  const double lower = cfg.setpoint - cfg.deadband;
  ThermostatMode mode = cfg.mode;
  switch (mode) {
  case ThermostatMode::Off:
    if (t_z > upper && cfg.cool_capacity > 0.0)
      mode = ThermostatMode::Cooling;
    else if (t_z < lower && cfg.heat_capacity > 0.0)
      mode = ThermostatMode::Heating;
    break;
  case ThermostatMode::Cooling:
    if (t_z < lower)
      mode = ThermostatMode::Off;
    break;
  case ThermostatMode::Heating:
    if (t_z > upper)
      mode = ThermostatMode::Off;
    break;
  }
  double q = 0.0;
  if (mode == ThermostatMode::Cooling)
    q = -cfg.cool_capacity;
  else if (mode == ThermostatMode::Heating)
    q = cfg.heat_capacity;
  return {mode, q};
}

TruthPlant house_truth() {
  TruthPlant p;
  p.name = "house-4state";
  p.topology = RcTopology::custom(3, {{0, 1}}, true);
  p.params = RcParameters::zeros(p.topology);
  // Zone air and furnishings.
  p.params.r_za = 0.02;
  p.params.c_z = 8e6;
  // 0: exterior walls, 1: roof/attic, 2: interior mass and slab.
  p.params.r_zw << 0.004, 0.01, 0.0025;
  p.params.r_wa << 0.008, 0.006, 0.05;
  p.params.c_w << 1.2e7, 4e6, 2.5e7;
  p.params.r_w(0, 1) = p.params.r_w(1, 0) = 0.05;
  p.params.a_z = 0.9;
  p.params.b_z = 0.6;
  p.params.b_w << 0.1, 0.0, 0.3;
  p.params.d_z = 0.25;
  p.params.d_w << 0.35, 0.25, 0.15;
  p.cop = 3.0;
  return p;
}

TruthPlant commercial_truth() {
  TruthPlant p;
  p.name = "commercial-2state";
  p.topology = RcTopology::custom(1, {}, true);
  p.params = RcParameters::zeros(p.topology);
  p.params.r_za = 0.004;
  p.params.c_z = 1e8;
  p.params.r_zw << 0.0008;
  p.params.r_wa << 0.0015;
  p.params.c_w << 3e8;
  p.params.a_z = 0.9;
  p.params.b_z = 0.7;
  p.params.b_w << 0.3;
  p.params.d_z = 0.3;
  p.params.d_w << 0.7;
  p.cop = 3.0;
  return p;
}

TruthPlant in_family_truth(Preset preset) {
  TruthPlant p;
  p.name = std::string(preset_name(preset)) + "-truth";
  p.topology = RcTopology::preset(preset);
  p.params = RcParameters::zeros(p.topology);
  p.cop = 3.0;
  switch (preset) {
  case Preset::R1:
    p.params.r_za = 0.006;
    p.params.c_z = 1.5e7;
    p.params.a_z = 0.85;
    p.params.b_z = 0.6;
    p.params.d_z = 0.3;
    break;
  case Preset::R2:
    p.params.r_za = 0.02;
    p.params.r_zw << 0.003;
    p.params.r_wa << 0.006;
    p.params.c_z = 6e6;
    p.params.c_w << 2e7;
    p.params.a_z = 0.9;
    p.params.d_z = 0.35;
    break;
  case Preset::R4:
    p.params.r_za = 0.02;
    p.params.r_zw << 0.004, 0.01, 0.0025;
    p.params.r_wa << 0.008, 0.006, 0.05;
    p.params.c_z = 8e6;
    p.params.c_w << 1.2e7, 4e6, 2.5e7;
    p.params.a_z = 0.9;
    break;
  case Preset::C1:
    p.params.r_za = 0.002;
    p.params.c_z = 5e7;
    p.params.a_z = 0.8;
    break;
  case Preset::C2:
    p.params.r_za = 0.004;
    p.params.r_zw << 0.0008;
    p.params.r_wa << 0.0015;
    p.params.c_z = 1e8;
    p.params.c_w << 3e8;
    p.params.a_z = 0.9;
    break;
  case Preset::Custom:
    return house_truth();
  }
  return p;
}

ThermostatConfig house_thermostat(double setpoint) {
  ThermostatConfig t;
  t.setpoint = setpoint;
  t.deadband = 1.0;
  t.cool_capacity = 7000.0;
  t.heat_capacity = 0.0;
  return t;
}

ThermostatConfig commercial_thermostat(double setpoint) {
  ThermostatConfig t;
  t.setpoint = setpoint;
  t.deadband = 1.0;
  t.cool_capacity = 40000.0;
  t.heat_capacity = 20000.0;
  return t;
}

Dataset generate_dataset(const TruthPlant &plant, const ThermostatConfig &thermo,
                         const DisturbanceSeq &weather, double meas_noise_std,
                         std::uint64_t rng_seed, double t_s,
                         std::int64_t start_epoch) {
  thermo.validate();
  if (weather.cols() < 1)
    throw InvalidArgument("weather sequence is empty");
  if (!(plant.cop > 0.0))
    throw InvalidArgument("plant COP must be positive");
  if (meas_noise_std < 0.0)
    throw InvalidArgument("measurement noise std must be >= 0");

  const DiscreteStateSpace dss = discretize(plant.topology, plant.params, t_s);
  const Eigen::Index n = weather.cols();

  Dataset ds;
  ds.t_s = t_s;
  ds.start_epoch = start_epoch;
  for (Eigen::VectorXd *col : {&ds.t_z, &ds.q_hvac, &ds.p_c, &ds.p_h})
    col->resize(n);
  ds.t_am = weather.row(0).transpose();
  ds.q_int = weather.row(1).transpose();
  ds.q_solar = weather.row(2).transpose();

  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  ThermalState x = plant.x0.size() == dss.state_dim()
                       ? plant.x0
                       : ThermalState::Constant(dss.state_dim(), thermo.setpoint);
  ThermostatConfig policy = thermo;
  Eigen::VectorXd next(x.size());
  for (Eigen::Index k = 0; k < n; ++k) {
    const double y =
        x(0) + (meas_noise_std > 0.0 ? meas_noise_std * normal(rng) : 0.0);
    const ThermostatDecision d = thermostat_step(y, policy);
    policy.mode = d.mode;
    ds.t_z(k) = y;
    ds.q_hvac(k) = d.q_hvac;
    ds.p_c(k) = d.q_hvac < 0.0 ? -d.q_hvac / plant.cop : 0.0;
    ds.p_h(k) = d.q_hvac > 0.0 ? d.q_hvac / plant.cop : 0.0;
    next.noalias() = dss.ad * x;
    next.noalias() += dss.bd * d.q_hvac;
    next.noalias() += dss.dd * weather.col(k);
    x.swap(next);
    if (!x.allFinite())
      throw Error("truth plant rollout became non-finite at sample " +
                  std::to_string(k));
  }
  return ds;
}

Dataset simulate_with_noise(const RcTopology &topology,
                            const RcParameters &params, const ThermalState &x0,
                            const Dataset &inputs,
                            const Eigen::MatrixXd &q_proc, double r_meas,
                            std::uint64_t rng_seed) {
  const DiscreteStateSpace dss = discretize(topology, params, inputs.t_s);
  const int dim = dss.state_dim();
  if (x0.size() != dim || q_proc.rows() != dim || q_proc.cols() != dim)
    throw InvalidArgument("noise simulation dimensions do not match topology");
  if (r_meas < 0.0)
    throw InvalidArgument("measurement variance must be >= 0");

  Eigen::LLT<Eigen::MatrixXd> llt(
      q_proc + 1e-300 * Eigen::MatrixXd::Identity(dim, dim));
  const Eigen::MatrixXd q_chol =
      llt.info() == Eigen::Success ? Eigen::MatrixXd(llt.matrixL())
                                   : Eigen::MatrixXd::Zero(dim, dim);

  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const DisturbanceSeq w = inputs.disturbances();

  Dataset out = inputs;
  ThermalState x = x0;
  Eigen::VectorXd xi(dim);
  for (Eigen::Index k = 0; k < inputs.size(); ++k) {
    out.t_z(k) = x(0) + std::sqrt(r_meas) * normal(rng);
    for (int i = 0; i < dim; ++i)
      xi(i) = normal(rng);
    x = (dss.ad * x + dss.bd * inputs.q_hvac(k) + dss.dd * w.col(k) +
         q_chol * xi)
            .eval();
  }
  return out;
}

}  // namespace thermident

// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include <gtest/gtest.h>

#include "thermident/errors.hpp"
#include "thermident/plant_sim.hpp"

using namespace thermident;

namespace {

WeatherConfig clean_weather(int days = 7) {
  WeatherConfig w;
  w.n_days = days;
  w.ambient_mean = 25;
  w.ambient_amplitude = 5;
  w.noise_std = 0.0;
  return w;
}

double in_band_fraction(const Eigen::VectorXd &y, double sp, double half, Eigen::Index from) {
  Eigen::Index in = 0;
  for (Eigen::Index k = from; k < y.size(); ++k)
    if (std::abs(y(k) - sp) <= half) ++in;
  return static_cast<double>(in) / static_cast<double>(y.size() - from);
}

}  // namespace

TEST(PlantSim, WeatherBoundsAndShape) {
  const DisturbanceSeq w = gen_weather(clean_weather());
  EXPECT_EQ(w.cols(), 1008);
  EXPECT_NEAR(w.row(0).minCoeff(), 20.0, 1e-12);
  EXPECT_NEAR(w.row(0).maxCoeff(), 30.0, 1e-12);
  EXPECT_GE(w.row(1).minCoeff(), 0.0);
  EXPECT_GE(w.row(2).minCoeff(), 0.0);
}

TEST(PlantSim, WeatherDeterministicPerSeed) {
  WeatherConfig c = clean_weather();
  c.noise_std = 1.5;
  c.rng_seed = 77;
  EXPECT_EQ(gen_weather(c), gen_weather(c));
  WeatherConfig other = c;
  other.rng_seed = 78;
  EXPECT_NE(gen_weather(c), gen_weather(other));
}

TEST(PlantSim, NoSunAtMidnight) {
  for (double t_s : {300.0, 600.0}) {
    WeatherConfig c = clean_weather(5);
    c.t_s = t_s;
    const DisturbanceSeq w = gen_weather(c);
    const auto per_day = static_cast<Eigen::Index>(86400 / t_s);
    for (Eigen::Index d = 0; d < 5; ++d) EXPECT_EQ(w(2, d * per_day), 0.0);
  }
}

TEST(PlantSim, WeatherRejectsBadConfig) {
  WeatherConfig c = clean_weather();
  c.n_days = 0;
  EXPECT_THROW(gen_weather(c), ConfigError);
  c = clean_weather();
  c.t_s = 7;
  EXPECT_THROW(gen_weather(c), ConfigError);
}

TEST(PlantSim, ThermostatHysteresis) {
  ThermostatConfig c{22.0, 1.0, 5000.0, 0.0, ThermostatMode::Off};
  ThermostatDecision d = thermostat_step(23.5, c);
  EXPECT_EQ(d.mode, ThermostatMode::Cooling);
  EXPECT_EQ(d.q_hvac, -5000.0);
  c.mode = ThermostatMode::Cooling;
  d = thermostat_step(21.5, c);
  EXPECT_EQ(d.mode, ThermostatMode::Cooling);
  EXPECT_EQ(d.q_hvac, -5000.0);
  d = thermostat_step(20.9, c);
  EXPECT_EQ(d.mode, ThermostatMode::Off);
  EXPECT_EQ(d.q_hvac, 0.0);
  c.mode = ThermostatMode::Off;
  EXPECT_EQ(thermostat_step(22.9, c).mode, ThermostatMode::Off);
  // No heater: cold rooms stay Off.
  EXPECT_EQ(thermostat_step(15.0, c).mode, ThermostatMode::Off);
}

TEST(PlantSim, ThermostatHeatingMirrors) {
  ThermostatConfig c{22.0, 1.0, 5000.0, 4000.0, ThermostatMode::Off};
  ThermostatDecision d = thermostat_step(20.5, c);
  EXPECT_EQ(d.mode, ThermostatMode::Heating);
  EXPECT_EQ(d.q_hvac, 4000.0);
  c.mode = ThermostatMode::Heating;
  EXPECT_EQ(thermostat_step(22.5, c).mode, ThermostatMode::Heating);
  EXPECT_EQ(thermostat_step(23.1, c).mode, ThermostatMode::Off);
}

TEST(PlantSim, DatasetShapeAndExclusiveModes) {
  const TruthPlant plant = commercial_truth();
  WeatherConfig w = clean_weather();
  w.t_s = 300;
  w.ambient_mean = 22;
  w.ambient_amplitude = 9;
  const Dataset d = generate_dataset(plant, commercial_thermostat(22.0), gen_weather(w), 0.05,
                                     3, 300.0);
  EXPECT_EQ(d.size(), 7 * 288);
  EXPECT_EQ(d.samples_per_day(), 288);
  EXPECT_GT(d.p_h.maxCoeff(), 0.0);
  EXPECT_GT(d.p_c.maxCoeff(), 0.0);
  for (Eigen::Index k = 0; k < d.size(); ++k) {
    ASSERT_EQ(d.p_c(k) * d.p_h(k), 0.0);
    ASSERT_DOUBLE_EQ(d.p_c(k) + d.p_h(k), std::abs(d.q_hvac(k)) / plant.cop);
  }
  EXPECT_NO_THROW(d.validate());
}

TEST(PlantSim, HouseWeekNoiseless) {
  const TruthPlant plant = house_truth();
  WeatherConfig w = clean_weather();
  w.noise_std = 1.5;
  const DisturbanceSeq weather = gen_weather(w);
  const Dataset d = generate_dataset(plant, house_thermostat(22.0), weather, 0.0, 1, 600.0);
  EXPECT_EQ(d.size(), 1008);
  EXPECT_EQ(d.p_h, Eigen::VectorXd::Zero(1008));

  // Replaying the recorded commands reproduces y exactly, and every command is
  // what the thermostat emits for the measurement at that sample.
  const DiscreteStateSpace dss = discretize(plant.topology, plant.params, 600.0);
  const SimulationTrace tr =
      simulate(dss, ThermalState::Constant(4, 22.0), d.q_hvac, weather);
  EXPECT_EQ(tr.outputs, d.t_z);
  ThermostatConfig policy = house_thermostat(22.0);
  for (Eigen::Index k = 0; k < d.size(); ++k) {
    const ThermostatDecision dec = thermostat_step(d.t_z(k), policy);
    policy.mode = dec.mode;
    ASSERT_EQ(dec.q_hvac, d.q_hvac(k));
  }
  EXPECT_GE(in_band_fraction(d.t_z, 22.0, 1.2, 144), 0.95);
}

TEST(PlantSim, ReproducibleWithSeeds) {
  const TruthPlant plant = house_truth();
  WeatherConfig w = clean_weather();
  w.noise_std = 1.5;
  const Dataset a = generate_dataset(plant, house_thermostat(23.0), gen_weather(w), 0.05, 9, 600);
  const Dataset b = generate_dataset(plant, house_thermostat(23.0), gen_weather(w), 0.05, 9, 600);
  EXPECT_EQ(a.t_z, b.t_z);
  EXPECT_EQ(a.q_hvac, b.q_hvac);
}

TEST(PlantSim, HouseDutyCycleIsRealistic) {
  const TruthPlant plant = house_truth();
  WeatherConfig w;
  w.n_days = 14;
  w.noise_std = 1.5;
  const Dataset d = generate_dataset(plant, house_thermostat(23.0), gen_weather(w), 0.05, 4, 600);
  const double duty = (d.q_hvac.array() < 0.0).cast<double>().mean();
  EXPECT_GT(duty, 0.2);
  EXPECT_LT(duty, 0.6);
}

TEST(PlantSim, NoisyReplayMatchesNoiselessWhenCovariancesVanish) {
  const TruthPlant plant = in_family_truth(Preset::R2);
  WeatherConfig w = clean_weather(1);
  const Dataset inputs =
      generate_dataset(plant, house_thermostat(23.0), gen_weather(w), 0.0, 2, 600);
  const Dataset replay = simulate_with_noise(plant.topology, plant.params,
                                             ThermalState::Constant(2, 23.0), inputs,
                                             Eigen::MatrixXd::Zero(2, 2), 1e-300, 5);
  EXPECT_LT((replay.t_z - inputs.t_z).cwiseAbs().maxCoeff(), 1e-9);
}

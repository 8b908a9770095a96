// SPDX-License-Identifier: Apache-2.0
//
// Scenario configuration: a flat "key = value" text file with dotted
// section keys. '#' starts a comment. Every key is optional; omitted keys
// take the defaults of the building named by scenario.building.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "thermident/estimation.hpp"
#include "thermident/grid_edge.hpp"
#include "thermident/optimizer.hpp"
#include "thermident/plant_sim.hpp"
#include "thermident/regression.hpp"
#include "thermident/thermal_core.hpp"

namespace thermident {

enum class Building { House, Commercial };

std::string_view building_name(Building b);
Building parse_building(std::string_view name);

// Training windows must be drawn from this set.
inline constexpr int kAllowedWindows[] = {3, 5, 7, 14, 21};
inline constexpr int kTestDays = 7;

struct ScenarioConfig {
  std::string name = "house";
  Building building = Building::House;
  int season_days = 122;       // day 1 is June 1
  int training_end_day = 92;   // last training day (Aug 31)
  int test_days = kTestDays;   // starting the day after training_end_day
  std::vector<int> windows{3, 5, 7, 14, 21};
  // Subset of NLS, BE, MLE, ALS.
  std::vector<std::string> methods{"NLS", "BE", "MLE", "ALS"};
  std::vector<Preset> rc_architectures{Preset::R1, Preset::R2, Preset::R4};
  AlmonPreset als_architecture = AlmonPreset::RA;
  std::uint64_t seed = 2001;

  WeatherConfig weather;
  double measurement_noise_std = 0.05;
  double training_setpoint = 23.0;
  double evaluation_setpoint = 22.0;
  double deadband = 1.0;
  PowerParams power;

  double noise_q = 1e-4;
  double noise_r = 1e-2;
  double noise_p0 = 1.0;
  OptimizerConfig optimizer;

  // Building-specific defaults (t_s, weather shape, thermostat sizing).
  static ScenarioConfig defaults(Building b);

  // Sets the master seed and the weather / optimizer seeds derived from it.
  void set_seed(std::uint64_t s);
  bool has_method(std::string_view m) const;
  double t_s() const { return weather.t_s; }
  // Zero-based day offsets into the generated season.
  int test_first_day() const { return training_end_day; }
  int window_first_day(int window) const { return training_end_day - window; }

  std::uint64_t weather_seed() const { return seed; }
  std::uint64_t measurement_seed() const { return seed + 1; }
  std::uint64_t optimizer_seed() const { return seed + 2; }

  ThermostatConfig training_thermostat() const;
  ThermostatConfig evaluation_thermostat() const;
  TruthPlant truth_plant() const;

  // Throws ConfigError naming the offending key.
  void validate() const;
};

// Parses config text. Unknown or duplicate keys and malformed values throw
// ConfigError with the line number.
ScenarioConfig parse_config(std::string_view text);
ScenarioConfig load_config(const std::filesystem::path &path);

// Every key with its effective value, one per line in a fixed order.
// parse_config(canonical_text(c)) reproduces c.
std::string canonical_text(const ScenarioConfig &cfg);

std::uint64_t fnv1a64(std::string_view bytes);
// Hex FNV-1a of canonical_text(cfg); embedded in every artifact header.
std::string config_hash(const ScenarioConfig &cfg);

}  // namespace thermident

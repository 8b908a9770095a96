// SPDX-License-Identifier: Apache-2.0

#include "thermident/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "thermident/csv_io.hpp"
#include "thermident/errors.hpp"

namespace thermident {

std::string_view building_name(Building b) {
  return b == Building::House ? "house" : "commercial";
}

Building parse_building(std::string_view name) {
  if (name == "house")
    return Building::House;
  if (name == "commercial")
    return Building::Commercial;
  throw ConfigError("unknown building '" + std::string(name) +
                    "' (expected house or commercial)");
}

ScenarioConfig ScenarioConfig::defaults(Building b) {
  ScenarioConfig c;
  c.building = b;
  c.weather.n_days = c.season_days;
  c.weather.noise_std = 1.5;
  c.weather.noise_corr_hours = 6.0;
  if (b == Building::House) {
    c.name = "house";
    c.weather.t_s = 600.0;
    c.weather.ambient_mean = 25.0;
    c.weather.ambient_amplitude = 6.0;
    c.weather.solar_peak = 3000.0;
    c.weather.internal_base = 300.0;
    c.weather.internal_peak = 1000.0;
    c.weather.occupancy_start_hour = 17;
    c.weather.occupancy_end_hour = 23;
    c.rc_architectures = {Preset::R1, Preset::R2, Preset::R4};
    c.als_architecture = AlmonPreset::RA;
    c.power = {3.0, 0.0, 0.95};
  } else {
    c.name = "commercial";
    c.weather.t_s = 300.0;
    c.weather.ambient_mean = 24.0;
    c.weather.ambient_amplitude = 7.0;
    c.weather.solar_peak = 20000.0;
    c.weather.internal_base = 2000.0;
    c.weather.internal_peak = 15000.0;
    c.weather.occupancy_start_hour = 8;
    c.weather.occupancy_end_hour = 18;
    c.rc_architectures = {Preset::C1, Preset::C2};
    c.als_architecture = AlmonPreset::CA;
    c.power = {3.0, 2000.0, 0.9};
    c.noise_q = 1e-6;
  }
  c.set_seed(c.seed);
  return c;
}

void ScenarioConfig::set_seed(std::uint64_t s) {
  seed = s;
  weather.rng_seed = weather_seed();
  optimizer.rng_seed = optimizer_seed();
}

bool ScenarioConfig::has_method(std::string_view m) const {
  return std::find(methods.begin(), methods.end(), m) != methods.end();
}

ThermostatConfig ScenarioConfig::training_thermostat() const {
  ThermostatConfig t = building == Building::House
                           ? house_thermostat(training_setpoint)
                           : commercial_thermostat(training_setpoint);
  t.deadband = deadband;
  return t;
}

ThermostatConfig ScenarioConfig::evaluation_thermostat() const {
  ThermostatConfig t = training_thermostat();
  t.setpoint = evaluation_setpoint;
  return t;
}

TruthPlant ScenarioConfig::truth_plant() const {
  TruthPlant p = building == Building::House ? house_truth() : commercial_truth();
  p.cop = power.cop;
  return p;
}

void ScenarioConfig::validate() const {
  auto fail = [](const std::string &key, const std::string &msg) {
    throw ConfigError(key + ": " + msg);
  };
  if (name.empty())
    fail("scenario.name", "must not be empty");
  if (test_days != kTestDays)
    fail("scenario.test_days", "the test window is fixed at 7 days");
  if (season_days < 1)
    fail("scenario.season_days", "must be >= 1");
  if (training_end_day < 1 || training_end_day + test_days > season_days)
    fail("scenario.training_end_day",
         "training and the 7-day test window must fit inside the season");
  if (windows.empty())
    fail("scenario.windows", "at least one training window is required");
  for (int w : windows) {
    if (std::find(std::begin(kAllowedWindows), std::end(kAllowedWindows), w) ==
        std::end(kAllowedWindows))
      fail("scenario.windows",
           "window " + std::to_string(w) + " not in {3, 5, 7, 14, 21}");
    if (w > training_end_day)
      fail("scenario.windows", "window " + std::to_string(w) +
                                   " exceeds the training period");
  }
  if (methods.empty())
    fail("scenario.methods", "at least one method is required");
  for (const auto &m : methods)
    if (m != "NLS" && m != "BE" && m != "MLE" && m != "ALS")
      fail("scenario.methods", "unknown method '" + m + "'");
  for (size_t i = 0; i < methods.size(); ++i)
    for (size_t j = i + 1; j < methods.size(); ++j)
      if (methods[i] == methods[j])
        fail("scenario.methods", "duplicate method '" + methods[i] + "'");
  if (rc_architectures.empty() &&
      (has_method("NLS") || has_method("BE") || has_method("MLE")))
    fail("scenario.rc_architectures", "RC methods need an architecture");
  for (Preset p : rc_architectures)
    if (p == Preset::Custom)
      fail("scenario.rc_architectures", "custom topologies are not runnable");
  if (weather.t_s != 300.0 && weather.t_s != 600.0)
    fail("weather.t_s", "must be 300 or 600 seconds");
  if (weather.n_days != season_days)
    fail("weather.n_days", "must equal scenario.season_days");
  try {
    weather.validate();
  } catch (const ConfigError &e) {
    fail("weather", e.what());
  }
  if (!(measurement_noise_std >= 0.0))
    fail("plant.measurement_noise_std", "must be >= 0");
  if (!(deadband > 0.0))
    fail("thermostat.deadband", "must be positive");
  if (!(power.cop > 0.0) || !std::isfinite(power.cop))
    fail("power.cop", "must be positive");
  if (!std::isfinite(power.p_other))
    fail("power.p_other", "must be finite");
  if (!(power.power_factor > 0.0 && power.power_factor <= 1.0))
    fail("power.power_factor", "must lie in (0, 1]");
  if (!(noise_q >= 0.0))
    fail("noise.q", "must be >= 0");
  if (!(noise_r > 0.0))
    fail("noise.r", "must be > 0");
  if (!(noise_p0 >= 0.0))
    fail("noise.p0", "must be >= 0");
  try {
    optimizer.validate();
  } catch (const ConfigError &e) {
    fail("optimizer", e.what());
  }
}

namespace {
  struct Entry {
    std::string value;
    int line;
  };

  std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
      return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
  }

  std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    size_t pos = 0;
    while (pos <= s.size()) {
      const size_t comma = s.find(',', pos);
      const std::string item =
          trim(s.substr(pos, comma == std::string_view::npos ? s.npos : comma - pos));
      if (!item.empty())
        out.push_back(item);
      if (comma == std::string_view::npos)
        break;
      pos = comma + 1;
    }
    return out;
  }

  template <class T> T parse_integral(const std::string &key, const Entry &e) {
    T v{};
    const auto *end = e.value.data() + e.value.size();
    const auto [ptr, ec] = std::from_chars(e.value.data(), end, v);
    if (ec != std::errc() || ptr != end)
      throw ConfigError("line " + std::to_string(e.line) + ": " + key +
                        " expects an integer, got '" + e.value + "'");
    return v;
  }

  double parse_real(const std::string &key, const Entry &e) {
    try {
      return parse_number(e.value);
    } catch (const DataFormatError &) {
      throw ConfigError("line " + std::to_string(e.line) + ": " + key +
                        " expects a number, got '" + e.value + "'");
    }
  }

  template <class T> std::string join(const std::vector<T> &items,
                                      std::function<std::string(const T &)> f) {
    std::string out;
    for (size_t i = 0; i < items.size(); ++i) {
      if (i)
        out += ',';
      out += f(items[i]);
    }
    return out;
  }

  // Key accessors for the parser and canonical_text.
  struct Field {
    const char *key;
    std::function<void(ScenarioConfig &, const std::string &, const Entry &)> set;
    std::function<std::string(const ScenarioConfig &)> get;
  };

  Field real_field(const char *key, double ScenarioConfig::*m) {
    return {key,
            [m](ScenarioConfig &c, const std::string &k, const Entry &e) {
              c.*m = parse_real(k, e);
            },
            [m](const ScenarioConfig &c) { return format_number(c.*m); }};
  }

  template <class S, class T>
  Field nested_real(const char *key, S ScenarioConfig::*outer, T S::*inner) {
    return {key,
            [outer, inner](ScenarioConfig &c, const std::string &k, const Entry &e) {
              (c.*outer).*inner = static_cast<T>(parse_real(k, e));
            },
            [outer, inner](const ScenarioConfig &c) {
              return format_number(static_cast<double>((c.*outer).*inner));
            }};
  }

  template <class S, class T>
  Field nested_int(const char *key, S ScenarioConfig::*outer, T S::*inner) {
    return {key,
            [outer, inner](ScenarioConfig &c, const std::string &k, const Entry &e) {
              (c.*outer).*inner = parse_integral<T>(k, e);
            },
            [outer, inner](const ScenarioConfig &c) {
              return std::to_string((c.*outer).*inner);
            }};
  }

  Field int_field(const char *key, int ScenarioConfig::*m) {
    return {key,
            [m](ScenarioConfig &c, const std::string &k, const Entry &e) {
              c.*m = parse_integral<int>(k, e);
            },
            [m](const ScenarioConfig &c) { return std::to_string(c.*m); }};
  }

  const std::vector<Field> &fields() {
    static const std::vector<Field> table = [] {
      std::vector<Field> f;
      f.push_back({"scenario.name",
                   [](ScenarioConfig &c, const std::string &, const Entry &e) {
                     c.name = e.value;
                   },
                   [](const ScenarioConfig &c) { return c.name; }});
      f.push_back({"scenario.building",
                   [](ScenarioConfig &c, const std::string &, const Entry &e) {
                     c.building = parse_building(e.value);
                   },
                   [](const ScenarioConfig &c) {
                     return std::string(building_name(c.building));
                   }});
      f.push_back({"scenario.season_days",
                   [](ScenarioConfig &c, const std::string &k, const Entry &e) {
                     c.season_days = parse_integral<int>(k, e);
                     c.weather.n_days = c.season_days;
                   },
                   [](const ScenarioConfig &c) { return std::to_string(c.season_days); }});
      f.push_back(int_field("scenario.training_end_day", &ScenarioConfig::training_end_day));
      f.push_back(int_field("scenario.test_days", &ScenarioConfig::test_days));
      f.push_back({"scenario.windows",
                   [](ScenarioConfig &c, const std::string &k, const Entry &e) {
                     c.windows.clear();
                     for (const auto &item : split_list(e.value))
                       c.windows.push_back(parse_integral<int>(k, {item, e.line}));
                   },
                   [](const ScenarioConfig &c) {
                     return join<int>(c.windows, [](const int &w) { return std::to_string(w); });
                   }});
      f.push_back({"scenario.methods",
                   [](ScenarioConfig &c, const std::string &, const Entry &e) {
                     c.methods = split_list(e.value);
                   },
                   [](const ScenarioConfig &c) {
                     return join<std::string>(c.methods, [](const std::string &m) { return m; });
                   }});
      f.push_back({"scenario.rc_architectures",
                   [](ScenarioConfig &c, const std::string &k, const Entry &e) {
                     c.rc_architectures.clear();
                     for (const auto &item : split_list(e.value)) {
                       try {
                         c.rc_architectures.push_back(parse_preset(item));
                       } catch (const InvalidArgument &ex) {
                         throw ConfigError("line " + std::to_string(e.line) + ": " +
                                           k + ": " + ex.what());
                       }
                     }
                   },
                   [](const ScenarioConfig &c) {
                     return join<Preset>(c.rc_architectures, [](const Preset &p) {
                       return std::string(preset_name(p));
                     });
                   }});
      f.push_back({"scenario.als_architecture",
                   [](ScenarioConfig &c, const std::string &k, const Entry &e) {
                     try {
                       c.als_architecture = parse_almon_preset(e.value);
                     } catch (const InvalidArgument &ex) {
                       throw ConfigError("line " + std::to_string(e.line) + ": " +
                                         k + ": " + ex.what());
                     }
                   },
                   [](const ScenarioConfig &c) {
                     return std::string(almon_preset_name(c.als_architecture));
                   }});
      f.push_back({"seed",
                   [](ScenarioConfig &c, const std::string &k, const Entry &e) {
                     c.set_seed(parse_integral<std::uint64_t>(k, e));
                   },
                   [](const ScenarioConfig &c) { return std::to_string(c.seed); }});
      using S = ScenarioConfig;
      using W = WeatherConfig;
      f.push_back(nested_real("weather.t_s", &S::weather, &W::t_s));
      f.push_back(nested_real("weather.ambient_mean", &S::weather, &W::ambient_mean));
      f.push_back(nested_real("weather.ambient_amplitude", &S::weather, &W::ambient_amplitude));
      f.push_back(nested_real("weather.solar_peak", &S::weather, &W::solar_peak));
      f.push_back(nested_real("weather.internal_base", &S::weather, &W::internal_base));
      f.push_back(nested_real("weather.internal_peak", &S::weather, &W::internal_peak));
      f.push_back(nested_int("weather.occupancy_start_hour", &S::weather, &W::occupancy_start_hour));
      f.push_back(nested_int("weather.occupancy_end_hour", &S::weather, &W::occupancy_end_hour));
      f.push_back(nested_real("weather.noise_std", &S::weather, &W::noise_std));
      f.push_back(nested_real("weather.noise_corr_hours", &S::weather, &W::noise_corr_hours));
      f.push_back(real_field("plant.measurement_noise_std", &S::measurement_noise_std));
      f.push_back(real_field("thermostat.training_setpoint", &S::training_setpoint));
      f.push_back(real_field("thermostat.evaluation_setpoint", &S::evaluation_setpoint));
      f.push_back(real_field("thermostat.deadband", &S::deadband));
      f.push_back(nested_real("power.cop", &S::power, &PowerParams::cop));
      f.push_back(nested_real("power.p_other", &S::power, &PowerParams::p_other));
      f.push_back(nested_real("power.power_factor", &S::power, &PowerParams::power_factor));
      f.push_back(real_field("noise.q", &S::noise_q));
      f.push_back(real_field("noise.r", &S::noise_r));
      f.push_back(real_field("noise.p0", &S::noise_p0));
      f.push_back(nested_int("optimizer.max_iters", &S::optimizer, &OptimizerConfig::max_iters));
      f.push_back(nested_real("optimizer.grad_tol", &S::optimizer, &OptimizerConfig::grad_tol));
      f.push_back(nested_real("optimizer.step_tol", &S::optimizer, &OptimizerConfig::step_tol));
      f.push_back(nested_real("optimizer.f_tol", &S::optimizer, &OptimizerConfig::f_tol));
      f.push_back(nested_real("optimizer.fd_step", &S::optimizer, &OptimizerConfig::fd_step));
      f.push_back(nested_int("optimizer.multistart_count", &S::optimizer, &OptimizerConfig::multistart_count));
      return f;
    }();
    return table;
  }
}  // namespace

ScenarioConfig parse_config(std::string_view text) {
  std::map<std::string, Entry> entries;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (!entries.emplace(key, Entry{value, line_no}).second)
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" +
                        key + "'");
  }

  Building building = Building::House;
  if (auto it = entries.find("scenario.building"); it != entries.end())
    building = parse_building(it->second.value);
  ScenarioConfig cfg = ScenarioConfig::defaults(building);

  for (const Field &f : fields()) {
    auto it = entries.find(f.key);
    if (it == entries.end())
      continue;
    f.set(cfg, f.key, it->second);
    entries.erase(it);
  }
  if (!entries.empty()) {
    const auto &[key, e] = *entries.begin();
    throw ConfigError("line " + std::to_string(e.line) + ": unknown key '" +
                      key + "'");
  }
  cfg.set_seed(cfg.seed);
  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string canonical_text(const ScenarioConfig &cfg) {
  std::string out;
  for (const Field &f : fields())
    out += std::string(f.key) + " = " + f.get(cfg) + "\n";
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string config_hash(const ScenarioConfig &cfg) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical_text(cfg))));
  return buf;
}

}  // namespace thermident

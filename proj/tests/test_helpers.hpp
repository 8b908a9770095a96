// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "thermident/dataset.hpp"
#include "thermident/plant_sim.hpp"
#include "thermident/thermal_core.hpp"

namespace thermident::testing {

// Noiseless closed-loop data from `plant` under the house cooling thermostat.
inline Dataset closed_loop_data(const TruthPlant &plant, int n_days,
                                double t_s = 600.0, std::uint64_t seed = 7,
                                double meas_noise = 0.0) {
  WeatherConfig w;
  w.n_days = n_days;
  w.t_s = t_s;
  w.noise_std = 1.0;
  w.rng_seed = seed;
  return generate_dataset(plant, house_thermostat(23.0), gen_weather(w),
                          meas_noise, seed + 1, t_s);
}

// Deterministic-rollout dataset: y(k) = T_z(k) of the Euler model driven by
// the inputs already stored in `inputs`.
inline Dataset replay(const RcTopology &topo, const RcParameters &p,
                      const ThermalState &x0, const Dataset &inputs) {
  const DiscreteStateSpace dss = discretize(topo, p, inputs.t_s);
  const SimulationTrace tr = simulate(dss, x0, inputs.q_hvac, inputs.disturbances());
  Dataset out = inputs;
  out.t_z = tr.outputs;
  return out;
}

// Short hand-built dataset with the given outputs, inputs and disturbances.
inline Dataset tiny_dataset(const Eigen::VectorXd &y, const Eigen::VectorXd &u,
                            const Eigen::VectorXd &t_am, double t_s = 600.0) {
  Dataset d;
  d.t_s = t_s;
  d.start_epoch = scenario_epoch();
  d.t_z = y;
  d.q_hvac = u;
  d.p_c = (-u).cwiseMax(0.0) / 3.0;
  d.p_h = u.cwiseMax(0.0) / 3.0;
  d.t_am = t_am;
  d.q_int = Eigen::VectorXd::Zero(y.size());
  d.q_solar = Eigen::VectorXd::Zero(y.size());
  return d;
}

class TempDir {
public:
  explicit TempDir(const std::string &tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("thermident_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;

  const std::filesystem::path &path() const { return path_; }

private:
  std::filesystem::path path_;
};

}  // namespace thermident::testing

// SPDX-License-Identifier: Apache-2.0
//
// RC-network thermal models: topology, physical parameters, the linear
// state-space assembly and its forward-Euler discretization.
//
// State ordering is [T_z, T_w1, ..., T_wN]; disturbance ordering is
// [T_am, Q_int, Q_solar]. Q_HVAC > 0 adds heat to the zone, Q_HVAC < 0
// removes it.

#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace thermident {

using ThermalState = Eigen::VectorXd;
using DisturbanceSeq = Eigen::Matrix3Xd;

struct DisturbanceSample {
  double t_am = 0.0;     // °C
  double q_int = 0.0;    // W
  double q_solar = 0.0;  // W

  Eigen::Vector3d vec() const { return {t_am, q_int, q_solar}; }
};

enum class Preset { R1, R2, R4, C1, C2, Custom };

std::string_view preset_name(Preset p);
Preset parse_preset(std::string_view name);

enum class ParamField { RZa, RZw, RW, RWa, Cz, Cw, Az, Bz, Bw, Dz, Dw };
enum class ParamKind { Resistance, Capacitance, Fraction };

ParamKind kind_of(ParamField f);

// Addresses one scalar of RcParameters. `i`/`j` index hidden nodes.
struct ParamRef {
  ParamField field = ParamField::RZa;
  int i = 0;
  int j = 0;

  bool operator==(const ParamRef &) const = default;
};

// "r_za", "r_zw[1]", "r_w[0][2]", "c_w[0]", ...
std::string param_label(ParamRef ref);
ParamRef parse_param_label(std::string_view label);

class RcTopology {
public:
  RcTopology() = default;

  // Full Eq.-family topology: every present parameter is free.
  static RcTopology custom(int n_hidden,
                           std::vector<std::pair<int, int>> coupled_pairs,
                           bool gains_on_walls);
  static RcTopology preset(Preset p);

  int n_hidden() const { return n_hidden_; }
  int state_dim() const { return n_hidden_ + 1; }
  bool coupled(int i, int j) const;
  bool gains_on_walls() const { return gains_on_walls_; }
  Preset preset_kind() const { return preset_; }
  std::string name() const { return std::string(preset_name(preset_)); }

  // Parameters adjusted by estimators. Parameters that are structurally
  // present but not free keep whatever value the caller supplies.
  const std::vector<ParamRef> &free_params() const { return free_; }

  // Every scalar that exists for this topology, in canonical order.
  std::vector<ParamRef> present_params() const;
  bool is_present(ParamRef ref) const;

private:
  int n_hidden_ = 0;
  std::vector<char> coupled_;  // row-major n_hidden x n_hidden
  bool gains_on_walls_ = false;
  Preset preset_ = Preset::Custom;
  std::vector<ParamRef> free_;
};

struct RcParameters {
  double r_za = 0.0;       // °C/W
  Eigen::VectorXd r_zw;    // °C/W
  Eigen::MatrixXd r_w;     // °C/W, symmetric, zero where uncoupled
  Eigen::VectorXd r_wa;    // °C/W
  double c_z = 0.0;        // J/°C
  Eigen::VectorXd c_w;     // J/°C
  double a_z = 0.0;
  double b_z = 0.0;
  Eigen::VectorXd b_w;
  double d_z = 0.0;
  Eigen::VectorXd d_w;

  // All fields sized for `topology`, zero-filled.
  static RcParameters zeros(const RcTopology &topology);

  double get(ParamRef ref) const;
  void set(ParamRef ref, double value);
};

// Throws InvalidArgument on dimension mismatch, non-positive R or C,
// fractions outside [0, 1] or values on absent couplings.
void validate(const RcTopology &topology, const RcParameters &params);

struct ContinuousStateSpace {
  Eigen::MatrixXd a_mat;  // (N+1)x(N+1), 1/s
  Eigen::VectorXd b_mat;  // (N+1), °C/(W s)
  Eigen::MatrixXd d_mat;  // (N+1)x3
  Eigen::RowVectorXd c_mat;

  int state_dim() const { return static_cast<int>(a_mat.rows()); }
};

struct DiscreteStateSpace {
  Eigen::MatrixXd ad;
  Eigen::VectorXd bd;
  Eigen::MatrixXd dd;
  Eigen::RowVectorXd c;
  double t_s = 0.0;
  // t_s * |a_ii| >= 1 for some node: forward Euler may oscillate or blow up.
  bool stability_warning = false;

  int state_dim() const { return static_cast<int>(ad.rows()); }
};

ContinuousStateSpace build_state_space(const RcTopology &topology,
                                       const RcParameters &params);

DiscreteStateSpace discretize(const ContinuousStateSpace &css, double t_s);

// Convenience: build + discretize.
DiscreteStateSpace discretize(const RcTopology &topology,
                              const RcParameters &params, double t_s);

struct StepResult {
  ThermalState next;
  double y = 0.0;  // output of the pre-step state
};

StepResult step(const DiscreteStateSpace &dss, const ThermalState &x,
                double u, const DisturbanceSample &w);

struct SimulationTrace {
  Eigen::MatrixXd states;   // (N+1) x (T+1), column k is x(k)
  Eigen::VectorXd outputs;  // T, outputs(k) = C x(k)
};

SimulationTrace simulate(const DiscreteStateSpace &dss, const ThermalState &x0,
                         const Eigen::Ref<const Eigen::VectorXd> &u_seq,
                         const Eigen::Ref<const DisturbanceSeq> &w_seq);

}  // namespace thermident

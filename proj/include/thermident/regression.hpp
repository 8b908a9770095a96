// SPDX-License-Identifier: Apache-2.0
//
// Structured autoregressive zone-temperature model with polynomial (Almon)
// restrictions on each distributed lag, fitted by linear least squares.
//
//   T_z(k+1) = alpha0 + sum_r sum_{i=l_r}^{t_r} zeta_{r,i} z_r(k-i),
//   zeta_{r,i} = sum_{j=0}^{q_r} omega_{r,j} i^j.

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "thermident/dataset.hpp"

namespace thermident {

inline constexpr double kDegreeDayThreshold = 19.44;  // °C

enum class Regressor { Tz, Pc, Ph, Dc, Dh };

std::string_view regressor_name(Regressor r);
Regressor parse_regressor(std::string_view name);

struct AlmonSpec {
  Regressor regressor = Regressor::Tz;
  int start_lag = 0;
  int end_lag = 0;
  int poly_order = 0;

  int lag_count() const { return end_lag - start_lag + 1; }
  // 0 <= l <= t, 0 <= q < t - l + 1. Throws InvalidArgument.
  void validate() const;
};

enum class AlmonPreset { RA, CA };

std::string_view almon_preset_name(AlmonPreset p);
AlmonPreset parse_almon_preset(std::string_view name);

// R-A (house, no heating):   T_z(6,14,2) P_c(0,11,2) D_c(6,17,1) D_h(6,17,1)
// C-A (commercial building): T_z(6,14,2) P_c(0,8,2) P_h(0,8,2) D_c(6,17,1)
//                            D_h(6,17,1)
std::vector<AlmonSpec> almon_preset(AlmonPreset p);

struct DegreeDays {
  double cooling = 0.0;
  double heating = 0.0;
};

DegreeDays degree_days(double t_am);

// (t-l+1) x (q+1) matrix with M(i-l, j) = i^j, 0^0 = 1.
Eigen::MatrixXd almon_basis(int start_lag, int end_lag, int poly_order);

// z~_j(k) = sum_{i=l}^{t} i^j z(k-i) for j = 0..q.
Eigen::VectorXd transform_regressor(const Eigen::Ref<const Eigen::VectorXd> &z,
                                    const AlmonSpec &spec, Eigen::Index k);

// Aligned regressor series; degree days are derived from T_am.
struct RegressorSeries {
  Eigen::VectorXd t_z, p_c, p_h, d_c, d_h;

  static RegressorSeries from_dataset(const Dataset &data);
  const Eigen::VectorXd &get(Regressor r) const;
};

int burn_in(const std::vector<AlmonSpec> &specs);

struct DesignMatrix {
  Eigen::MatrixXd x;        // rows: k = burn_in .. T-2
  Eigen::VectorXd target;   // T_z(k+1)
  int burn_in = 0;
  std::vector<AlmonSpec> specs;
  std::vector<int> block_offsets;  // first column of each spec's block
};

// Row k of the design carries [1, z~_r(k) for every spec] and targets
// T_z(k+1). Throws InvalidArgument if the dataset has no usable row.
DesignMatrix build_design(const Dataset &data,
                          const std::vector<AlmonSpec> &specs);
DesignMatrix build_design(const RegressorSeries &series,
                          const std::vector<AlmonSpec> &specs);

struct AlmonModel {
  double alpha0 = 0.0;
  std::vector<AlmonSpec> specs;
  std::vector<Eigen::VectorXd> omega;  // per spec, q+1
  std::vector<Eigen::VectorXd> zeta;   // per spec, t-l+1 lag weights
  std::string preset = "custom";

  int burn_in() const { return thermident::burn_in(specs); }
  // Predicted T_z(k+1) from regressors at indices <= k.
  double predict(const RegressorSeries &series, Eigen::Index k) const;
};

// QR least squares with column equilibration. Throws RankDeficientError
// naming the regressor block whose column is linearly dependent.
AlmonModel lls_fit(const DesignMatrix &design);

// One-step predictions for k+1 = burn_in+1 .. T-1 on measured regressors.
Eigen::VectorXd predict_one_step(const AlmonModel &model,
                                 const RegressorSeries &series);

// Recursive rollout. `history` holds measured T_z(0..h-1) with
// h >= burn_in + 1; inputs span the full horizon T. Returns T_z(0..T-1)
// with the history copied through and later values fed back into the
// T_z lags.
Eigen::VectorXd simulate_regression(const AlmonModel &model,
                                    const Eigen::Ref<const Eigen::VectorXd> &history,
                                    const Eigen::Ref<const Eigen::VectorXd> &p_c,
                                    const Eigen::Ref<const Eigen::VectorXd> &p_h,
                                    const Eigen::Ref<const Eigen::VectorXd> &t_am);

}  // namespace thermident

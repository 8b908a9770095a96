// SPDX-License-Identifier: Apache-2.0
//
// RC-network parameter estimation: output-error least squares (NLS), batch
// estimation over a state trajectory (BE) and Kalman-filter maximum
// likelihood (MLE).

#pragma once

#include <limits>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "thermident/dataset.hpp"
#include "thermident/optimizer.hpp"
#include "thermident/thermal_core.hpp"

namespace thermident {

enum class RcMethod { NLS, BE, MLE };

std::string_view method_name(RcMethod m);
RcMethod parse_rc_method(std::string_view name);

// Objective value reported for candidates whose rollout is not finite.
inline constexpr double kUnstableObjective =
    std::numeric_limits<double>::infinity();

// Added to Q and P0 before inversion.
inline constexpr double kCovarianceJitter = 1e-10;

// Batch estimation operates on at most this many days of data.
inline constexpr int kMaxBatchDays = 21;

struct NoiseHyperParams {
  Eigen::MatrixXd q_proc;  // °C², process noise per step
  double r_meas = 1e-2;    // °C², measurement noise
  Eigen::MatrixXd p0;      // initial state-error covariance
  ThermalState x0_prior;

  // q_proc = q*I, p0 = p0*I, x0_prior = first_measurement on every node.
  static NoiseHyperParams defaults(int state_dim, double first_measurement,
                                   double q = 1e-4, double r = 1e-2,
                                   double p0 = 1.0);

  void validate(int state_dim) const;
};

struct KalmanState {
  ThermalState x_pred;
  Eigen::MatrixXd p_pred;
  double innovation = 0.0;  // e of the most recent update
  double s_var = 0.0;       // S of the most recent update
};

KalmanState kalman_init(const NoiseHyperParams &noise);

// Measurement update with y followed by the time update with (u, w).
KalmanState kalman_step(const KalmanState &ks, double u,
                        const DisturbanceSample &w, double y,
                        const DiscreteStateSpace &dss,
                        const NoiseHyperParams &noise);

struct MleContribution {
  double objective = 0.0;
  KalmanState final_state;
};

// Runs the filter over every sample of `data` starting from `start`. The
// recursion is stateful-exact: splitting a dataset and chaining the final
// state reproduces the single-pass sum.
MleContribution mle_accumulate(const KalmanState &start,
                               const DiscreteStateSpace &dss,
                               const Dataset &data,
                               const NoiseHyperParams &noise);

// sum_k e(k)^2 / S(k) + ln S(k) from (x0_prior, p0).
double mle_objective(const RcParameters &theta, const Dataset &data,
                     const NoiseHyperParams &noise,
                     const RcTopology &topology);

// sum_k (y(k) - C x(k))^2 along the deterministic Euler rollout from x0.
double nls_objective(const RcParameters &theta, const ThermalState &x0,
                     const Dataset &data, const RcTopology &topology);

struct BeDecision {
  RcParameters theta;
  Eigen::MatrixXd x_traj;  // (N+1) x (T+1)
};

// Prior term + measurement residuals over k = 0..T-1 + process residuals
// w_n(k) = x(k+1) - [Euler step from x(k)] over k = 0..T-1.
double be_objective(const BeDecision &dec, const Dataset &data,
                    const NoiseHyperParams &noise, const RcTopology &topology);

struct BeProfile {
  double objective = kUnstableObjective;
  Eigen::MatrixXd x_traj;
};

// Minimizes be_objective over the trajectory for fixed theta. For a linear
// model this is a Gaussian MAP problem, solved exactly by a
// Rauch-Tung-Striebel smoother with the jittered covariances.
BeProfile be_profile(const RcParameters &theta, const Dataset &data,
                     const NoiseHyperParams &noise,
                     const RcTopology &topology);

// min over the trajectory of be_objective, computed as sum_k e(k)^2 / S(k)
// from one forward filter pass with the jittered covariances. This is what
// estimate() minimizes for BE.
double be_concentrated_objective(const RcParameters &theta,
                                 const Dataset &data,
                                 const NoiseHyperParams &noise,
                                 const RcTopology &topology);

// Maps the free parameters of a topology to an unconstrained-ish vector:
// log for resistances and capacitances, logit for fractions.
class ParameterTransform {
public:
  explicit ParameterTransform(RcTopology topology);

  Eigen::Index size() const;
  Eigen::VectorXd encode(const RcParameters &params) const;
  // Non-free fields are copied from `base`.
  RcParameters decode(const Eigen::Ref<const Eigen::VectorXd> &z,
                      const RcParameters &base) const;
  Bounds bounds() const;

  const RcTopology &topology() const { return topology_; }

private:
  RcTopology topology_;
};

// Default starting point: resistances and capacitances of a mid-size
// building, free fractions at 0.5, non-free fractions at 0.
RcParameters default_initial_guess(const RcTopology &topology);

// Objective over the decision vector z = [encoded theta; x0 (NLS only)].
struct EstimationProblem {
  RcMethod method = RcMethod::NLS;
  ParameterTransform transform;
  RcParameters base;
  ObjectiveFn objective;
  Bounds bounds;
  Eigen::VectorXd initial;

  RcParameters theta(const Eigen::VectorXd &z) const;
  // NLS: tail of z. BE/MLE: x0_prior.
  ThermalState x0(const Eigen::VectorXd &z, const NoiseHyperParams &noise) const;
};

EstimationProblem make_problem(RcMethod method, const Dataset &data,
                               const RcTopology &topology,
                               const NoiseHyperParams &noise,
                               const RcParameters &initial_guess);

struct EstimationResult {
  RcMethod method = RcMethod::NLS;
  RcParameters theta_hat;
  ThermalState x0_hat;
  double objective = kUnstableObjective;
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_history;
  int best_start = -1;
  int diverged_starts = 0;
  Eigen::MatrixXd trajectory;  // BE only
};

// Best of cfg.multistart_count starts. Start 0 is `initial_guess` (or the
// default guess); later starts perturb the encoded parameters uniformly by
// +-1 using cfg.rng_seed. Never throws for diverging candidates; returns
// converged=false when no start produced a finite objective.
EstimationResult estimate(RcMethod method, const Dataset &data,
                          const RcTopology &topology,
                          const NoiseHyperParams &noise,
                          const OptimizerConfig &cfg,
                          const RcParameters *initial_guess = nullptr);

}  // namespace thermident

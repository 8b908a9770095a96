// SPDX-License-Identifier: Apache-2.0
//
// Box-constrained quasi-Newton minimizer used by every RC estimator.

#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace thermident {

struct OptimizerConfig {
  int max_iters = 500;
  // Converged when ||projected gradient||_inf <= grad_tol * (1 + |f|).
  double grad_tol = 1e-7;
  // Converged when the accepted step satisfies ||dx||_inf <= step_tol.
  double step_tol = 1e-10;
  // Stalled when the mean relative decrease over the last five iterations,
  // (f[k-5] - f[k]) / (5 max(|f[k]|, 1)), is <= f_tol.
  double f_tol = 2.2e-9;
  double fd_step = 1e-6;  // relative central-difference step
  int multistart_count = 3;
  std::uint64_t rng_seed = 1;

  void validate() const;
};

struct Bounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  static Bounds unbounded(Eigen::Index n);

  Eigen::Index size() const { return lower.size(); }
  bool contains(const Eigen::VectorXd &x) const;
  Eigen::VectorXd project(const Eigen::VectorXd &x) const;
};

using ObjectiveFn = std::function<double(const Eigen::VectorXd &)>;
// Gradient at x; fx = f(x) is passed so one-sided differences can reuse it.
using GradientFn =
    std::function<Eigen::VectorXd(const Eigen::VectorXd &x, double fx)>;

// Central differences with step rel_step * max(|x_i|, 1). Falls back to a
// one-sided difference on coordinates where the central stencil would leave
// the box, so f is never evaluated outside `bounds`.
Eigen::VectorXd central_gradient(const ObjectiveFn &f,
                                 const Eigen::VectorXd &x, double fx,
                                 const Bounds &bounds, double rel_step);

enum class StopReason {
  GradientTolerance,
  StepTolerance,
  Stalled,
  LineSearchFailure,
  MaxIterations,
  NonFiniteGradient,
};

std::string_view stop_reason_name(StopReason r);

struct MinimizeResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  StopReason reason = StopReason::MaxIterations;
  // Objective after each accepted iterate, starting with f(x_init).
  std::vector<double> history;

  // Terminated because no further decrease was attainable (not because the
  // iteration budget ran out or the gradient was unusable).
  bool converged() const;
};

// Projected BFGS with Armijo backtracking. Bound-active coordinates whose
// gradient points outward are frozen for the iteration. Throws
// InvalidArgument when x_init is infeasible or f(x_init) is not finite.
MinimizeResult minimize(const ObjectiveFn &objective,
                        const Eigen::VectorXd &x_init, const Bounds &bounds,
                        const OptimizerConfig &cfg,
                        const GradientFn &gradient = {});

}  // namespace thermident

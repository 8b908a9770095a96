// SPDX-License-Identifier: Apache-2.0

#include "thermident/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "thermident/errors.hpp"

namespace thermident {

void OptimizerConfig::validate() const {
  if (max_iters < 1)
    throw ConfigError("optimizer max_iters must be >= 1");
  if (!(grad_tol > 0.0) || !(step_tol > 0.0) || !(fd_step > 0.0) ||
      !(f_tol >= 0.0))
    throw ConfigError("optimizer tolerances must be positive");
  if (multistart_count < 1)
    throw ConfigError("optimizer multistart_count must be >= 1");
}

Bounds Bounds::unbounded(Eigen::Index n) {
  const double inf = std::numeric_limits<double>::infinity();
  return {Eigen::VectorXd::Constant(n, -inf), Eigen::VectorXd::Constant(n, inf)};
}

bool Bounds::contains(const Eigen::VectorXd &x) const {
  return x.size() == lower.size() && (x.array() >= lower.array()).all() &&
         (x.array() <= upper.array()).all();
}

Eigen::VectorXd Bounds::project(const Eigen::VectorXd &x) const {
  return x.cwiseMax(lower).cwiseMin(upper);
}

Eigen::VectorXd central_gradient(const ObjectiveFn &f,
                                 const Eigen::VectorXd &x, double fx,
                                 const Bounds &bounds, double rel_step) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd g(n);
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = rel_step * std::max(std::abs(x(i)), 1.0);
    const bool up_ok = x(i) + h <= bounds.upper(i);
    const bool down_ok = x(i) - h >= bounds.lower(i);
    if (up_ok && down_ok) {
      probe(i) = x(i) + h;
      const double fp = f(probe);
      probe(i) = x(i) - h;
      const double fm = f(probe);
      g(i) = (fp - fm) / (2.0 * h);
    } else if (up_ok) {
      probe(i) = x(i) + h;
      g(i) = (f(probe) - fx) / h;
    } else if (down_ok) {
      probe(i) = x(i) - h;
      g(i) = (fx - f(probe)) / h;
    } else {
      g(i) = 0.0;
    }
    probe(i) = x(i);
  }
  return g;
}

std::string_view stop_reason_name(StopReason r) {
  switch (r) {
  case StopReason::GradientTolerance:
    return "gradient_tolerance";
  case StopReason::StepTolerance:
    return "step_tolerance";
  case StopReason::Stalled:
    return "stalled";
  case StopReason::LineSearchFailure:
    return "line_search_failure";
  case StopReason::MaxIterations:
    return "max_iterations";
  case StopReason::NonFiniteGradient:
    return "non_finite_gradient";
  }
  return "unknown";
}

bool MinimizeResult::converged() const {
  return reason != StopReason::MaxIterations &&
         reason != StopReason::NonFiniteGradient && std::isfinite(value);
}

namespace {
  constexpr double kArmijo = 1e-4;
  constexpr int kMaxBacktracks = 60;
  constexpr size_t kStallIterations = 5;

  Eigen::ArrayXd active_mask(const Eigen::VectorXd &x,
                             const Eigen::VectorXd &g, const Bounds &b) {
    Eigen::ArrayXd free = Eigen::ArrayXd::Ones(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if ((x(i) <= b.lower(i) && g(i) > 0.0) ||
          (x(i) >= b.upper(i) && g(i) < 0.0))
        free(i) = 0.0;
    }
    return free;
  }
}  // namespace

MinimizeResult minimize(const ObjectiveFn &objective,
                        const Eigen::VectorXd &x_init, const Bounds &bounds,
                        const OptimizerConfig &cfg,
                        const GradientFn &gradient) {
  cfg.validate();
  if (!bounds.contains(x_init))
    throw InvalidArgument("initial point lies outside the bounds");

  const Eigen::Index n = x_init.size();
  const GradientFn grad =
      gradient ? gradient
               : GradientFn([&](const Eigen::VectorXd &x, double fx) {
                   return central_gradient(objective, x, fx, bounds,
                                           cfg.fd_step);
                 });

  MinimizeResult res;
  res.x = x_init;
  res.value = objective(res.x);
  if (!std::isfinite(res.value))
    throw InvalidArgument("objective is not finite at the initial point");
  res.history.push_back(res.value);

  Eigen::VectorXd g = grad(res.x, res.value);
  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(n, n);
  bool h_is_identity = true;

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    res.iterations = iter;
    if (!g.allFinite()) {
      res.reason = StopReason::NonFiniteGradient;
      return res;
    }
    const Eigen::ArrayXd free = active_mask(res.x, g, bounds);
    const Eigen::VectorXd g_free = (g.array() * free).matrix();
    if (g_free.lpNorm<Eigen::Infinity>() <=
        cfg.grad_tol * (1.0 + std::abs(res.value))) {
      res.reason = StopReason::GradientTolerance;
      return res;
    }

    Eigen::VectorXd dir = -(h_inv * g_free);
    dir = (dir.array() * free).matrix();
    if (g_free.dot(dir) >= 0.0) {
      h_inv.setIdentity();
      h_is_identity = true;
      dir = -g_free;
    }

    // The first steepest-descent step is scaled so no coordinate moves by
    // more than one unit.
    double alpha = 1.0;
    if (h_is_identity)
      alpha = std::min(1.0, 1.0 / dir.lpNorm<Eigen::Infinity>());

    bool accepted = false;
    Eigen::VectorXd x_new, s;
    double f_new = 0.0;
    for (int bt = 0; bt < kMaxBacktracks; ++bt) {
      x_new = bounds.project(res.x + alpha * dir);
      s = x_new - res.x;
      if (s.lpNorm<Eigen::Infinity>() == 0.0)
        break;
      f_new = objective(x_new);
      if (std::isfinite(f_new) && f_new <= res.value + kArmijo * g.dot(s)) {
        accepted = true;
        break;
      }
      alpha *= std::isfinite(f_new) ? 0.5 : 0.1;
    }

    if (!accepted) {
      if (!h_is_identity) {
        h_inv.setIdentity();
        h_is_identity = true;
        continue;
      }
      res.reason = StopReason::LineSearchFailure;
      return res;
    }

    const Eigen::VectorXd g_new = grad(x_new, f_new);
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (g_new.allFinite() && sy > 1e-12 * s.norm() * y.norm()) {
      if (h_is_identity)
        h_inv *= sy / y.squaredNorm();
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd left =
          Eigen::MatrixXd::Identity(n, n) - rho * s * y.transpose();
      h_inv = left * h_inv * left.transpose() + rho * s * s.transpose();
      h_is_identity = false;
    }

    res.x = x_new;
    res.value = f_new;
    res.history.push_back(f_new);
    g = g_new;
    res.iterations = iter + 1;

    if (s.lpNorm<Eigen::Infinity>() <= cfg.step_tol) {
      res.reason = StopReason::StepTolerance;
      return res;
    }
    const size_t h = res.history.size();
    if (h > kStallIterations &&
        res.history[h - 1 - kStallIterations] - f_new <=
            kStallIterations * cfg.f_tol * std::max(std::abs(f_new), 1.0)) {
      res.reason = StopReason::Stalled;
      return res;
    }
  }
  res.reason = StopReason::MaxIterations;
  return res;
}

}  // namespace thermident

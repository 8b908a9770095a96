// SPDX-License-Identifier: Apache-2.0

#include "thermident/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <string>
#include <utility>

#include "thermident/errors.hpp"

namespace thermident {

std::string_view method_name(RcMethod m) {
  switch (m) {
  case RcMethod::NLS:
    return "NLS";
  case RcMethod::BE:
    return "BE";
  case RcMethod::MLE:
    return "MLE";
  }
  return "NLS";
}

RcMethod parse_rc_method(std::string_view name) {
  for (RcMethod m : {RcMethod::NLS, RcMethod::BE, RcMethod::MLE})
    if (method_name(m) == name)
      return m;
  throw InvalidArgument("unknown RC estimation method '" + std::string(name) +
                        "'");
}

NoiseHyperParams NoiseHyperParams::defaults(int state_dim,
                                            double first_measurement,
                                            double q, double r, double p0) {
  NoiseHyperParams n;
  n.q_proc = q * Eigen::MatrixXd::Identity(state_dim, state_dim);
  n.r_meas = r;
  n.p0 = p0 * Eigen::MatrixXd::Identity(state_dim, state_dim);
  n.x0_prior = ThermalState::Constant(state_dim, first_measurement);
  return n;
}

namespace {
  bool symmetric_psd(const Eigen::MatrixXd &m) {
    if (!m.allFinite() || (m - m.transpose()).cwiseAbs().maxCoeff() >
                              1e-12 * (1.0 + m.cwiseAbs().maxCoeff()))
      return false;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m,
                                                      Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= -1e-12 * (1.0 + m.norm());
  }
}  // namespace

void NoiseHyperParams::validate(int state_dim) const {
  if (q_proc.rows() != state_dim || q_proc.cols() != state_dim ||
      p0.rows() != state_dim || p0.cols() != state_dim ||
      x0_prior.size() != state_dim)
    throw ConfigError("noise hyperparameters do not match state dimension " +
                      std::to_string(state_dim));
  if (!(r_meas > 0.0) || !std::isfinite(r_meas))
    throw ConfigError("measurement noise variance must be positive");
  if (!symmetric_psd(q_proc))
    throw ConfigError("process noise covariance must be symmetric PSD");
  if (!symmetric_psd(p0))
    throw ConfigError("initial covariance must be symmetric PSD");
  if (!x0_prior.allFinite())
    throw ConfigError("initial state prior is not finite");
}

KalmanState kalman_init(const NoiseHyperParams &noise) {
  KalmanState ks;
  ks.x_pred = noise.x0_prior;
  ks.p_pred = noise.p0;
  return ks;
}

KalmanState kalman_step(const KalmanState &ks, double u,
                        const DisturbanceSample &w, double y,
                        const DiscreteStateSpace &dss,
                        const NoiseHyperParams &noise) {
  KalmanState out;
  const Eigen::VectorXd pct = ks.p_pred * dss.c.transpose();
  out.innovation = y - dss.c.dot(ks.x_pred);
  out.s_var = dss.c.dot(pct) + noise.r_meas;
  if (!(out.s_var > 0.0))
    throw Error("innovation variance is not positive");

  const Eigen::VectorXd gain = pct / out.s_var;
  const Eigen::VectorXd x_f = ks.x_pred + gain * out.innovation;
  const Eigen::MatrixXd p_f = ks.p_pred - gain * pct.transpose();

  out.x_pred = dss.ad * x_f + dss.bd * u + dss.dd * w.vec();
  out.p_pred = dss.ad * p_f * dss.ad.transpose() + noise.q_proc;
  out.p_pred = 0.5 * (out.p_pred + out.p_pred.transpose()).eval();
  return out;
}

namespace {
  // With log_det == false the sum omits ln S; for a linear-Gaussian model
  // that sum equals the minimum of the batch objective over the trajectory.
  double filter_pass(KalmanState &ks, const DiscreteStateSpace &dss,
                     const Eigen::VectorXd &y, const Eigen::VectorXd &u,
                     const DisturbanceSeq &w, const NoiseHyperParams &noise,
                     bool log_det = true) {
    const Eigen::Index n = dss.state_dim();
    Eigen::VectorXd pct(n), x_f(n);
    Eigen::MatrixXd p_f(n, n), tmp(n, n);
    double total = 0.0;
    for (Eigen::Index k = 0; k < y.size(); ++k) {
      pct.noalias() = ks.p_pred * dss.c.transpose();
      const double e = y(k) - dss.c.dot(ks.x_pred);
      const double s = dss.c.dot(pct) + noise.r_meas;
      if (!(s > 0.0) || !std::isfinite(e))
        return kUnstableObjective;
      total += e * e / s;
      if (log_det)
        total += std::log(s);
      x_f = ks.x_pred + pct * (e / s);
      p_f = ks.p_pred;
      p_f.noalias() -= pct * pct.transpose() / s;
      ks.x_pred.noalias() = dss.ad * x_f;
      ks.x_pred.noalias() += dss.bd * u(k);
      ks.x_pred.noalias() += dss.dd * w.col(k);
      tmp.noalias() = dss.ad * p_f;
      ks.p_pred.noalias() = tmp * dss.ad.transpose();
      ks.p_pred += noise.q_proc;
      tmp = ks.p_pred.transpose();
      ks.p_pred = 0.5 * (ks.p_pred + tmp);
      ks.innovation = e;
      ks.s_var = s;
    }
    if (!std::isfinite(total))
      return kUnstableObjective;
    return total;
  }

  double rollout_sse(const DiscreteStateSpace &dss, const ThermalState &x0,
                     const Eigen::VectorXd &y, const Eigen::VectorXd &u,
                     const DisturbanceSeq &w) {
    Eigen::VectorXd x = x0, next(x0.size());
    double total = 0.0;
    for (Eigen::Index k = 0; k < y.size(); ++k) {
      const double r = y(k) - dss.c.dot(x);
      total += r * r;
      next.noalias() = dss.ad * x;
      next.noalias() += dss.bd * u(k);
      next.noalias() += dss.dd * w.col(k);
      x.swap(next);
      if (!(std::abs(x(0)) < 1e6))
        return kUnstableObjective;
    }
    return std::isfinite(total) ? total : kUnstableObjective;
  }

  Eigen::MatrixXd jittered_inverse(const Eigen::MatrixXd &m,
                                   const char *what) {
    const Eigen::Index n = m.rows();
    const Eigen::MatrixXd j = m + kCovarianceJitter * Eigen::MatrixXd::Identity(n, n);
    Eigen::LLT<Eigen::MatrixXd> llt(j);
    if (llt.info() != Eigen::Success)
      throw ConfigError(std::string(what) + " is singular after jitter");
    return llt.solve(Eigen::MatrixXd::Identity(n, n));
  }

  void require_nonempty(const Dataset &data) {
    if (data.size() < 1)
      throw InvalidArgument("dataset is empty");
  }
}  // namespace

MleContribution mle_accumulate(const KalmanState &start,
                               const DiscreteStateSpace &dss,
                               const Dataset &data,
                               const NoiseHyperParams &noise) {
  MleContribution out;
  out.final_state = start;
  out.objective = filter_pass(out.final_state, dss, data.t_z, data.q_hvac,
                              data.disturbances(), noise);
  return out;
}

double mle_objective(const RcParameters &theta, const Dataset &data,
                     const NoiseHyperParams &noise,
                     const RcTopology &topology) {
  require_nonempty(data);
  noise.validate(topology.state_dim());
  const DiscreteStateSpace dss = discretize(topology, theta, data.t_s);
  return mle_accumulate(kalman_init(noise), dss, data, noise).objective;
}

double nls_objective(const RcParameters &theta, const ThermalState &x0,
                     const Dataset &data, const RcTopology &topology) {
  require_nonempty(data);
  const DiscreteStateSpace dss = discretize(topology, theta, data.t_s);
  if (x0.size() != dss.state_dim())
    throw InvalidArgument("initial state dimension does not match topology");
  return rollout_sse(dss, x0, data.t_z, data.q_hvac, data.disturbances());
}

double be_objective(const BeDecision &dec, const Dataset &data,
                    const NoiseHyperParams &noise,
                    const RcTopology &topology) {
  require_nonempty(data);
  const int dim = topology.state_dim();
  noise.validate(dim);
  const Eigen::Index steps = data.size();
  if (dec.x_traj.rows() != dim || dec.x_traj.cols() != steps + 1)
    throw InvalidArgument("trajectory must be (N+1) x (T+1)");

  const DiscreteStateSpace dss = discretize(topology, dec.theta, data.t_s);
  const Eigen::MatrixXd q_inv = jittered_inverse(noise.q_proc, "process noise covariance");
  const Eigen::MatrixXd p0_inv = jittered_inverse(noise.p0, "initial covariance");
  const DisturbanceSeq w = data.disturbances();

  const Eigen::VectorXd e0 = dec.x_traj.col(0) - noise.x0_prior;
  double total = e0.dot(p0_inv * e0);
  Eigen::VectorXd wn(dim);
  for (Eigen::Index k = 0; k < steps; ++k) {
    const double v = data.t_z(k) - dss.c.dot(dec.x_traj.col(k));
    total += v * v / noise.r_meas;
    wn.noalias() = dec.x_traj.col(k + 1) - dss.ad * dec.x_traj.col(k);
    wn.noalias() -= dss.bd * data.q_hvac(k);
    wn.noalias() -= dss.dd * w.col(k);
    total += wn.dot(q_inv * wn);
  }
  return std::isfinite(total) ? total : kUnstableObjective;
}

namespace {
  BeProfile be_profile_impl(const DiscreteStateSpace &dss,
                            const Eigen::VectorXd &y,
                            const Eigen::VectorXd &u, const DisturbanceSeq &w,
                            const NoiseHyperParams &noise,
                            const Eigen::MatrixXd &q_eff,
                            const Eigen::MatrixXd &q_inv,
                            const Eigen::MatrixXd &p0_eff,
                            const Eigen::MatrixXd &p0_inv) {
    const Eigen::Index n = dss.state_dim();
    const Eigen::Index steps = y.size();
    BeProfile out;

    Eigen::MatrixXd x_pred(n, steps + 1), x_filt(n, steps);
    std::vector<Eigen::MatrixXd> p_pred(steps + 1), p_filt(steps);
    x_pred.col(0) = noise.x0_prior;
    p_pred[0] = p0_eff;
    Eigen::VectorXd pct(n);
    for (Eigen::Index k = 0; k < steps; ++k) {
      pct.noalias() = p_pred[k] * dss.c.transpose();
      const double s = dss.c.dot(pct) + noise.r_meas;
      const double e = y(k) - dss.c.dot(x_pred.col(k));
      x_filt.col(k) = x_pred.col(k) + pct * (e / s);
      p_filt[k] = p_pred[k] - pct * pct.transpose() / s;
      x_pred.col(k + 1).noalias() = dss.ad * x_filt.col(k);
      x_pred.col(k + 1).noalias() += dss.bd * u(k);
      x_pred.col(k + 1).noalias() += dss.dd * w.col(k);
      Eigen::MatrixXd p = dss.ad * p_filt[k] * dss.ad.transpose() + q_eff;
      p_pred[k + 1] = 0.5 * (p + p.transpose());
      if (!std::isfinite(e) || !(std::abs(x_pred(0, k + 1)) < 1e6))
        return out;
    }

    out.x_traj.resize(n, steps + 1);
    out.x_traj.col(steps) = x_pred.col(steps);
    for (Eigen::Index k = steps - 1; k >= 0; --k) {
      // G = P_f A^T P_p^{-1}; P_p symmetric so G^T = P_p^{-1} A P_f.
      const Eigen::MatrixXd gain_t =
          p_pred[k + 1].ldlt().solve(dss.ad * p_filt[k]);
      out.x_traj.col(k) =
          x_filt.col(k) +
          gain_t.transpose() * (out.x_traj.col(k + 1) - x_pred.col(k + 1));
    }
    if (!out.x_traj.allFinite())
      return out;

    const Eigen::VectorXd e0 = out.x_traj.col(0) - noise.x0_prior;
    double total = e0.dot(p0_inv * e0);
    Eigen::VectorXd wn(n);
    for (Eigen::Index k = 0; k < steps; ++k) {
      const double v = y(k) - dss.c.dot(out.x_traj.col(k));
      total += v * v / noise.r_meas;
      wn.noalias() = out.x_traj.col(k + 1) - dss.ad * out.x_traj.col(k);
      wn.noalias() -= dss.bd * u(k);
      wn.noalias() -= dss.dd * w.col(k);
      total += wn.dot(q_inv * wn);
    }
    out.objective = std::isfinite(total) ? total : kUnstableObjective;
    return out;
  }

  void require_batch_cap(const Dataset &data) {
    const Eigen::Index cap =
        static_cast<Eigen::Index>(kMaxBatchDays) * data.samples_per_day();
    if (data.size() > cap)
      throw InvalidArgument("batch estimation is limited to " +
                            std::to_string(kMaxBatchDays) + " days of data");
  }
}  // namespace

BeProfile be_profile(const RcParameters &theta, const Dataset &data,
                     const NoiseHyperParams &noise,
                     const RcTopology &topology) {
  require_nonempty(data);
  const int dim = topology.state_dim();
  noise.validate(dim);
  const DiscreteStateSpace dss = discretize(topology, theta, data.t_s);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(dim, dim);
  return be_profile_impl(dss, data.t_z, data.q_hvac, data.disturbances(),
                         noise, noise.q_proc + kCovarianceJitter * eye,
                         jittered_inverse(noise.q_proc, "process noise covariance"),
                         noise.p0 + kCovarianceJitter * eye,
                         jittered_inverse(noise.p0, "initial covariance"));
}

double be_concentrated_objective(const RcParameters &theta,
                                 const Dataset &data,
                                 const NoiseHyperParams &noise,
                                 const RcTopology &topology) {
  require_nonempty(data);
  const int dim = topology.state_dim();
  noise.validate(dim);
  jittered_inverse(noise.q_proc, "process noise covariance");
  jittered_inverse(noise.p0, "initial covariance");
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(dim, dim);
  NoiseHyperParams jittered = noise;
  jittered.q_proc += kCovarianceJitter * eye;
  jittered.p0 += kCovarianceJitter * eye;
  const DiscreteStateSpace dss = discretize(topology, theta, data.t_s);
  KalmanState ks = kalman_init(jittered);
  return filter_pass(ks, dss, data.t_z, data.q_hvac, data.disturbances(),
                     jittered, false);
}

namespace {
  constexpr double kMinResistance = 1e-6, kMaxResistance = 10.0;
  constexpr double kMinCapacitance = 1e3, kMaxCapacitance = 1e11;
  constexpr double kLogitBound = 12.0;

  double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }
  double logit(double p) {
    p = std::clamp(p, logistic(-kLogitBound), logistic(kLogitBound));
    return std::log(p / (1.0 - p));
  }
}  // namespace

ParameterTransform::ParameterTransform(RcTopology topology)
    : topology_(std::move(topology)) {}

Eigen::Index ParameterTransform::size() const {
  return static_cast<Eigen::Index>(topology_.free_params().size());
}

Eigen::VectorXd ParameterTransform::encode(const RcParameters &params) const {
  const auto &free = topology_.free_params();
  Eigen::VectorXd z(free.size());
  for (size_t i = 0; i < free.size(); ++i) {
    const double v = params.get(free[i]);
    z(i) = kind_of(free[i].field) == ParamKind::Fraction ? logit(v)
                                                         : std::log(v);
  }
  return z;
}

RcParameters ParameterTransform::decode(const Eigen::Ref<const Eigen::VectorXd> &z,
                                        const RcParameters &base) const {
  const auto &free = topology_.free_params();
  if (z.size() < static_cast<Eigen::Index>(free.size()))
    throw InvalidArgument("encoded parameter vector too short");
  RcParameters out = base;
  for (size_t i = 0; i < free.size(); ++i) {
    const double v = kind_of(free[i].field) == ParamKind::Fraction
                         ? logistic(z(i))
                         : std::exp(z(i));
    out.set(free[i], v);
  }
  return out;
}

Bounds ParameterTransform::bounds() const {
  const auto &free = topology_.free_params();
  Bounds b{Eigen::VectorXd(free.size()), Eigen::VectorXd(free.size())};
  for (size_t i = 0; i < free.size(); ++i) {
    switch (kind_of(free[i].field)) {
    case ParamKind::Resistance:
      b.lower(i) = std::log(kMinResistance);
      b.upper(i) = std::log(kMaxResistance);
      break;
    case ParamKind::Capacitance:
      b.lower(i) = std::log(kMinCapacitance);
      b.upper(i) = std::log(kMaxCapacitance);
      break;
    case ParamKind::Fraction:
      b.lower(i) = -kLogitBound;
      b.upper(i) = kLogitBound;
      break;
    }
  }
  return b;
}

RcParameters default_initial_guess(const RcTopology &topology) {
  RcParameters p = RcParameters::zeros(topology);
  p.r_za = 0.01;
  p.r_zw.setConstant(0.005);
  p.r_wa.setConstant(0.01);
  for (int i = 0; i < topology.n_hidden(); ++i)
    for (int j = 0; j < topology.n_hidden(); ++j)
      if (topology.coupled(i, j))
        p.r_w(i, j) = 0.01;
  p.c_z = 5e6;
  p.c_w.setConstant(2e7);
  for (const ParamRef &ref : topology.free_params())
    if (kind_of(ref.field) == ParamKind::Fraction)
      p.set(ref, 0.5);
  return p;
}

RcParameters EstimationProblem::theta(const Eigen::VectorXd &z) const {
  return transform.decode(z.head(transform.size()), base);
}

ThermalState EstimationProblem::x0(const Eigen::VectorXd &z,
                                   const NoiseHyperParams &noise) const {
  if (method == RcMethod::NLS)
    return z.tail(z.size() - transform.size());
  return noise.x0_prior;
}

EstimationProblem make_problem(RcMethod method, const Dataset &data,
                               const RcTopology &topology,
                               const NoiseHyperParams &noise,
                               const RcParameters &initial_guess) {
  require_nonempty(data);
  validate(topology, initial_guess);
  const int dim = topology.state_dim();
  if (method != RcMethod::NLS)
    noise.validate(dim);
  if (method == RcMethod::BE)
    require_batch_cap(data);

  EstimationProblem prob{method, ParameterTransform(topology), initial_guess,
                         {}, {}, {}};
  const Eigen::Index p = prob.transform.size();
  const Bounds theta_bounds = prob.transform.bounds();
  const Eigen::VectorXd theta0 =
      theta_bounds.project(prob.transform.encode(initial_guess));

  // Shared, immutable per-problem data captured by value.
  struct Prepared {
    Eigen::VectorXd y, u;
    DisturbanceSeq w;
    double t_s;
  };
  auto prep = std::make_shared<const Prepared>(
      Prepared{data.t_z, data.q_hvac, data.disturbances(), data.t_s});
  const ParameterTransform transform = prob.transform;
  const RcParameters base = initial_guess;

  auto model = [transform, base, topology, prep](const Eigen::VectorXd &z,
                                                 DiscreteStateSpace &dss) {
    const RcParameters theta = transform.decode(z.head(transform.size()), base);
    try {
      dss = discretize(topology, theta, prep->t_s);
    } catch (const InvalidArgument &) {
      return false;
    }
    return true;
  };

  switch (method) {
  case RcMethod::NLS: {
    const double lo = data.t_z.minCoeff() - 20.0;
    const double hi = data.t_z.maxCoeff() + 20.0;
    prob.bounds.lower.resize(p + dim);
    prob.bounds.upper.resize(p + dim);
    prob.bounds.lower << theta_bounds.lower, Eigen::VectorXd::Constant(dim, lo);
    prob.bounds.upper << theta_bounds.upper, Eigen::VectorXd::Constant(dim, hi);
    prob.initial.resize(p + dim);
    prob.initial << theta0, Eigen::VectorXd::Constant(dim, data.t_z(0));
    prob.objective = [model, prep, p, dim](const Eigen::VectorXd &z) {
      DiscreteStateSpace dss;
      if (!model(z, dss))
        return kUnstableObjective;
      return rollout_sse(dss, z.segment(p, dim), prep->y, prep->u, prep->w);
    };
    break;
  }
  case RcMethod::MLE: {
    prob.bounds = theta_bounds;
    prob.initial = theta0;
    prob.objective = [model, prep, noise](const Eigen::VectorXd &z) {
      DiscreteStateSpace dss;
      if (!model(z, dss))
        return kUnstableObjective;
      KalmanState ks = kalman_init(noise);
      return filter_pass(ks, dss, prep->y, prep->u, prep->w, noise);
    };
    break;
  }
  case RcMethod::BE: {
    prob.bounds = theta_bounds;
    prob.initial = theta0;
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(dim, dim);
    jittered_inverse(noise.q_proc, "process noise covariance");
    jittered_inverse(noise.p0, "initial covariance");
    NoiseHyperParams jittered = noise;
    jittered.q_proc = noise.q_proc + kCovarianceJitter * eye;
    jittered.p0 = noise.p0 + kCovarianceJitter * eye;
    prob.objective = [model, prep, jittered](const Eigen::VectorXd &z) {
      DiscreteStateSpace dss;
      if (!model(z, dss))
        return kUnstableObjective;
      KalmanState ks = kalman_init(jittered);
      return filter_pass(ks, dss, prep->y, prep->u, prep->w, jittered, false);
    };
    break;
  }
  }
  return prob;
}

EstimationResult estimate(RcMethod method, const Dataset &data,
                          const RcTopology &topology,
                          const NoiseHyperParams &noise,
                          const OptimizerConfig &cfg,
                          const RcParameters *initial_guess) {
  cfg.validate();
  if (data.size() < 2)
    throw InvalidArgument("estimation needs at least 2 samples");
  const RcParameters guess =
      initial_guess ? *initial_guess : default_initial_guess(topology);
  const EstimationProblem prob =
      make_problem(method, data, topology, noise, guess);

  EstimationResult best;
  best.method = method;
  best.theta_hat = guess;
  best.x0_hat = prob.x0(prob.initial, noise);

  std::mt19937_64 rng(cfg.rng_seed);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  const Eigen::Index p = prob.transform.size();

  for (int start = 0; start < cfg.multistart_count; ++start) {
    Eigen::VectorXd z0 = prob.initial;
    if (start > 0) {
      for (Eigen::Index i = 0; i < p; ++i)
        z0(i) += jitter(rng);
      z0 = prob.bounds.project(z0);
    }
    MinimizeResult run;
    try {
      run = minimize(prob.objective, z0, prob.bounds, cfg);
    } catch (const InvalidArgument &) {
      ++best.diverged_starts;
      continue;
    }
    if (!std::isfinite(run.value)) {
      ++best.diverged_starts;
      continue;
    }
    if (run.value < best.objective) {
      best.objective = run.value;
      best.theta_hat = prob.theta(run.x);
      best.x0_hat = prob.x0(run.x, noise);
      best.iterations = run.iterations;
      best.converged = run.converged();
      best.objective_history = std::move(run.history);
      best.best_start = start;
    }
  }

  if (best.best_start >= 0 && method == RcMethod::BE) {
    BeProfile prof = be_profile(best.theta_hat, data, noise, topology);
    best.trajectory = std::move(prof.x_traj);
    best.x0_hat = best.trajectory.col(0);
  }
  return best;
}

}  // namespace thermident

// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "test_helpers.hpp"
#include "thermident/errors.hpp"
#include "thermident/plant_sim.hpp"
#include "thermident/thermal_core.hpp"

using namespace thermident;

namespace {

RcParameters r2_example() {
  RcTopology topo = RcTopology::preset(Preset::R2);
  RcParameters p = RcParameters::zeros(topo);
  p.r_za = 10;
  p.r_zw << 5;
  p.r_wa << 8;
  p.c_z = 1000;
  p.c_w << 5000;
  p.a_z = 0.7;
  p.d_z = 0.4;
  return p;
}

RcParameters random_params(const RcTopology &topo, std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> r(0.001, 0.05), c(1e6, 5e7), f(0, 1);
  RcParameters p = RcParameters::zeros(topo);
  for (const ParamRef &ref : topo.present_params()) {
    switch (kind_of(ref.field)) {
    case ParamKind::Resistance: p.set(ref, r(rng)); break;
    case ParamKind::Capacitance: p.set(ref, c(rng)); break;
    case ParamKind::Fraction: p.set(ref, f(rng)); break;
    }
  }
  return p;
}

RcTopology coupled_topology() {
  return RcTopology::custom(3, {{0, 1}, {1, 2}}, true);
}

}  // namespace

TEST(ThermalCore, PresetParameterCounts) {
  EXPECT_EQ(RcTopology::preset(Preset::R1).free_params().size(), 5u);
  EXPECT_EQ(RcTopology::preset(Preset::R2).free_params().size(), 7u);
  EXPECT_EQ(RcTopology::preset(Preset::R4).free_params().size(), 12u);
  EXPECT_EQ(RcTopology::preset(Preset::C1).free_params().size(), 3u);
  EXPECT_EQ(RcTopology::preset(Preset::C2).free_params().size(), 6u);
  for (Preset p : {Preset::R1, Preset::R2, Preset::R4, Preset::C1, Preset::C2})
    EXPECT_EQ(parse_preset(preset_name(p)), p);
}

TEST(ThermalCore, ParamLabelsRoundTrip) {
  const RcTopology topo = coupled_topology();
  for (const ParamRef &ref : topo.present_params())
    EXPECT_EQ(parse_param_label(param_label(ref)), ref) << param_label(ref);
  EXPECT_EQ(param_label({ParamField::RZw, 1}), "r_zw[1]");
  EXPECT_THROW(parse_param_label("r_qq"), InvalidArgument);
}

TEST(ThermalCore, AbsentCouplingCarriesNoParameter) {
  const RcTopology topo = coupled_topology();
  EXPECT_TRUE(topo.is_present({ParamField::RW, 0, 1}));
  EXPECT_FALSE(topo.is_present({ParamField::RW, 0, 2}));
  std::mt19937_64 rng(3);
  RcParameters p = random_params(topo, rng);
  p.r_w(0, 2) = p.r_w(2, 0) = 0.01;
  EXPECT_THROW(validate(topo, p), InvalidArgument);
}

TEST(ThermalCore, SingleNodeSubstitution) {
  const RcTopology topo = RcTopology::preset(Preset::R1);
  RcParameters p = RcParameters::zeros(topo);
  p.r_za = 10;
  p.c_z = 1000;
  p.a_z = 1;
  const ContinuousStateSpace css = build_state_space(topo, p);
  EXPECT_DOUBLE_EQ(css.a_mat(0, 0), -1e-4);
  EXPECT_DOUBLE_EQ(css.b_mat(0), 1e-3);
  EXPECT_DOUBLE_EQ(css.d_mat(0, 0), 1e-4);
  EXPECT_EQ(css.d_mat(0, 1), 0.0);
  EXPECT_EQ(css.d_mat(0, 2), 0.0);
  EXPECT_EQ(css.c_mat(0), 1.0);
}

TEST(ThermalCore, TwoNodeMatchesHandExpansion) {
  const RcTopology topo = RcTopology::preset(Preset::R2);
  const RcParameters p = r2_example();
  const ContinuousStateSpace css = build_state_space(topo, p);
  // C_z dTz = (Ta - Tz)/R_za + (Tw - Tz)/R_zw + a Q + b Qint + d Qsol
  // C_w dTw = (Tz - Tw)/R_zw + (Ta - Tw)/R_wa
  Eigen::Matrix2d a;
  a << -(1.0 / 10 + 1.0 / 5) / 1000, (1.0 / 5) / 1000,
      (1.0 / 5) / 5000, -(1.0 / 5 + 1.0 / 8) / 5000;
  EXPECT_LT((css.a_mat - a).cwiseAbs().maxCoeff(), 1e-18);
  EXPECT_NEAR(css.b_mat(0), 0.7 / 1000, 1e-18);
  EXPECT_EQ(css.b_mat(1), 0.0);
  EXPECT_NEAR(css.d_mat(0, 0), 1.0 / (10 * 1000), 1e-18);
  EXPECT_NEAR(css.d_mat(1, 0), 1.0 / (8 * 5000), 1e-18);
  EXPECT_NEAR(css.d_mat(0, 2), 0.4 / 1000, 1e-18);
  EXPECT_EQ(css.d_mat(1, 1), 0.0);
}

TEST(ThermalCore, RejectsBadParameters) {
  const RcTopology topo = RcTopology::preset(Preset::R2);
  RcParameters p = r2_example();
  p.c_w(0) = 0.0;
  EXPECT_THROW(build_state_space(topo, p), InvalidArgument);
  p = r2_example();
  p.r_za = -1.0;
  EXPECT_THROW(build_state_space(topo, p), InvalidArgument);
  p = r2_example();
  p.a_z = 1.5;
  EXPECT_THROW(build_state_space(topo, p), InvalidArgument);
  EXPECT_THROW(build_state_space(RcTopology::preset(Preset::R4), r2_example()),
               InvalidArgument);
}

TEST(ThermalCore, ZeroSumMetzlerRowsProperty) {
  std::mt19937_64 rng(11);
  const RcTopology topos[] = {RcTopology::preset(Preset::R1), RcTopology::preset(Preset::R2),
                              RcTopology::preset(Preset::R4), coupled_topology()};
  for (int trial = 0; trial < 200; ++trial) {
    const RcTopology &topo = topos[trial % 4];
    const ContinuousStateSpace css = build_state_space(topo, random_params(topo, rng));
    for (int i = 0; i < css.state_dim(); ++i) {
      const double scale = css.a_mat.row(i).cwiseAbs().sum();
      EXPECT_LE(std::abs(css.a_mat.row(i).sum() + css.d_mat(i, 0)), 1e-12 * scale);
      EXPECT_LT(css.a_mat(i, i), 0.0);
      for (int j = 0; j < css.state_dim(); ++j)
        if (j != i) EXPECT_GE(css.a_mat(i, j), 0.0);
    }
    EXPECT_EQ(css.c_mat.sum(), 1.0);
    EXPECT_EQ(css.c_mat(0), 1.0);
  }
}

TEST(ThermalCore, EqualTemperaturesMeanNoConduction) {
  const RcTopology topo = coupled_topology();
  std::mt19937_64 rng(5);
  const ContinuousStateSpace css = build_state_space(topo, random_params(topo, rng));
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(4, 21.3);
  const Eigen::VectorXd dx = css.a_mat * x + css.d_mat.col(0) * 21.3;
  EXPECT_LT(dx.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ThermalCore, EulerDiscretization) {
  ContinuousStateSpace css;
  css.a_mat = Eigen::MatrixXd::Constant(1, 1, -1e-4);
  css.b_mat = Eigen::VectorXd::Constant(1, 1e-3);
  css.d_mat = Eigen::MatrixXd::Zero(1, 3);
  css.d_mat(0, 0) = 1e-4;
  css.c_mat = Eigen::RowVectorXd::Ones(1);
  const DiscreteStateSpace dss = discretize(css, 600);
  EXPECT_DOUBLE_EQ(dss.ad(0, 0), 0.94);
  EXPECT_DOUBLE_EQ(dss.bd(0), 0.6);
  EXPECT_DOUBLE_EQ(dss.dd(0, 0), 0.06);
  EXPECT_FALSE(dss.stability_warning);
  EXPECT_THROW(discretize(css, 0.0), InvalidArgument);
  EXPECT_THROW(discretize(css, -5.0), InvalidArgument);
  EXPECT_TRUE(discretize(css, 1e4).stability_warning);
}

TEST(ThermalCore, StepHandArithmetic) {
  DiscreteStateSpace dss;
  dss.ad = Eigen::MatrixXd::Constant(1, 1, 0.94);
  dss.bd = Eigen::VectorXd::Zero(1);
  dss.dd = Eigen::MatrixXd::Zero(1, 3);
  dss.dd(0, 0) = 0.06;
  dss.c = Eigen::RowVectorXd::Ones(1);
  dss.t_s = 600;
  const StepResult r = step(dss, ThermalState::Constant(1, 20.0), 0.0, {30, 0, 0});
  EXPECT_NEAR(r.next(0), 20.6, 1e-12);
  EXPECT_EQ(r.y, 20.0);
  EXPECT_THROW(step(dss, ThermalState::Constant(1, NAN), 0.0, {30, 0, 0}), InvalidArgument);
  EXPECT_THROW(step(dss, ThermalState::Constant(2, 20), 0.0, {30, 0, 0}), InvalidArgument);
}

TEST(ThermalCore, EquilibriumIsFixedPoint) {
  const RcTopology topo = RcTopology::preset(Preset::R4);
  std::mt19937_64 rng(9);
  const DiscreteStateSpace dss = discretize(topo, random_params(topo, rng), 600);
  const ThermalState x = ThermalState::Constant(4, 24.5);
  const StepResult r = step(dss, x, 0.0, {24.5, 0, 0});
  EXPECT_LT((r.next - x).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ThermalCore, ThreeStepsMatchMatrixPowers) {
  const RcTopology topo = RcTopology::preset(Preset::R2);
  RcParameters p = RcParameters::zeros(topo);
  p.r_za = 0.02; p.r_zw << 0.003; p.r_wa << 0.006;
  p.c_z = 6e6; p.c_w << 2e7; p.a_z = 0.9; p.d_z = 0.35;
  const DiscreteStateSpace dss = discretize(topo, p, 600);
  const ThermalState x0 = ThermalState::Constant(2, 22.0);
  const DisturbanceSample w{30.0, 500.0, 2000.0};
  const double u = -3000.0;

  ThermalState x = x0;
  for (int k = 0; k < 3; ++k) x = step(dss, x, u, w).next;

  // x3 = A^3 x0 + (A^2 + A + I)(B u + D w)
  const Eigen::Matrix2d a = dss.ad;
  const Eigen::Vector2d forcing = dss.bd * u + dss.dd * w.vec();
  const Eigen::Vector2d oracle =
      a * a * a * x0 + (a * a + a + Eigen::Matrix2d::Identity()) * forcing;
  EXPECT_LT((x - oracle).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ThermalCore, SimulateTraceShapeAndBaseCase) {
  const TruthPlant plant = house_truth();
  const DiscreteStateSpace dss = discretize(plant.topology, plant.params, 600);
  const ThermalState x0 = ThermalState::Constant(4, 23.0);
  DisturbanceSeq w(3, 1);
  w.col(0) << 30, 400, 1500;
  Eigen::VectorXd u = Eigen::VectorXd::Constant(1, -2000);
  const SimulationTrace tr = simulate(dss, x0, u, w);
  const StepResult s = step(dss, x0, -2000, {30, 400, 1500});
  EXPECT_EQ(tr.states.cols(), 2);
  EXPECT_EQ(tr.outputs.size(), 1);
  EXPECT_EQ(tr.states.col(1), s.next);
  EXPECT_EQ(tr.outputs(0), s.y);
  EXPECT_THROW(simulate(dss, x0, Eigen::VectorXd::Zero(2), w), InvalidArgument);
}

TEST(ThermalCore, EquilibriumTraceIsConstant) {
  const TruthPlant plant = house_truth();
  const DiscreteStateSpace dss = discretize(plant.topology, plant.params, 600);
  const ThermalState x0 = ThermalState::Constant(4, 27.0);
  DisturbanceSeq w = DisturbanceSeq::Zero(3, 50);
  w.row(0).setConstant(27.0);
  const SimulationTrace tr = simulate(dss, x0, Eigen::VectorXd::Zero(50), w);
  EXPECT_LT((tr.states.colwise() - x0).cwiseAbs().maxCoeff(), 1e-11);
}

TEST(ThermalCore, WeekOnHouseTruthIsFinite) {
  const TruthPlant plant = house_truth();
  WeatherConfig wc;
  wc.n_days = 7;
  wc.noise_std = 1.5;
  const DisturbanceSeq w = gen_weather(wc);
  ASSERT_EQ(w.cols(), 1008);
  const DiscreteStateSpace dss = discretize(plant.topology, plant.params, 600);
  const SimulationTrace tr = simulate(dss, ThermalState::Constant(4, 23.0),
                                      Eigen::VectorXd::Constant(1008, -3000), w);
  EXPECT_EQ(tr.states.cols(), 1009);
  EXPECT_TRUE(tr.states.allFinite());
  EXPECT_FALSE(dss.stability_warning);
}

TEST(ThermalCore, MonotoneDissipationProperty) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> temp(0.0, 40.0);
  for (int trial = 0; trial < 50; ++trial) {
    const RcTopology topo = trial % 2 ? RcTopology::preset(Preset::R4) : coupled_topology();
    const DiscreteStateSpace dss = discretize(topo, random_params(topo, rng), 300);
    if (dss.stability_warning) continue;
    ThermalState x(4);
    for (int i = 0; i < 4; ++i) x(i) = temp(rng);
    const double t_am = temp(rng);
    double prev = (x.array() - t_am).abs().maxCoeff();
    for (int k = 0; k < 300; ++k) {
      x = step(dss, x, 0.0, {t_am, 0, 0}).next;
      const double now = (x.array() - t_am).abs().maxCoeff();
      ASSERT_LE(now, prev + 1e-12);
      prev = now;
    }
  }
}

TEST(ThermalCore, StepIsLinearProperty) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 10.0);
  const RcTopology topo = coupled_topology();
  const DiscreteStateSpace dss = discretize(topo, random_params(topo, rng), 600);
  for (int trial = 0; trial < 100; ++trial) {
    ThermalState x1(4), x2(4);
    for (int i = 0; i < 4; ++i) { x1(i) = n(rng); x2(i) = n(rng); }
    const double u1 = 100 * n(rng), u2 = 100 * n(rng);
    const DisturbanceSample w1{n(rng), 50 * n(rng), 50 * n(rng)};
    const DisturbanceSample w2{n(rng), 50 * n(rng), 50 * n(rng)};
    const DisturbanceSample w12{w1.t_am + w2.t_am, w1.q_int + w2.q_int,
                                w1.q_solar + w2.q_solar};
    const ThermalState lhs = step(dss, x1 + x2, u1 + u2, w12).next;
    const ThermalState rhs = step(dss, x1, u1, w1).next + step(dss, x2, u2, w2).next;
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(ThermalCore, EulerIsFirstOrder) {
  // One node relaxing toward ambient: T(t) = Ta + (T0 - Ta) exp(-t / RC).
  const RcTopology topo = RcTopology::preset(Preset::C1);
  RcParameters p = RcParameters::zeros(topo);
  p.r_za = 0.01;
  p.c_z = 1e6;  // tau = 1e4 s
  const double t0 = 30.0, ta = 20.0, horizon = 86400.0;
  auto max_error = [&](double t_s) {
    const DiscreteStateSpace dss = discretize(topo, p, t_s);
    const auto n = static_cast<Eigen::Index>(horizon / t_s);
    DisturbanceSeq w = DisturbanceSeq::Zero(3, n);
    w.row(0).setConstant(ta);
    const SimulationTrace tr =
        simulate(dss, ThermalState::Constant(1, t0), Eigen::VectorXd::Zero(n), w);
    double err = 0.0;
    for (Eigen::Index k = 0; k <= n; ++k) {
      const double exact = ta + (t0 - ta) * std::exp(-k * t_s / 1e4);
      err = std::max(err, std::abs(tr.states(0, k) - exact));
    }
    return err;
  };
  const double e1 = max_error(600), e2 = max_error(300), e3 = max_error(150);
  EXPECT_NEAR(e1 / e2, 2.0, 0.4);
  EXPECT_NEAR(e2 / e3, 2.0, 0.4);
}

// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include <gtest/gtest.h>

#include "test_helpers.hpp"
#include "thermident/errors.hpp"
#include "thermident/evaluation.hpp"
#include "thermident/plant_sim.hpp"

using namespace thermident;
using thermident::testing::closed_loop_data;

namespace {

struct HouseCase {
  TruthPlant plant = house_truth();
  Dataset data;
  ThermalState x0 = ThermalState::Constant(4, 23.0);
  HouseCase() { data = closed_loop_data(plant, 7); }
  RcModel model() const { return {plant.topology, plant.params}; }
};

Sim3Options policy_22() {
  Sim3Options o;
  o.thermostat = house_thermostat(22.0);
  o.transient_samples = 144;
  return o;
}

}  // namespace

TEST(Evaluation, AccuracyExamples) {
  EXPECT_EQ(average_accuracy(Eigen::Vector2d(20, 25), Eigen::Vector2d(20, 25)), 100.0);
  EXPECT_NEAR(average_accuracy(Eigen::Vector2d(20, 25), Eigen::Vector2d(19, 26)), 95.5, 1e-12);
  EXPECT_NEAR(average_accuracy(Eigen::VectorXd::Constant(1, 20), Eigen::VectorXd::Constant(1, 40)),
              0.0, 1e-12);
  EXPECT_THROW(average_accuracy(Eigen::Vector2d(0, 25), Eigen::Vector2d(1, 25)), MetricUndefined);
  EXPECT_THROW(average_accuracy(Eigen::VectorXd(0), Eigen::VectorXd(0)), InvalidArgument);
  EXPECT_THROW(average_accuracy(Eigen::Vector2d(1, 2), Eigen::Vector3d(1, 2, 3)),
               InvalidArgument);
  EXPECT_LT(average_accuracy(Eigen::Vector2d(20, 25), Eigen::Vector2d(20, 25.0000001)), 100.0);
}

TEST(Evaluation, TruthModelIsExact) {
  const HouseCase c;
  const SimOutcome s1 = run_sim1(c.model(), c.data, c.x0);
  const SimOutcome s2 = run_sim2(c.model(), c.data, c.x0);
  EXPECT_NEAR(*s1.report.average_accuracy, 100.0, 1e-6);
  EXPECT_NEAR(*s2.report.average_accuracy, 100.0, 1e-6);
  EXPECT_FALSE(s2.report.divergent);
  EXPECT_LT((s2.trace.y_hat.tail(1007) - c.data.t_z.tail(1007)).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_TRUE(std::isnan(s2.trace.y_hat(0)));
  EXPECT_EQ(s1.report.architecture, "custom");
  EXPECT_FALSE(s1.report.deadband_occupancy.has_value());
}

TEST(Evaluation, ConstantBaselineScoresLower) {
  const HouseCase c;
  const SimOutcome fitted = run_sim1(c.model(), c.data, c.x0);
  const Eigen::VectorXd baseline = Eigen::VectorXd::Constant(1007, c.data.t_z.mean());
  EXPECT_LT(average_accuracy(c.data.t_z.tail(1007), baseline), *fitted.report.average_accuracy);
}

TEST(Evaluation, HiddenStateOffsetDegradesGracefully) {
  const HouseCase c;
  ThermalState off = c.x0;
  off.tail(3).array() += 2.0;
  const SimOutcome exact = run_sim2(c.model(), c.data, c.x0);
  const SimOutcome shifted = run_sim2(c.model(), c.data, off);
  EXPECT_LT(*shifted.report.average_accuracy, *exact.report.average_accuracy);
  EXPECT_GT(*shifted.report.average_accuracy, 90.0);
  EXPECT_FALSE(shifted.report.divergent);
}

TEST(Evaluation, SimOneAtLeastSimTwoOnShippedPlant) {
  const HouseCase c;
  RcModel approx = c.model();
  approx.params.r_za *= 1.2;
  approx.params.c_z *= 0.8;
  const double s1 = *run_sim1(approx, c.data).report.average_accuracy;
  const double s2 = *run_sim2(approx, c.data).report.average_accuracy;
  EXPECT_GE(s1, s2);
}

TEST(Evaluation, DivergentRolloutFlagged) {
  const HouseCase c;
  RcModel bad = c.model();
  bad.params.c_z = 1e4;  // Euler unstable at 600 s
  const SimOutcome s = run_sim2(bad, c.data);
  EXPECT_TRUE(s.report.divergent);
  ASSERT_TRUE(s.report.average_accuracy.has_value());
  EXPECT_LT(*s.report.average_accuracy, 0.0);
}

TEST(Evaluation, ClosedLoopTruthAndAblation) {
  const HouseCase c;
  const SimOutcome truth = run_sim3(c.model(), c.data, policy_22(), c.x0);
  ASSERT_TRUE(truth.report.deadband_occupancy.has_value());
  EXPECT_FALSE(truth.report.average_accuracy.has_value());
  EXPECT_GE(*truth.report.deadband_occupancy, 0.95);

  RcModel blind = c.model();
  blind.params.a_z = 0.0;
  const SimOutcome ablated = run_sim3(blind, c.data, policy_22(), c.x0);
  EXPECT_GE(*truth.report.deadband_occupancy - *ablated.report.deadband_occupancy, 0.3);
}

TEST(Evaluation, ClosedLoopTraceCarriesBand) {
  const HouseCase c;
  const SimOutcome s = run_sim3(c.model(), c.data, policy_22(), c.x0);
  EXPECT_EQ(s.trace.band_lo, 21.0);
  EXPECT_EQ(s.trace.band_hi, 23.0);
  EXPECT_TRUE(s.trace.y_ref.array().isNaN().all());
  ASSERT_EQ(s.trace.power.size(), 1008u);
  for (Eigen::Index k = 0; k < 1008; ++k)
    EXPECT_DOUBLE_EQ(s.trace.power[k].p_hvac, std::abs(s.trace.q_hvac(k)) / 3.0);
}

TEST(Evaluation, AlsRunsAllThreeRegimes) {
  const Dataset train = closed_loop_data(house_truth(), 21, 600.0, 1, 0.05);
  const Dataset test = closed_loop_data(house_truth(), 7, 600.0, 2, 0.05);
  AlmonModel m = lls_fit(build_design(train, almon_preset(AlmonPreset::RA)));
  m.preset = "R-A";
  const SimOutcome s1 = run_sim1(m, test);
  const SimOutcome s2 = run_sim2(m, test);
  const SimOutcome s3 = run_sim3(m, test, policy_22());
  EXPECT_EQ(s1.report.architecture, "R-A");
  EXPECT_GE(*s1.report.average_accuracy, 99.0);
  EXPECT_GE(*s2.report.average_accuracy, 97.0);
  EXPECT_GE(*s3.report.deadband_occupancy, 0.8);
  // History samples carry no prediction.
  EXPECT_TRUE(std::isnan(s2.trace.y_hat(17)));
  EXPECT_FALSE(std::isnan(s2.trace.y_hat(18)));
  EXPECT_EQ(s3.trace.y_hat.head(18), test.t_z.head(18));
}

TEST(Evaluation, Deterministic) {
  const HouseCase c;
  const SimOutcome a = run_sim3(c.model(), c.data, policy_22());
  const SimOutcome b = run_sim3(c.model(), c.data, policy_22());
  EXPECT_EQ(a.trace.y_hat, b.trace.y_hat);
  EXPECT_EQ(*a.report.deadband_occupancy, *b.report.deadband_occupancy);
}

TEST(Evaluation, SimNames) {
  for (SimType s : {SimType::Sim1, SimType::Sim2, SimType::Sim3})
    EXPECT_EQ(parse_sim_type(sim_name(s)), s);
  EXPECT_THROW(parse_sim_type("Sim4"), InvalidArgument);
}

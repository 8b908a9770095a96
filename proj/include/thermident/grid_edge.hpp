// SPDX-License-Identifier: Apache-2.0
//
// Building electrical quantities at the grid edge: HVAC power from the heat
// transfer rate, total active power and reactive power from the power factor.

#pragma once

#include "thermident/thermal_core.hpp"

namespace thermident {

struct PowerParams {
  double cop = 3.0;           // heat moved per unit of electrical power
  double p_other = 0.0;       // W, non-HVAC load
  double power_factor = 1.0;  // (0, 1]

  void validate() const;
};

struct PowerSample {
  double p_hvac = 0.0;      // W
  double p_total = 0.0;     // W
  double q_reactive = 0.0;  // var
};

// |q_hvac| / cop: heating and cooling draw the same power per watt moved.
double hvac_power(double q_hvac, const PowerParams &params);

// p_total = p_hvac + p_other, q_reactive = p_total * tan(acos(pf)).
PowerSample power_sample(double q_hvac, double p_other, double pf,
                         const PowerParams &params);

struct GridEdgeStep {
  ThermalState next;
  double y = 0.0;
  PowerSample power;
};

// The HVAC heat rate is the policy command itself; p_other and the power
// factor are taken from `params`.
GridEdgeStep grid_edge_step(const ThermalState &x, double q_command,
                            const DisturbanceSample &w,
                            const DiscreteStateSpace &dss,
                            const PowerParams &params);

}  // namespace thermident

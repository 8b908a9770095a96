// SPDX-License-Identifier: Apache-2.0

#include "thermident/grid_edge.hpp"

#include <cmath>

#include "thermident/errors.hpp"

namespace thermident {

namespace {
  void check_pf(double pf) {
    if (!(pf > 0.0 && pf <= 1.0))
      throw InvalidArgument("power factor must lie in (0, 1]");
  }
}  // namespace

void PowerParams::validate() const {
  if (!(cop > 0.0) || !std::isfinite(cop))
    throw InvalidArgument("COP must be positive");
  check_pf(power_factor);
  if (!std::isfinite(p_other))
    throw InvalidArgument("p_other must be finite");
}

double hvac_power(double q_hvac, const PowerParams &params) {
  if (!(params.cop > 0.0))
    throw InvalidArgument("COP must be positive");
  return std::abs(q_hvac) / params.cop;
}

PowerSample power_sample(double q_hvac, double p_other, double pf,
                         const PowerParams &params) {
  check_pf(pf);
  PowerSample s;
  s.p_hvac = hvac_power(q_hvac, params);
  s.p_total = s.p_hvac + p_other;
  // tan(acos(pf)) = sqrt((1 - pf)(1 + pf)) / pf
  s.q_reactive = s.p_total * std::sqrt((1.0 - pf) * (1.0 + pf)) / pf;
  return s;
}

GridEdgeStep grid_edge_step(const ThermalState &x, double q_command,
                            const DisturbanceSample &w,
                            const DiscreteStateSpace &dss,
                            const PowerParams &params) {
  params.validate();
  const StepResult thermal = step(dss, x, q_command, w);
  return {thermal.next, thermal.y,
          power_sample(q_command, params.p_other, params.power_factor, params)};
}

}  // namespace thermident

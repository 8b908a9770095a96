// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "thermident/thermal_core.hpp"

namespace thermident {

// Seconds since the Unix epoch for 2001-06-01T00:00:00Z. Scenario day 1 is
// this date; calendars carry no information in the synthetic scenarios.
std::int64_t scenario_epoch();

std::string format_iso8601(std::int64_t epoch_seconds);
// Accepts "YYYY-MM-DDTHH:MM:SS" with optional trailing 'Z'. Throws
// DataFormatError.
std::int64_t parse_iso8601(std::string_view text);

// Aligned samples of one building at a fixed period. Row k holds the
// measured zone temperature y(k), the HVAC command applied over [k, k+1)
// and the disturbances over the same interval.
struct Dataset {
  double t_s = 600.0;
  std::int64_t start_epoch = 0;
  Eigen::VectorXd t_z;
  Eigen::VectorXd q_hvac;
  Eigen::VectorXd p_c;
  Eigen::VectorXd p_h;
  Eigen::VectorXd t_am;
  Eigen::VectorXd q_int;
  Eigen::VectorXd q_solar;
  // '#'-comment metadata, kept in file order.
  std::vector<std::pair<std::string, std::string>> metadata;

  Eigen::Index size() const { return t_z.size(); }
  int samples_per_day() const;
  std::int64_t timestamp(Eigen::Index k) const;

  DisturbanceSeq disturbances() const;

  Dataset slice(Eigen::Index begin, Eigen::Index count) const;
  // Days are zero-based offsets from the first sample.
  Dataset days(int first_day, int n_days) const;

  std::string meta(std::string_view key, std::string_view fallback = {}) const;
  void set_meta(std::string key, std::string value);

  // Column lengths, finiteness, p_c * p_h == 0. Throws DataFormatError.
  void validate() const;
};

}  // namespace thermident

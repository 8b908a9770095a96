// SPDX-License-Identifier: Apache-2.0

#include "thermident/dataset.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "thermident/errors.hpp"

namespace thermident {

std::int64_t scenario_epoch() {
  using namespace std::chrono;
  const sys_days day = year{2001} / June / 1;
  return duration_cast<seconds>(day.time_since_epoch()).count();
}

std::string format_iso8601(std::int64_t epoch_seconds) {
  using namespace std::chrono;
  const sys_seconds tp{seconds{epoch_seconds}};
  const sys_days day = floor<days>(tp);
  const year_month_day ymd{day};
  const hh_mm_ss hms{tp - day};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02d",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()),
                static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

std::int64_t parse_iso8601(std::string_view text) {
  using namespace std::chrono;
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  char tail = 0;
  const std::string str(text);
  const int n = std::sscanf(str.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%c", &y, &mo,
                            &d, &h, &mi, &s, &tail);
  if (n < 6 || (n == 7 && tail != 'Z') || str.size() > 20)
    throw DataFormatError("malformed ISO-8601 timestamp '" + str + "'");
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59 || h < 0 || mi < 0 || s < 0)
    throw DataFormatError("invalid calendar timestamp '" + str + "'");
  const sys_days sd{ymd};
  return duration_cast<seconds>(sd.time_since_epoch()).count() + h * 3600 +
         mi * 60 + s;
}

int Dataset::samples_per_day() const {
  const double per_day = 86400.0 / t_s;
  const int n = static_cast<int>(std::lround(per_day));
  if (std::abs(per_day - n) > 1e-9)
    throw InvalidArgument("sample period does not divide one day");
  return n;
}

std::int64_t Dataset::timestamp(Eigen::Index k) const {
  return start_epoch + static_cast<std::int64_t>(std::llround(k * t_s));
}

DisturbanceSeq Dataset::disturbances() const {
  DisturbanceSeq w(3, size());
  w.row(0) = t_am.transpose();
  w.row(1) = q_int.transpose();
  w.row(2) = q_solar.transpose();
  return w;
}

Dataset Dataset::slice(Eigen::Index begin, Eigen::Index count) const {
  if (begin < 0 || count < 0 || begin + count > size())
    throw InvalidArgument("dataset slice [" + std::to_string(begin) + ", " +
                          std::to_string(begin + count) + ") out of range");
  Dataset out;
  out.t_s = t_s;
  out.start_epoch = timestamp(begin);
  out.t_z = t_z.segment(begin, count);
  out.q_hvac = q_hvac.segment(begin, count);
  out.p_c = p_c.segment(begin, count);
  out.p_h = p_h.segment(begin, count);
  out.t_am = t_am.segment(begin, count);
  out.q_int = q_int.segment(begin, count);
  out.q_solar = q_solar.segment(begin, count);
  out.metadata = metadata;
  return out;
}

Dataset Dataset::days(int first_day, int n_days) const {
  const Eigen::Index per_day = samples_per_day();
  return slice(first_day * per_day, n_days * per_day);
}

std::string Dataset::meta(std::string_view key,
                          std::string_view fallback) const {
  for (const auto &[k, v] : metadata)
    if (k == key)
      return v;
  return std::string(fallback);
}

void Dataset::set_meta(std::string key, std::string value) {
  for (auto &[k, v] : metadata) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  metadata.emplace_back(std::move(key), std::move(value));
}

void Dataset::validate() const {
  if (!(t_s > 0.0))
    throw DataFormatError("sample period must be positive");
  const Eigen::Index n = size();
  const std::pair<const char *, const Eigen::VectorXd *> cols[] = {
      {"t_z", &t_z},   {"q_hvac", &q_hvac}, {"p_c", &p_c},
      {"p_h", &p_h},   {"t_am", &t_am},     {"q_int", &q_int},
      {"q_solar", &q_solar}};
  for (const auto &[name, col] : cols) {
    if (col->size() != n)
      throw DataFormatError(std::string("column ") + name +
                            " length differs from t_z");
    for (Eigen::Index k = 0; k < n; ++k)
      if (!std::isfinite((*col)(k)))
        throw DataFormatError(std::string("non-finite value in column ") +
                              name + " at row " + std::to_string(k));
  }
  for (Eigen::Index k = 0; k < n; ++k)
    if (p_c(k) * p_h(k) != 0.0)
      throw DataFormatError("p_c and p_h both nonzero at row " +
                            std::to_string(k));
}

}  // namespace thermident

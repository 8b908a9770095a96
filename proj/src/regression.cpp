// SPDX-License-Identifier: Apache-2.0

#include "thermident/regression.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "thermident/errors.hpp"

namespace thermident {

std::string_view regressor_name(Regressor r) {
  switch (r) {
  case Regressor::Tz:
    return "T_z";
  case Regressor::Pc:
    return "P_c";
  case Regressor::Ph:
    return "P_h";
  case Regressor::Dc:
    return "D_c";
  case Regressor::Dh:
    return "D_h";
  }
  return "T_z";
}

Regressor parse_regressor(std::string_view name) {
  for (Regressor r :
       {Regressor::Tz, Regressor::Pc, Regressor::Ph, Regressor::Dc, Regressor::Dh})
    if (regressor_name(r) == name)
      return r;
  throw InvalidArgument("unknown regressor '" + std::string(name) + "'");
}

void AlmonSpec::validate() const {
  if (start_lag < 0 || end_lag < start_lag)
    throw InvalidArgument(std::string(regressor_name(regressor)) +
                          ": lags must satisfy 0 <= l <= t");
  if (poly_order < 0 || poly_order >= lag_count())
    throw InvalidArgument(std::string(regressor_name(regressor)) +
                          ": polynomial order must satisfy 0 <= q < t-l+1");
}

std::string_view almon_preset_name(AlmonPreset p) {
  return p == AlmonPreset::RA ? "R-A" : "C-A";
}

AlmonPreset parse_almon_preset(std::string_view name) {
  if (name == "R-A")
    return AlmonPreset::RA;
  if (name == "C-A")
    return AlmonPreset::CA;
  throw InvalidArgument("unknown regression architecture '" +
                        std::string(name) + "'");
}

std::vector<AlmonSpec> almon_preset(AlmonPreset p) {
  using R = Regressor;
  if (p == AlmonPreset::RA)
    return {{R::Tz, 6, 14, 2}, {R::Pc, 0, 11, 2}, {R::Dc, 6, 17, 1},
            {R::Dh, 6, 17, 1}};
  return {{R::Tz, 6, 14, 2}, {R::Pc, 0, 8, 2}, {R::Ph, 0, 8, 2},
          {R::Dc, 6, 17, 1}, {R::Dh, 6, 17, 1}};
}

DegreeDays degree_days(double t_am) {
  return {std::max(0.0, t_am - kDegreeDayThreshold),
          std::max(0.0, kDegreeDayThreshold - t_am)};
}

Eigen::MatrixXd almon_basis(int start_lag, int end_lag, int poly_order) {
  AlmonSpec{Regressor::Tz, start_lag, end_lag, poly_order}.validate();
  Eigen::MatrixXd m(end_lag - start_lag + 1, poly_order + 1);
  for (int i = start_lag; i <= end_lag; ++i) {
    double power = 1.0;
    for (int j = 0; j <= poly_order; ++j) {
      m(i - start_lag, j) = power;
      power *= i;
    }
  }
  return m;
}

Eigen::VectorXd transform_regressor(const Eigen::Ref<const Eigen::VectorXd> &z,
                                    const AlmonSpec &spec, Eigen::Index k) {
  spec.validate();
  if (k < spec.end_lag || k >= z.size())
    throw InvalidArgument("insufficient history for lag " +
                          std::to_string(spec.end_lag) + " at index " +
                          std::to_string(k));
  Eigen::VectorXd out = Eigen::VectorXd::Zero(spec.poly_order + 1);
  for (int i = spec.start_lag; i <= spec.end_lag; ++i) {
    const double v = z(k - i);
    double power = 1.0;
    for (int j = 0; j <= spec.poly_order; ++j) {
      out(j) += power * v;
      power *= i;
    }
  }
  return out;
}

RegressorSeries RegressorSeries::from_dataset(const Dataset &data) {
  RegressorSeries s;
  s.t_z = data.t_z;
  s.p_c = data.p_c;
  s.p_h = data.p_h;
  s.d_c.resize(data.size());
  s.d_h.resize(data.size());
  for (Eigen::Index k = 0; k < data.size(); ++k) {
    const DegreeDays dd = degree_days(data.t_am(k));
    s.d_c(k) = dd.cooling;
    s.d_h(k) = dd.heating;
  }
  return s;
}

const Eigen::VectorXd &RegressorSeries::get(Regressor r) const {
  switch (r) {
  case Regressor::Tz:
    return t_z;
  case Regressor::Pc:
    return p_c;
  case Regressor::Ph:
    return p_h;
  case Regressor::Dc:
    return d_c;
  case Regressor::Dh:
    return d_h;
  }
  return t_z;
}

int burn_in(const std::vector<AlmonSpec> &specs) {
  int out = 0;
  for (const auto &s : specs)
    out = std::max(out, s.end_lag);
  return out;
}

DesignMatrix build_design(const RegressorSeries &series,
                          const std::vector<AlmonSpec> &specs) {
  if (specs.empty())
    throw InvalidArgument("regression needs at least one regressor block");
  DesignMatrix d;
  d.specs = specs;
  d.burn_in = burn_in(specs);
  int cols = 1;
  for (const auto &s : specs) {
    s.validate();
    d.block_offsets.push_back(cols);
    cols += s.poly_order + 1;
  }
  const Eigen::Index total = series.t_z.size();
  const Eigen::Index rows = total - d.burn_in - 1;
  if (rows < 1)
    throw InvalidArgument("dataset of " + std::to_string(total) +
                          " samples is shorter than the burn-in of " +
                          std::to_string(d.burn_in) + " + 1");
  d.x.resize(rows, cols);
  d.target.resize(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Eigen::Index k = d.burn_in + r;
    d.x(r, 0) = 1.0;
    for (size_t b = 0; b < specs.size(); ++b)
      d.x.row(r).segment(d.block_offsets[b], specs[b].poly_order + 1) =
          transform_regressor(series.get(specs[b].regressor), specs[b], k)
              .transpose();
    d.target(r) = series.t_z(k + 1);
  }
  if (!d.x.allFinite() || !d.target.allFinite())
    throw InvalidArgument("design matrix contains non-finite entries");
  return d;
}

DesignMatrix build_design(const Dataset &data,
                          const std::vector<AlmonSpec> &specs) {
  return build_design(RegressorSeries::from_dataset(data), specs);
}

double AlmonModel::predict(const RegressorSeries &series, Eigen::Index k) const {
  double out = alpha0;
  for (size_t b = 0; b < specs.size(); ++b) {
    const Eigen::VectorXd &z = series.get(specs[b].regressor);
    for (int i = specs[b].start_lag; i <= specs[b].end_lag; ++i)
      out += zeta[b](i - specs[b].start_lag) * z(k - i);
  }
  return out;
}

namespace {
  std::string block_label(const DesignMatrix &d, Eigen::Index col) {
    if (col == 0)
      return "intercept";
    for (size_t b = d.specs.size(); b-- > 0;)
      if (col >= d.block_offsets[b])
        return std::string(regressor_name(d.specs[b].regressor)) + " (order " +
               std::to_string(col - d.block_offsets[b]) + ")";
    return "unknown";
  }
}  // namespace

AlmonModel lls_fit(const DesignMatrix &design) {
  const Eigen::Index rows = design.x.rows(), cols = design.x.cols();
  if (rows < cols)
    throw RankDeficientError("design has fewer rows (" + std::to_string(rows) +
                             ") than columns (" + std::to_string(cols) + ")");

  Eigen::VectorXd scale = design.x.colwise().norm().transpose();
  for (Eigen::Index c = 0; c < cols; ++c)
    if (!(scale(c) > 0.0))
      throw RankDeficientError("regressor block " + block_label(design, c) +
                               " is identically zero");
  const Eigen::MatrixXd scaled = design.x * scale.cwiseInverse().asDiagonal();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
  qr.setThreshold(1e-11);
  if (qr.rank() < cols) {
    const Eigen::Index dependent = qr.colsPermutation().indices()(qr.rank());
    throw RankDeficientError("design is rank deficient: column of block " +
                             block_label(design, dependent) +
                             " is linearly dependent on the others");
  }
  const Eigen::VectorXd beta =
      qr.solve(design.target).cwiseQuotient(scale);

  AlmonModel m;
  m.specs = design.specs;
  m.alpha0 = beta(0);
  for (size_t b = 0; b < design.specs.size(); ++b) {
    const AlmonSpec &s = design.specs[b];
    m.omega.push_back(beta.segment(design.block_offsets[b], s.poly_order + 1));
    m.zeta.push_back(almon_basis(s.start_lag, s.end_lag, s.poly_order) *
                     m.omega.back());
  }
  return m;
}

Eigen::VectorXd predict_one_step(const AlmonModel &model,
                                 const RegressorSeries &series) {
  const int b = model.burn_in();
  const Eigen::Index total = series.t_z.size();
  if (total < b + 2)
    throw InvalidArgument("series shorter than the model burn-in");
  Eigen::VectorXd out(total - b - 1);
  for (Eigen::Index k = b; k + 1 < total; ++k)
    out(k - b) = model.predict(series, k);
  return out;
}

Eigen::VectorXd simulate_regression(const AlmonModel &model,
                                    const Eigen::Ref<const Eigen::VectorXd> &history,
                                    const Eigen::Ref<const Eigen::VectorXd> &p_c,
                                    const Eigen::Ref<const Eigen::VectorXd> &p_h,
                                    const Eigen::Ref<const Eigen::VectorXd> &t_am) {
  const Eigen::Index total = t_am.size();
  const Eigen::Index h = history.size();
  if (p_c.size() != total || p_h.size() != total)
    throw InvalidArgument("input sequences differ in length");
  if (h < model.burn_in() + 1)
    throw InvalidArgument("history of " + std::to_string(h) +
                          " samples does not cover the burn-in of " +
                          std::to_string(model.burn_in()));
  if (h > total)
    throw InvalidArgument("history longer than the input horizon");

  RegressorSeries s;
  s.t_z = Eigen::VectorXd::Zero(total);
  s.t_z.head(h) = history;
  s.p_c = p_c;
  s.p_h = p_h;
  s.d_c.resize(total);
  s.d_h.resize(total);
  for (Eigen::Index k = 0; k < total; ++k) {
    const DegreeDays dd = degree_days(t_am(k));
    s.d_c(k) = dd.cooling;
    s.d_h(k) = dd.heating;
  }
  for (Eigen::Index k = h - 1; k + 1 < total; ++k)
    s.t_z(k + 1) = model.predict(s, k);
  return s.t_z;
}

}  // namespace thermident

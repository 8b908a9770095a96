// SPDX-License-Identifier: Apache-2.0

#include "thermident/thermal_core.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "thermident/errors.hpp"

namespace thermident {

std::string_view preset_name(Preset p) {
  switch (p) {
  case Preset::R1:
    return "R-1";
  case Preset::R2:
    return "R-2";
  case Preset::R4:
    return "R-4";
  case Preset::C1:
    return "C-1";
  case Preset::C2:
    return "C-2";
  case Preset::Custom:
    return "custom";
  }
  return "custom";
}

Preset parse_preset(std::string_view name) {
  for (Preset p : {Preset::R1, Preset::R2, Preset::R4, Preset::C1, Preset::C2,
                   Preset::Custom}) {
    if (preset_name(p) == name)
      return p;
  }
  throw InvalidArgument("unknown RC architecture '" + std::string(name) + "'");
}

ParamKind kind_of(ParamField f) {
  switch (f) {
  case ParamField::RZa:
  case ParamField::RZw:
  case ParamField::RW:
  case ParamField::RWa:
    return ParamKind::Resistance;
  case ParamField::Cz:
  case ParamField::Cw:
    return ParamKind::Capacitance;
  default:
    return ParamKind::Fraction;
  }
}

namespace {
  struct FieldName {
    ParamField field;
    const char *name;
    int indices;
  };

  constexpr FieldName kFieldNames[] = {
      {ParamField::RZa, "r_za", 0}, {ParamField::RZw, "r_zw", 1},
      {ParamField::RW, "r_w", 2},   {ParamField::RWa, "r_wa", 1},
      {ParamField::Cz, "c_z", 0},   {ParamField::Cw, "c_w", 1},
      {ParamField::Az, "a_z", 0},   {ParamField::Bz, "b_z", 0},
      {ParamField::Bw, "b_w", 1},   {ParamField::Dz, "d_z", 0},
      {ParamField::Dw, "d_w", 1},
  };

  const FieldName &field_entry(ParamField f) {
    for (const auto &e : kFieldNames)
      if (e.field == f)
        return e;
    throw InvalidArgument("unknown parameter field");
  }
}  // namespace

std::string param_label(ParamRef ref) {
  const auto &e = field_entry(ref.field);
  std::string out = e.name;
  if (e.indices >= 1)
    out += "[" + std::to_string(ref.i) + "]";
  if (e.indices == 2)
    out += "[" + std::to_string(ref.j) + "]";
  return out;
}

ParamRef parse_param_label(std::string_view label) {
  const auto bracket = label.find('[');
  const std::string_view base = label.substr(0, bracket);
  for (const auto &e : kFieldNames) {
    if (base != e.name)
      continue;
    ParamRef ref{e.field, 0, 0};
    int parsed = 0;
    if (bracket != std::string_view::npos) {
      const std::string rest(label.substr(bracket));
      if (e.indices == 1)
        parsed = std::sscanf(rest.c_str(), "[%d]", &ref.i);
      else if (e.indices == 2)
        parsed = std::sscanf(rest.c_str(), "[%d][%d]", &ref.i, &ref.j);
    }
    if (parsed != e.indices)
      break;
    return ref;
  }
  throw InvalidArgument("unknown parameter label '" + std::string(label) +
                        "'");
}

RcTopology RcTopology::custom(int n_hidden,
                              std::vector<std::pair<int, int>> coupled_pairs,
                              bool gains_on_walls) {
  if (n_hidden < 0)
    throw InvalidArgument("n_hidden must be >= 0");
  RcTopology t;
  t.n_hidden_ = n_hidden;
  t.coupled_.assign(static_cast<size_t>(n_hidden * n_hidden), 0);
  for (auto [i, j] : coupled_pairs) {
    if (i < 0 || j < 0 || i >= n_hidden || j >= n_hidden || i == j)
      throw InvalidArgument("invalid wall-wall coupling pair");
    t.coupled_[i * n_hidden + j] = 1;
    t.coupled_[j * n_hidden + i] = 1;
  }
  t.gains_on_walls_ = gains_on_walls;
  t.preset_ = Preset::Custom;
  t.free_ = t.present_params();
  return t;
}

RcTopology RcTopology::preset(Preset p) {
  using F = ParamField;
  RcTopology t;
  t.preset_ = p;
  auto walls = [&t](int n) {
    t.n_hidden_ = n;
    t.coupled_.assign(static_cast<size_t>(n * n), 0);
  };
  switch (p) {
  case Preset::R1:
    walls(0);
    t.free_ = {{F::RZa}, {F::Cz}, {F::Az}, {F::Bz}, {F::Dz}};
    break;
  case Preset::R2:
    walls(1);
    t.free_ = {{F::RZa}, {F::RZw}, {F::RWa}, {F::Cz},
               {F::Cw},  {F::Az},  {F::Dz}};
    break;
  case Preset::R4:
    walls(3);
    t.free_ = {{F::RZa}};
    for (int i = 0; i < 3; ++i)
      t.free_.push_back({F::RZw, i});
    for (int i = 0; i < 3; ++i)
      t.free_.push_back({F::RWa, i});
    t.free_.push_back({F::Cz});
    for (int i = 0; i < 3; ++i)
      t.free_.push_back({F::Cw, i});
    t.free_.push_back({F::Az});
    break;
  case Preset::C1:
    walls(0);
    t.free_ = {{F::RZa}, {F::Cz}, {F::Az}};
    break;
  case Preset::C2:
    walls(1);
    t.free_ = {{F::RZa}, {F::RZw}, {F::RWa}, {F::Cz}, {F::Cw}, {F::Az}};
    break;
  case Preset::Custom:
    return custom(0, {}, false);
  }
  return t;
}

bool RcTopology::coupled(int i, int j) const {
  if (i < 0 || j < 0 || i >= n_hidden_ || j >= n_hidden_)
    return false;
  return coupled_[i * n_hidden_ + j] != 0;
}

std::vector<ParamRef> RcTopology::present_params() const {
  using F = ParamField;
  std::vector<ParamRef> out{{F::RZa}};
  for (int i = 0; i < n_hidden_; ++i)
    out.push_back({F::RZw, i});
  for (int i = 0; i < n_hidden_; ++i)
    for (int j = i + 1; j < n_hidden_; ++j)
      if (coupled(i, j))
        out.push_back({F::RW, i, j});
  for (int i = 0; i < n_hidden_; ++i)
    out.push_back({F::RWa, i});
  out.push_back({F::Cz});
  for (int i = 0; i < n_hidden_; ++i)
    out.push_back({F::Cw, i});
  out.push_back({F::Az});
  out.push_back({F::Bz});
  if (gains_on_walls_)
    for (int i = 0; i < n_hidden_; ++i)
      out.push_back({F::Bw, i});
  out.push_back({F::Dz});
  if (gains_on_walls_)
    for (int i = 0; i < n_hidden_; ++i)
      out.push_back({F::Dw, i});
  return out;
}

bool RcTopology::is_present(ParamRef ref) const {
  for (const auto &p : present_params())
    if (p == ref || (ref.field == ParamField::RW && p.field == ParamField::RW &&
                     p.i == ref.j && p.j == ref.i))
      return true;
  return false;
}

RcParameters RcParameters::zeros(const RcTopology &topology) {
  const int n = topology.n_hidden();
  RcParameters p;
  p.r_zw = Eigen::VectorXd::Zero(n);
  p.r_w = Eigen::MatrixXd::Zero(n, n);
  p.r_wa = Eigen::VectorXd::Zero(n);
  p.c_w = Eigen::VectorXd::Zero(n);
  p.b_w = Eigen::VectorXd::Zero(n);
  p.d_w = Eigen::VectorXd::Zero(n);
  return p;
}

double RcParameters::get(ParamRef ref) const {
  switch (ref.field) {
  case ParamField::RZa:
    return r_za;
  case ParamField::RZw:
    return r_zw(ref.i);
  case ParamField::RW:
    return r_w(ref.i, ref.j);
  case ParamField::RWa:
    return r_wa(ref.i);
  case ParamField::Cz:
    return c_z;
  case ParamField::Cw:
    return c_w(ref.i);
  case ParamField::Az:
    return a_z;
  case ParamField::Bz:
    return b_z;
  case ParamField::Bw:
    return b_w(ref.i);
  case ParamField::Dz:
    return d_z;
  case ParamField::Dw:
    return d_w(ref.i);
  }
  return 0.0;
}

void RcParameters::set(ParamRef ref, double value) {
  switch (ref.field) {
  case ParamField::RZa:
    r_za = value;
    break;
  case ParamField::RZw:
    r_zw(ref.i) = value;
    break;
  case ParamField::RW:
    r_w(ref.i, ref.j) = value;
    r_w(ref.j, ref.i) = value;
    break;
  case ParamField::RWa:
    r_wa(ref.i) = value;
    break;
  case ParamField::Cz:
    c_z = value;
    break;
  case ParamField::Cw:
    c_w(ref.i) = value;
    break;
  case ParamField::Az:
    a_z = value;
    break;
  case ParamField::Bz:
    b_z = value;
    break;
  case ParamField::Bw:
    b_w(ref.i) = value;
    break;
  case ParamField::Dz:
    d_z = value;
    break;
  case ParamField::Dw:
    d_w(ref.i) = value;
    break;
  }
}

void validate(const RcTopology &topology, const RcParameters &params) {
  const Eigen::Index n = topology.n_hidden();
  if (params.r_zw.size() != n || params.r_wa.size() != n ||
      params.c_w.size() != n || params.b_w.size() != n ||
      params.d_w.size() != n || params.r_w.rows() != n ||
      params.r_w.cols() != n)
    throw InvalidArgument("parameter dimensions do not match topology with " +
                          std::to_string(n) + " hidden nodes");

  for (const ParamRef &ref : topology.present_params()) {
    const double v = params.get(ref);
    if (!std::isfinite(v))
      throw InvalidArgument(param_label(ref) + " is not finite");
    if (kind_of(ref.field) == ParamKind::Fraction) {
      if (v < 0.0 || v > 1.0)
        throw InvalidArgument(param_label(ref) + " must lie in [0, 1]");
    } else if (v <= 0.0) {
      throw InvalidArgument(param_label(ref) + " must be strictly positive");
    }
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const bool c = topology.coupled(static_cast<int>(i), static_cast<int>(j));
      if (!c && params.r_w(i, j) != 0.0)
        throw InvalidArgument("r_w set on an uncoupled wall pair");
      if (c && params.r_w(i, j) != params.r_w(j, i))
        throw InvalidArgument("r_w must be symmetric");
    }
    if (!topology.gains_on_walls() &&
        (params.b_w(i) != 0.0 || params.d_w(i) != 0.0))
      throw InvalidArgument("wall gain fractions set but topology has none");
  }
}

ContinuousStateSpace build_state_space(const RcTopology &topology,
                                       const RcParameters &params) {
  validate(topology, params);
  const int n = topology.n_hidden();
  const int dim = n + 1;

  ContinuousStateSpace css;
  css.a_mat = Eigen::MatrixXd::Zero(dim, dim);
  css.b_mat = Eigen::VectorXd::Zero(dim);
  css.d_mat = Eigen::MatrixXd::Zero(dim, 3);
  css.c_mat = Eigen::RowVectorXd::Zero(dim);
  css.c_mat(0) = 1.0;

  // Zone node.
  double zone_conductance = 1.0 / params.r_za;
  for (int i = 0; i < n; ++i) {
    const double g = 1.0 / params.r_zw(i);
    css.a_mat(0, i + 1) = g / params.c_z;
    zone_conductance += g;
  }
  css.a_mat(0, 0) = -zone_conductance / params.c_z;
  css.b_mat(0) = params.a_z / params.c_z;
  css.d_mat(0, 0) = 1.0 / (params.r_za * params.c_z);
  css.d_mat(0, 1) = params.b_z / params.c_z;
  css.d_mat(0, 2) = params.d_z / params.c_z;

  // Hidden wall nodes.
  for (int i = 0; i < n; ++i) {
    const double cw = params.c_w(i);
    const double g_zone = 1.0 / params.r_zw(i);
    const double g_amb = 1.0 / params.r_wa(i);
    double total = g_zone + g_amb;
    css.a_mat(i + 1, 0) = g_zone / cw;
    for (int j = 0; j < n; ++j) {
      if (j == i || !topology.coupled(i, j))
        continue;
      const double g = 1.0 / params.r_w(i, j);
      css.a_mat(i + 1, j + 1) = g / cw;
      total += g;
    }
    css.a_mat(i + 1, i + 1) = -total / cw;
    css.d_mat(i + 1, 0) = g_amb / cw;
    css.d_mat(i + 1, 1) = params.b_w(i) / cw;
    css.d_mat(i + 1, 2) = params.d_w(i) / cw;
  }
  return css;
}

DiscreteStateSpace discretize(const ContinuousStateSpace &css, double t_s) {
  if (!(t_s > 0.0) || !std::isfinite(t_s))
    throw InvalidArgument("sample period t_s must be positive");
  const int dim = css.state_dim();
  DiscreteStateSpace dss;
  dss.ad = Eigen::MatrixXd::Identity(dim, dim) + t_s * css.a_mat;
  dss.bd = t_s * css.b_mat;
  dss.dd = t_s * css.d_mat;
  dss.c = css.c_mat;
  dss.t_s = t_s;
  dss.stability_warning =
      (t_s * css.a_mat.diagonal().cwiseAbs().array() >= 1.0).any();
  return dss;
}

DiscreteStateSpace discretize(const RcTopology &topology,
                              const RcParameters &params, double t_s) {
  return discretize(build_state_space(topology, params), t_s);
}

StepResult step(const DiscreteStateSpace &dss, const ThermalState &x, double u,
                const DisturbanceSample &w) {
  if (x.size() != dss.state_dim())
    throw InvalidArgument("state dimension does not match the model");
  if (!x.allFinite() || !std::isfinite(u) || !w.vec().allFinite())
    throw InvalidArgument("non-finite input to step");
  StepResult r;
  r.y = dss.c.dot(x);
  r.next = dss.ad * x + dss.bd * u + dss.dd * w.vec();
  return r;
}

SimulationTrace simulate(const DiscreteStateSpace &dss, const ThermalState &x0,
                         const Eigen::Ref<const Eigen::VectorXd> &u_seq,
                         const Eigen::Ref<const DisturbanceSeq> &w_seq) {
  if (u_seq.size() != w_seq.cols())
    throw InvalidArgument("input and disturbance sequences differ in length");
  if (u_seq.size() < 1)
    throw InvalidArgument("simulation needs at least one input sample");
  if (x0.size() != dss.state_dim())
    throw InvalidArgument("initial state dimension does not match the model");

  const Eigen::Index steps = u_seq.size();
  SimulationTrace trace;
  trace.states.resize(dss.state_dim(), steps + 1);
  trace.outputs.resize(steps);
  trace.states.col(0) = x0;
  for (Eigen::Index k = 0; k < steps; ++k) {
    trace.outputs(k) = dss.c.dot(trace.states.col(k));
    trace.states.col(k + 1).noalias() = dss.ad * trace.states.col(k);
    trace.states.col(k + 1).noalias() += dss.bd * u_seq(k);
    trace.states.col(k + 1).noalias() += dss.dd * w_seq.col(k);
  }
  return trace;
}

}  // namespace thermident

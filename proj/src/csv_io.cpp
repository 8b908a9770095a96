// SPDX-License-Identifier: Apache-2.0

#include "thermident/csv_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "thermident/errors.hpp"

namespace thermident {

using Kind = DataFormatError::Kind;

std::string format_number(double v) {
  if (std::isnan(v))
    return "nan";
  std::array<char, 64> buf;
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc())
    throw Error("number formatting failed");
  return std::string(buf.data(), ptr);
}

double parse_number(std::string_view text) {
  double v = 0.0;
  const char *first = text.data();
  const char *last = first + text.size();
  if (first != last && *first == '+')
    ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (text.empty() || ec != std::errc() || ptr != last)
    throw DataFormatError(Kind::BadNumber, 0, {},
                          "not a number: '" + std::string(text) + "'");
  return v;
}

namespace {
  std::vector<std::string> split_row(const std::string &line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ','))
      cells.push_back(cell);
    if (!line.empty() && line.back() == ',')
      cells.emplace_back();
    return cells;
  }

  void strip_cr(std::string &line) {
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
  }

  // Consumes leading '#' lines; returns the first non-comment line in
  // `header` and its line number.
  Metadata read_header(std::istream &in, std::string &header, long &line_no) {
    Metadata meta;
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      strip_cr(line);
      if (line.empty())
        continue;
      if (line.front() != '#') {
        header = line;
        return meta;
      }
      std::string body = line.substr(1);
      const auto b = body.find_first_not_of(' ');
      body = b == std::string::npos ? std::string{} : body.substr(b);
      const auto eq = body.find('=');
      if (eq == std::string::npos)
        meta.emplace_back(body, "");
      else
        meta.emplace_back(body.substr(0, eq), body.substr(eq + 1));
    }
    throw DataFormatError(Kind::MalformedHeader, line_no, {},
                          "missing header row");
  }

  void write_metadata(std::ostream &out, const Metadata &meta) {
    for (const auto &[k, v] : meta)
      out << "# " << k << '=' << v << '\n';
  }

  void expect_header(const std::string &header,
                     const std::vector<std::string> &expected, long line_no) {
    const auto cells = split_row(header);
    for (size_t i = 0; i < expected.size(); ++i) {
      if (i >= cells.size())
        throw DataFormatError(Kind::MalformedHeader, line_no, expected[i],
                              "malformed header at line " +
                                  std::to_string(line_no) + ": missing column '" +
                                  expected[i] + "'");
      if (cells[i] != expected[i])
        throw DataFormatError(Kind::MalformedHeader, line_no, expected[i],
                              "malformed header at line " +
                                  std::to_string(line_no) + ": expected column '" +
                                  expected[i] + "' at position " +
                                  std::to_string(i + 1) + ", found '" +
                                  cells[i] + "'");
    }
    if (cells.size() > expected.size())
      throw DataFormatError(Kind::MalformedHeader, line_no, cells[expected.size()],
                            "malformed header at line " + std::to_string(line_no) +
                                ": unexpected column '" + cells[expected.size()] +
                                "'");
  }

  std::ofstream open_out(const std::filesystem::path &path) {
    if (path.has_parent_path())
      std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
      throw Error("cannot open '" + path.string() + "' for writing");
    return out;
  }

  void finish(std::ofstream &out, const std::filesystem::path &path) {
    out.flush();
    if (!out)
      throw Error("write to '" + path.string() + "' failed");
  }

  std::ifstream open_in(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
      throw Error("cannot open '" + path.string() + "'");
    return in;
  }
}  // namespace

void write_dataset(const Dataset &ds, std::ostream &out) {
  ds.validate();
  out << "# t_s=" << format_number(ds.t_s) << '\n';
  for (const auto &[k, v] : ds.metadata)
    if (k != "t_s")
      out << "# " << k << '=' << v << '\n';
  for (size_t i = 0; i < std::size(kDatasetColumns); ++i)
    out << (i ? "," : "") << kDatasetColumns[i];
  out << '\n';
  for (Eigen::Index k = 0; k < ds.size(); ++k) {
    out << format_iso8601(ds.timestamp(k));
    for (const Eigen::VectorXd *col :
         {&ds.t_z, &ds.q_hvac, &ds.p_c, &ds.p_h, &ds.t_am, &ds.q_int, &ds.q_solar})
      out << ',' << format_number((*col)(k));
    out << '\n';
  }
}

void write_dataset(const Dataset &ds, const std::filesystem::path &path) {
  std::ofstream out = open_out(path);
  write_dataset(ds, out);
  finish(out, path);
}

Dataset read_dataset(std::istream &in) {
  std::string header;
  long line_no = 0;
  Metadata meta = read_header(in, header, line_no);
  const std::vector<std::string> expected(std::begin(kDatasetColumns),
                                          std::end(kDatasetColumns));
  expect_header(header, expected, line_no);

  Dataset ds;
  double declared_t_s = 0.0;
  for (auto &[k, v] : meta) {
    if (k == "t_s") {
      try {
        declared_t_s = parse_number(v);
      } catch (const DataFormatError &) {
        throw DataFormatError(Kind::BadNumber, 0, "t_s",
                              "metadata t_s is not a number: '" + v + "'");
      }
    } else {
      ds.metadata.emplace_back(k, v);
    }
  }

  std::vector<std::int64_t> stamps;
  std::array<std::vector<double>, 7> cols;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty())
      continue;
    const auto cells = split_row(line);
    for (size_t c = 0; c < expected.size(); ++c) {
      if (c >= cells.size() || cells[c].empty())
        throw DataFormatError(Kind::MissingCell, line_no, expected[c],
                              "row " + std::to_string(line_no) +
                                  ": missing cell in column '" + expected[c] + "'");
    }
    if (cells.size() > expected.size())
      throw DataFormatError(Kind::MalformedHeader, line_no, {},
                            "row " + std::to_string(line_no) + ": " +
                                std::to_string(cells.size()) +
                                " cells, header declares " +
                                std::to_string(expected.size()));
    try {
      stamps.push_back(parse_iso8601(cells[0]));
    } catch (const DataFormatError &e) {
      throw DataFormatError(Kind::BadTimestamp, line_no, "timestamp",
                            "row " + std::to_string(line_no) +
                                ", column 'timestamp': " + e.what());
    }
    for (size_t c = 1; c < expected.size(); ++c) {
      try {
        cols[c - 1].push_back(parse_number(cells[c]));
      } catch (const DataFormatError &) {
        throw DataFormatError(Kind::BadNumber, line_no, expected[c],
                              "row " + std::to_string(line_no) + ", column '" +
                                  expected[c] + "': not a number '" +
                                  cells[c] + "'");
      }
      if (!std::isfinite(cols[c - 1].back()))
        throw DataFormatError(Kind::InvalidValue, line_no, expected[c],
                              "row " + std::to_string(line_no) + ", column '" +
                                  expected[c] + "': non-finite value");
    }
    const double pc = cols[2].back(), ph = cols[3].back();
    if (pc != 0.0 && ph != 0.0)
      throw DataFormatError(Kind::InvalidValue, line_no, "p_h",
                            "row " + std::to_string(line_no) +
                                ": p_c and p_h are both nonzero");
    // Spacing is checked as rows arrive so the error cites the first gap.
    if (stamps.size() >= 2) {
      const std::int64_t step = stamps[stamps.size() - 1] - stamps[stamps.size() - 2];
      const std::int64_t want =
          declared_t_s > 0.0 ? std::llround(declared_t_s) : stamps[1] - stamps[0];
      if (step != want || step <= 0)
        throw DataFormatError(Kind::IrregularSpacing, line_no, "timestamp",
                              "row " + std::to_string(line_no) +
                                  ": irregular spacing, expected +" +
                                  std::to_string(want) + " s, found " +
                                  std::to_string(step) + " s");
    }
  }
  if (stamps.empty())
    throw DataFormatError(Kind::MissingCell, line_no, {}, "dataset has no rows");

  if (declared_t_s > 0.0)
    ds.t_s = declared_t_s;
  else if (stamps.size() >= 2)
    ds.t_s = static_cast<double>(stamps[1] - stamps[0]);
  else
    throw DataFormatError(Kind::MalformedHeader, 0, "t_s",
                          "single-row dataset needs a t_s metadata line");
  ds.start_epoch = stamps.front();
  Eigen::VectorXd *targets[] = {&ds.t_z,  &ds.q_hvac, &ds.p_c,    &ds.p_h,
                                &ds.t_am, &ds.q_int,  &ds.q_solar};
  for (size_t c = 0; c < cols.size(); ++c)
    *targets[c] = Eigen::Map<const Eigen::VectorXd>(
        cols[c].data(), static_cast<Eigen::Index>(cols[c].size()));
  return ds;
}

Dataset read_dataset(const std::filesystem::path &path) {
  std::ifstream in = open_in(path);
  return read_dataset(in);
}

double ParamTable::get(std::string_view name) const {
  for (const auto &[k, v] : values)
    if (k == name)
      return v;
  throw DataFormatError(Kind::MissingCell, 0, std::string(name),
                        "parameter '" + std::string(name) + "' not found");
}

void write_params(const ParamTable &table, const std::filesystem::path &path) {
  std::ofstream out = open_out(path);
  write_metadata(out, table.metadata);
  out << "name,value\n";
  for (const auto &[k, v] : table.values)
    out << k << ',' << format_number(v) << '\n';
  finish(out, path);
}

ParamTable read_params(const std::filesystem::path &path) {
  std::ifstream in = open_in(path);
  ParamTable t;
  std::string header;
  long line_no = 0;
  t.metadata = read_header(in, header, line_no);
  expect_header(header, {"name", "value"}, line_no);
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty())
      continue;
    const auto cells = split_row(line);
    if (cells.size() != 2 || cells[0].empty() || cells[1].empty())
      throw DataFormatError(Kind::MissingCell, line_no, "value",
                            "row " + std::to_string(line_no) +
                                ": expected 'name,value'");
    try {
      t.values.emplace_back(cells[0], parse_number(cells[1]));
    } catch (const DataFormatError &) {
      throw DataFormatError(Kind::BadNumber, line_no, "value",
                            "row " + std::to_string(line_no) +
                                ", column 'value': not a number '" + cells[1] + "'");
    }
  }
  return t;
}

void write_trace(const SimTrace &trace, const Metadata &metadata,
                 const std::filesystem::path &path) {
  const Eigen::Index n = trace.y_hat.size();
  if (trace.y_ref.size() != n || trace.q_hvac.size() != n ||
      static_cast<Eigen::Index>(trace.power.size()) != n)
    throw InvalidArgument("trace columns differ in length");
  std::ofstream out = open_out(path);
  write_metadata(out, metadata);
  const bool band = trace.band_lo && trace.band_hi;
  out << "timestamp,t_z_ref,t_z_hat,q_hvac,p_hvac,p_total,q_reactive";
  if (band)
    out << ",band_lo,band_hi";
  out << '\n';
  auto cell = [](double v) { return std::isnan(v) ? std::string{} : format_number(v); };
  for (Eigen::Index k = 0; k < n; ++k) {
    out << format_iso8601(trace.start_epoch +
                          static_cast<std::int64_t>(std::llround(k * trace.t_s)))
        << ',' << cell(trace.y_ref(k)) << ',' << cell(trace.y_hat(k)) << ','
        << format_number(trace.q_hvac(k)) << ','
        << format_number(trace.power[k].p_hvac) << ','
        << format_number(trace.power[k].p_total) << ','
        << format_number(trace.power[k].q_reactive);
    if (band)
      out << ',' << format_number(*trace.band_lo) << ','
          << format_number(*trace.band_hi);
    out << '\n';
  }
  finish(out, path);
}

namespace {
  int method_rank(const std::string &m) {
    static const std::map<std::string, int> order{
        {"NLS", 0}, {"BE", 1}, {"MLE", 2}, {"ALS", 3}};
    const auto it = order.find(m);
    return it == order.end() ? 100 : it->second;
  }

  int architecture_rank(const std::string &a) {
    static const std::map<std::string, int> order{
        {"R-1", 0}, {"R-2", 1}, {"R-4", 2}, {"C-1", 3},
        {"C-2", 4}, {"R-A", 5}, {"C-A", 6}};
    const auto it = order.find(a);
    return it == order.end() ? 100 : it->second;
  }

  const std::vector<std::string> kReportColumns{
      "method",         "architecture",    "sim_type",
      "training_days",  "average_accuracy", "deadband_occupancy"};
}  // namespace

void sort_reports(std::vector<EvalReport> &reports) {
  std::stable_sort(reports.begin(), reports.end(),
                   [](const EvalReport &a, const EvalReport &b) {
                     const auto key = [](const EvalReport &r) {
                       return std::make_tuple(method_rank(r.method), r.method,
                                              architecture_rank(r.architecture),
                                              r.architecture,
                                              static_cast<int>(r.sim_type),
                                              r.training_days);
                     };
                     return key(a) < key(b);
                   });
}

void write_report(std::vector<EvalReport> reports, const Metadata &metadata,
                  std::ostream &out, bool with_trace) {
  if (reports.empty())
    throw InvalidArgument("report list is empty");
  sort_reports(reports);
  write_metadata(out, metadata);
  for (size_t i = 0; i < kReportColumns.size(); ++i)
    out << (i ? "," : "") << kReportColumns[i];
  if (with_trace)
    out << ",trace_id,divergent";
  out << '\n';
  for (const EvalReport &r : reports) {
    out << r.method << ',' << r.architecture << ',' << sim_name(r.sim_type)
        << ',' << r.training_days << ','
        << (r.average_accuracy ? format_number(*r.average_accuracy) : "") << ','
        << (r.deadband_occupancy ? format_number(*r.deadband_occupancy) : "");
    if (with_trace)
      out << ',' << r.trace_id << ',' << (r.divergent ? 1 : 0);
    out << '\n';
  }
}

void write_report(std::vector<EvalReport> reports, const Metadata &metadata,
                  const std::filesystem::path &path, bool with_trace) {
  if (reports.empty())
    throw InvalidArgument("report list is empty");
  std::ofstream out = open_out(path);
  write_report(std::move(reports), metadata, out, with_trace);
  finish(out, path);
}

std::vector<EvalReport> read_report(const std::filesystem::path &path,
                                    Metadata *metadata) {
  std::ifstream in = open_in(path);
  std::string header;
  long line_no = 0;
  Metadata meta = read_header(in, header, line_no);
  const auto names = split_row(header);
  const bool with_trace = names.size() == kReportColumns.size() + 2;
  std::vector<std::string> expected = kReportColumns;
  if (with_trace) {
    expected.push_back("trace_id");
    expected.push_back("divergent");
  }
  expect_header(header, expected, line_no);

  std::vector<EvalReport> out;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty())
      continue;
    const auto cells = split_row(line);
    if (cells.size() != expected.size())
      throw DataFormatError(Kind::MissingCell, line_no, {},
                            "row " + std::to_string(line_no) + ": expected " +
                                std::to_string(expected.size()) + " cells");
    EvalReport r;
    r.method = cells[0];
    r.architecture = cells[1];
    try {
      r.sim_type = parse_sim_type(cells[2]);
      r.training_days = static_cast<int>(parse_number(cells[3]));
      if (!cells[4].empty())
        r.average_accuracy = parse_number(cells[4]);
      if (!cells[5].empty())
        r.deadband_occupancy = parse_number(cells[5]);
    } catch (const Error &e) {
      throw DataFormatError(Kind::BadNumber, line_no, {},
                            "row " + std::to_string(line_no) + ": " + e.what());
    }
    if (with_trace) {
      r.trace_id = cells[6];
      r.divergent = cells[7] == "1";
    }
    out.push_back(std::move(r));
  }
  if (metadata)
    *metadata = std::move(meta);
  return out;
}

Metadata read_metadata(const std::filesystem::path &path) {
  std::ifstream in = open_in(path);
  std::string header;
  long line_no = 0;
  return read_header(in, header, line_no);
}

}  // namespace thermident

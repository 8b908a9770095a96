// SPDX-License-Identifier: Apache-2.0
//
// CSV artifacts: comma-delimited, '.' decimal, mandatory header row,
// "# key=value" metadata comments above the header. Numbers are written in
// shortest round-trip form.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "thermident/dataset.hpp"
#include "thermident/evaluation.hpp"

namespace thermident {

using Metadata = std::vector<std::pair<std::string, std::string>>;

std::string format_number(double v);
// Whole-string parse; throws DataFormatError(BadNumber).
double parse_number(std::string_view text);

inline constexpr const char *kDatasetColumns[] = {
    "timestamp", "t_z", "q_hvac", "p_c", "p_h", "t_am", "q_int", "q_solar"};

void write_dataset(const Dataset &ds, std::ostream &out);
void write_dataset(const Dataset &ds, const std::filesystem::path &path);
// Throws DataFormatError whose kind() distinguishes a malformed header,
// missing cells, unparsable numbers or timestamps, irregular spacing and
// invalid values; row() is the file line.
Dataset read_dataset(std::istream &in);
Dataset read_dataset(const std::filesystem::path &path);

// Two-column name,value table.
struct ParamTable {
  Metadata metadata;
  std::vector<std::pair<std::string, double>> values;

  double get(std::string_view name) const;  // throws DataFormatError
};

void write_params(const ParamTable &table, const std::filesystem::path &path);
ParamTable read_params(const std::filesystem::path &path);

void write_trace(const SimTrace &trace, const Metadata &metadata,
                 const std::filesystem::path &path);

// Stable order: method (NLS, BE, MLE, ALS), architecture (R-1, R-2, R-4,
// C-1, C-2, R-A, C-A), sim type, training window.
void sort_reports(std::vector<EvalReport> &reports);

// Columns method, architecture, sim_type, training_days, average_accuracy,
// deadband_occupancy; with_trace appends trace_id and divergent. Rows are
// sorted; throws InvalidArgument on an empty list and Error on I/O failure.
void write_report(std::vector<EvalReport> reports, const Metadata &metadata,
                  const std::filesystem::path &path, bool with_trace = false);
void write_report(std::vector<EvalReport> reports, const Metadata &metadata,
                  std::ostream &out, bool with_trace = false);
std::vector<EvalReport> read_report(const std::filesystem::path &path,
                                    Metadata *metadata = nullptr);

// Metadata of any artifact without parsing its body.
Metadata read_metadata(const std::filesystem::path &path);

}  // namespace thermident

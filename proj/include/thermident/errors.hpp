// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace thermident {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Bad arguments: dimension mismatches, out-of-range parameters, violated
// preconditions.
class InvalidArgument : public Error {
public:
  using Error::Error;
};

// Configuration files, hyperparameters and stale artifacts.
class ConfigError : public Error {
public:
  using Error::Error;
};

// Malformed CSV input. row is the 1-based line number in the file (0 when
// not tied to a line); column is empty when not tied to a column.
class DataFormatError : public Error {
public:
  enum class Kind {
    General,
    MalformedHeader,
    MissingCell,
    BadNumber,
    BadTimestamp,
    IrregularSpacing,
    InvalidValue,
  };

  explicit DataFormatError(const std::string &what)
      : Error(what), kind_(Kind::General) {}
  DataFormatError(Kind kind, long row, std::string column,
                  const std::string &what)
      : Error(what), kind_(kind), row_(row), column_(std::move(column)) {}

  Kind kind() const { return kind_; }
  long row() const { return row_; }
  const std::string &column() const { return column_; }

private:
  Kind kind_;
  long row_ = 0;
  std::string column_;
};

class RankDeficientError : public Error {
public:
  using Error::Error;
};

class MetricUndefined : public Error {
public:
  using Error::Error;
};

}  // namespace thermident

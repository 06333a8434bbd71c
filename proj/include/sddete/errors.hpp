#pragma once

#include <stdexcept>
#include <string>

namespace sddete {

// Base type for everything this library throws on purpose.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid arguments or configuration (bad k, bad grid, bad flag values).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Malformed or unusable input data (CSV schema, ragged rows, bad cells,
// impossible splits).
class DataError : public Error {
 public:
  using Error::Error;
};

// Arity or alignment mismatch between collections that must correspond
// row by row or column by column.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Resampling cannot proceed (single-class input, too few records).
class BalanceError : public Error {
 public:
  using Error::Error;
};

// A metric is undefined for the given predictions (missing class, empty).
class MetricError : public Error {
 public:
  using Error::Error;
};

// Model or report files that cannot be read or written intact.
class PersistenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace sddete

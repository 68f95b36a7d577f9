#pragma once

#include <stdexcept>
#include <string>

namespace spod {

/// Shape mismatches, out-of-range arguments and other caller mistakes.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Unsupported or inconsistent configuration (interpolation degree, windows,
/// run-configuration files).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Data that cannot be processed: zero-norm blocks, all-zero snapshots.
class DegenerateDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed snapshot, matrix, or CSV files.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace spod

#pragma once

#include <stdexcept>
#include <string>

namespace abandon {

// Malformed or inconsistent input data: bad dumps, schema mismatches,
// cache version mismatches, cohort violations.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An input file or directory could not be read or written.
class IoError : public DataError {
 public:
  using DataError::DataError;
};

// Invalid configuration, arguments, or API misuse by the caller.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A downstream stage found its upstream artifact out of date.
class StaleArtifactError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace abandon

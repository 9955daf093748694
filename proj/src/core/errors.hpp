#pragma once

#include <stdexcept>
#include <string>

namespace spsim {

// Exception hierarchy of the core library. The C API maps each type onto one
// status code, the CLI maps status codes onto exit codes.

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Invalid run configuration (unknown key, bad value, violated invariant).
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (time-tag files, artifacts).
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// File system failure.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace spsim

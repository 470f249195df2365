#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace cesgad {

// Every failure surfaced by the toolkit carries one of three kinds, which map
// onto the process exit codes used by the CLI (2, 3, 4).
enum class ErrorKind {
  Config,    // bad configuration value, unknown key, bad CLI usage
  Data,      // malformed input, violated invariant, degenerate operand
  Capacity,  // request exceeds the dense-matrix size limit
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  int exit_code() const noexcept {
    switch (kind_) {
      case ErrorKind::Config:
        return 2;
      case ErrorKind::Data:
        return 3;
      case ErrorKind::Capacity:
        return 4;
    }
    return 1;
  }

 private:
  ErrorKind kind_;
};

inline Error config_error(std::string message) {
  return Error(ErrorKind::Config, std::move(message));
}

inline Error data_error(std::string message) {
  return Error(ErrorKind::Data, std::move(message));
}

inline Error capacity_error(std::string message) {
  return Error(ErrorKind::Capacity, std::move(message));
}

}  // namespace cesgad

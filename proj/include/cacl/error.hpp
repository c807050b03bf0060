#pragma once

#include <stdexcept>
#include <string>

namespace cacl {

// Bad input: malformed files, invalid configs, violated preconditions.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Environment failures: unreadable or unwritable paths, truncated streams.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical or algorithmic failure discovered while running.
class RuntimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised by generate_pseudo_labels when every sample is noise.
class NoClustersError : public RuntimeError {
 public:
  NoClustersError() : RuntimeError("no clusters") {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ValidationError(msg);
}

}  // namespace cacl

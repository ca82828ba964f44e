#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cphbl {

/// Raised when a configuration fails parsing or validation. Carries every
/// violation found, not just the first.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> violations);

  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// A runtime invariant broke during a simulation (queue went negative,
/// placement over capacity, ...). Indicates a bug, not bad input.
class InvariantViolation : public std::runtime_error {
 public:
  InvariantViolation(std::uint64_t slot, const std::string& what);

  std::uint64_t slot() const noexcept { return slot_; }

 private:
  std::uint64_t slot_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cphbl

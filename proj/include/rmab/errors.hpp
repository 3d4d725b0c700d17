#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rmab {

/// Caller passed an argument outside the documented domain (bad state index,
/// mismatched tensor shape, ...).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Experiment configuration is malformed or out of range. `key()` names the
/// offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// A runtime invariant was breached (budget overspend, non-stochastic policy
/// row, solver residual too large). Always a bug or a corrupted input.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The exact joint-state oracle refused an instance that is too large.
class SizeGuardError : public std::runtime_error {
 public:
  SizeGuardError(std::uint64_t size, std::uint64_t limit)
      : std::runtime_error("joint state space size " + std::to_string(size) +
                           " exceeds the guard " + std::to_string(limit)),
        size_(size),
        limit_(limit) {}
  std::uint64_t size() const { return size_; }
  std::uint64_t limit() const { return limit_; }

 private:
  std::uint64_t size_;
  std::uint64_t limit_;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rmab

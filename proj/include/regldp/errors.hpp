#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace regldp {

/// Caller violated a precondition (bad sizes, odd nd, negative mass, ...).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The event admits no admissible pair.
class InfeasibleEventError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Brute-force enumeration refused because the instance is too large.
class ScaleGuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rejection sampling gave up before finding a simple graph.
class RejectionCapError : public std::runtime_error {
 public:
  RejectionCapError(std::size_t attempts)
      : std::runtime_error("no simple graph after " + std::to_string(attempts) +
                           " attempts"),
        attempts_(attempts) {}

  std::size_t attempts() const noexcept { return attempts_; }

 private:
  std::size_t attempts_;
};

}  // namespace regldp

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dgw {

/// Argument outside the domain where a generating function or closed form is defined.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Operation invoked for a law in the wrong asymptotic regime (gamma > 0 vs gamma = 0, q = 0 vs q > 0).
class RegimeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Truncated product, root search or series failed to reach the requested accuracy.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Conditioning on an event whose probability is numerically zero.
class ConditioningError : public std::runtime_error {
 public:
  explicit ConditioningError(const std::string& what, std::uint64_t n_survived = 0)
      : std::runtime_error(what), n_survived_(n_survived) {}

  [[nodiscard]] std::uint64_t n_survived() const noexcept { return n_survived_; }

 private:
  std::uint64_t n_survived_;
};

/// Simulated generation exceeded the population cap.
class PopulationOverflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dgw

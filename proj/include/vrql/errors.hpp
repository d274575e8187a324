#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vrql {

/// Invalid input: malformed MDP, out-of-range parameter, bad config.
/// The CLI maps this family to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// File could not be read or written. The CLI maps this to exit code 3.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Value iteration hit its iteration cap without meeting the tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by validate_mdp. Carries the offending (state, action) where it
/// applies and the measured quantity (row sum, reward, or discount).
class MdpError : public ValidationError {
 public:
  enum class Kind { NonStochasticRow, RewardOutOfBound, DiscountOutOfRange, ShapeMismatch };

  MdpError(Kind kind, const std::string& what, std::size_t state = 0, std::size_t action = 0,
           double value = 0.0)
      : ValidationError(what), kind_(kind), state_(state), action_(action), value_(value) {}

  Kind kind() const noexcept { return kind_; }
  std::size_t state() const noexcept { return state_; }
  std::size_t action() const noexcept { return action_; }
  double value() const noexcept { return value_; }

 private:
  Kind kind_;
  std::size_t state_;
  std::size_t action_;
  double value_;
};

}  // namespace vrql

#ifndef PAIRBENCH_ERRORS_HPP
#define PAIRBENCH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pairbench {

// Invalid-argument failures use std::invalid_argument directly; the types
// below cover the contract violations that callers may want to catch
// separately.

// Thrown by fit_bt when there is no data and no prior to pin the scale.
class UnidentifiableModelError : public std::runtime_error {
public:
  explicit UnidentifiableModelError(const std::string& what)
      : std::runtime_error(what) {}
};

// Thrown by thurstone_win_probability when both sigmas are zero.
class DegenerateVarianceError : public std::invalid_argument {
public:
  explicit DegenerateVarianceError(const std::string& what)
      : std::invalid_argument(what) {}
};

// Thrown by pearson/spearman on constant input.
class UndefinedCorrelationError : public std::runtime_error {
public:
  explicit UndefinedCorrelationError(const std::string& what)
      : std::runtime_error(what) {}
};

// Thrown by sigmoid_align when there are fewer points than parameters.
class TooFewPointsError : public std::invalid_argument {
public:
  explicit TooFewPointsError(const std::string& what)
      : std::invalid_argument(what) {}
};

// Thrown by samplers when an operation is issued against a state that
// cannot accept it (refill mid-batch, uninitialized state).
class InvalidStateError : public std::logic_error {
public:
  explicit InvalidStateError(const std::string& what)
      : std::logic_error(what) {}
};

// Thrown when an outcome is reported for a pair a scheduling sampler
// never issued.
class ProtocolViolationError : public std::logic_error {
public:
  explicit ProtocolViolationError(const std::string& what)
      : std::logic_error(what) {}
};

} // namespace pairbench

#endif // PAIRBENCH_ERRORS_HPP

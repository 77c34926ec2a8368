#pragma once

#include <stdexcept>
#include <string>

namespace cmdp {

/// Raised when an argument violates an operation's precondition.
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A partial trajectory carries no transitions, so no model can be chosen.
class ClassificationImpossible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The exhaustive clusterer refuses instances above its enumeration limit.
class ExhaustiveLimitExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidParameter(message);
}

}  // namespace detail
}  // namespace cmdp

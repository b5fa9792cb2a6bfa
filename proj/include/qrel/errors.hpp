#pragma once

#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace qrel {

/// Base class for library errors that are not plain precondition violations
/// (those use std::domain_error / std::invalid_argument).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A vector or matrix that should be unit-norm / normalized is not.
class NormalizationError : public Error {
 public:
  using Error::Error;
};

/// The difference of two projectors is not invertible (coincident directions).
class SingularDifferenceError : public Error {
 public:
  using Error::Error;
};

/// A computed quantity violates an invariant by more than rounding slack;
/// indicates a bug rather than bad input.
class InternalConsistencyError : public Error {
 public:
  using Error::Error;
};

/// Conditioning on an event of probability zero.
class ConditioningError : public Error {
 public:
  using Error::Error;
};

/// Input records violate the data schema; carries one message per problem.
class SchemaError : public Error {
 public:
  explicit SchemaError(std::vector<std::string> issues)
      : Error(join(issues)), issues_(std::move(issues)) {}

  const std::vector<std::string>& issues() const { return issues_; }

 private:
  static std::string join(const std::vector<std::string>& issues) {
    std::string out = "schema violations (" + std::to_string(issues.size()) + "):";
    for (const auto& s : issues) out += "\n  " + s;
    return out;
  }
  std::vector<std::string> issues_;
};

/// Required frequency cells are absent; carries the missing cell names.
class MissingDataError : public Error {
 public:
  explicit MissingDataError(std::vector<std::string> missing)
      : Error(join(missing)), missing_(std::move(missing)) {}

  const std::vector<std::string>& missing() const { return missing_; }

 private:
  static std::string join(const std::vector<std::string>& missing) {
    std::string out = "missing frequency cells:";
    for (const auto& s : missing) out += " [" + s + "]";
    return out;
  }
  std::vector<std::string> missing_;
};

/// A parameter value makes the requested quantity undefined
/// (e.g. the phase when an amplitude it multiplies is zero).
class DegenerateParameterError : public Error {
 public:
  using Error::Error;
};

/// An iterative fit exhausted its evaluation budget without converging.
class NonConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace qrel

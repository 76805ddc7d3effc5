#pragma once

#include <stdexcept>
#include <string>

namespace parcelingam {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A regressor has (near-)zero variance; the caller must exclude the variable.
class DegenerateVariance : public Error {
 public:
  using Error::Error;
};

/// The regressor covariance matrix failed the condition-number gate.
class SingularCovariance : public Error {
 public:
  using Error::Error;
};

/// An input vector to an independence test is constant.
class ConstantInput : public Error {
 public:
  using Error::Error;
};

/// Fisher combination called with zero p-values.
class EmptyInput : public Error {
 public:
  using Error::Error;
};

/// K_head and K_tail share a variable.
class OverlappingLists : public Error {
 public:
  using Error::Error;
};

/// Subset enumeration would exceed the configured cap.
class SubsetBudgetExceeded : public Error {
 public:
  SubsetBudgetExceeded(int dimension, int cap)
      : Error("subset enumeration over " + std::to_string(dimension) +
              " variables exceeds subset_cap=" + std::to_string(cap)),
        dimension(dimension),
        cap(cap) {}
  int dimension;
  int cap;
};

/// The noise variance-ratio fixed point failed to converge.
class ScalingNonConvergence : public Error {
 public:
  using Error::Error;
};

/// Unrecognized builtin network name.
class UnknownNetwork : public Error {
 public:
  using Error::Error;
};

/// Estimate and ground truth refer to different variable sets.
class IdMismatch : public Error {
 public:
  using Error::Error;
};

/// Malformed input file (CSV or TOML), with a location diagnostic.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error(what + " (line " + std::to_string(line) + ", column " +
              std::to_string(column) + ")"),
        line(line),
        column(column) {}
  explicit ParseError(const std::string& what) : Error(what), line(0), column(0) {}
  int line;
  int column;
};

}  // namespace parcelingam

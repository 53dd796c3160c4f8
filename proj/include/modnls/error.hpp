#pragma once

#include <stdexcept>
#include <string>

namespace modnls {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Two fields (or a field and a partition) live on different grids.
class GridMismatch : public Error {
public:
  using Error::Error;
};

/// A well-posedness hypothesis (m >= m0, exponent ranges, regularity) is not met.
class HypothesisViolation : public Error {
public:
  using Error::Error;
};

/// Iteration or quadrature failed numerically (non-contraction, tails, overflow).
class NumericalFailure : public Error {
public:
  using Error::Error;
};

}  // namespace modnls

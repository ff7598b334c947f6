#pragma once

#include <stdexcept>
#include <string>

namespace rigidity {

/// A coordinate, parameter or point lies outside the region where an
/// operation is defined.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// 1 + t*kappa <= 0 somewhere: the normal chart folds over itself.
class ChartDegeneracyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A thickness profile violates the uniform bounds h <= g <= c1 h and
/// |grad g1| + |grad g2| <= c2 h.
class AdmissibilityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Only 1 < p < infinity is supported.
class UnsupportedExponentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A quadrature grid does not resolve the region it is asked to integrate.
class ResolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input to the exponent fitter.
class FitError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace rigidity

#ifndef RKF_ERRORS_HPP
#define RKF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rkf {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Problems with the data handed to the library: bad dimensions, models that
/// violate the standing assumptions, malformed requests. Maps to CLI exit 2.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Failures arising while computing: lost definiteness, non-convergent
/// recursions, out-of-domain parameters. Maps to CLI exit 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public InputError {
 public:
  using InputError::InputError;
};

class NotReachable : public InputError {
 public:
  using InputError::InputError;
};

class NotObservable : public InputError {
 public:
  using InputError::InputError;
};

class DegenerateNoise : public InputError {
 public:
  using InputError::InputError;
};

class BracketInvalid : public InputError {
 public:
  using InputError::InputError;
};

class NotStable : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NotPositiveDefinite : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A guarded symmetric solve hit an eigenvalue too close to zero. Carries the
/// label of the operation that broke down and the offending eigenvalue, so
/// the caller can tell which recursion lost definiteness.
class NearSingular : public NumericalError {
 public:
  NearSingular(const std::string& context, double eigenvalue)
      : NumericalError(context + ": near-singular symmetric matrix (eigenvalue " +
                       std::to_string(eigenvalue) + ")"),
        context_(context),
        eigenvalue_(eigenvalue) {}

  const std::string& context() const { return context_; }
  double eigenvalue() const { return eigenvalue_; }

 private:
  std::string context_;
  double eigenvalue_;
};

class OutOfDomain : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NoConvergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class Diverged : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NoRealRoots : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace rkf

#endif  // RKF_ERRORS_HPP

#pragma once

#include <stdexcept>
#include <string>

namespace ness {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model parameter or function argument lies outside its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Matrix or subsystem dimensions do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A matrix function overflowed or produced non-finite entries.
class NumericalRangeError : public Error {
 public:
  using Error::Error;
};

/// The generator has more than one stationary state.
class NonUniqueSteadyStateError : public Error {
 public:
  using Error::Error;
};

/// A solver could not reach its residual or refinement target.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Input does not have the structure the routine requires (e.g. not an X-state).
class ShapeError : public Error {
 public:
  using Error::Error;
};

}  // namespace ness

#pragma once

#include <stdexcept>
#include <string>

namespace flowbm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Metric time outside [0, t_max) or beyond the hard 0.95 * t_max cut-off.
class TimeRangeError : public Error {
 public:
  using Error::Error;
};

/// Point outside the validity region of its chart.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Operation not provided by this family (e.g. closed-form Christoffels of a
/// numeric-only family).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Finite-difference stencil would cross the chart boundary.
class BoundaryError : public Error {
 public:
  using Error::Error;
};

class NoOverlapError : public Error {
 public:
  using Error::Error;
};

/// Matrix expected to be symmetric positive definite is not.
class NotSpdError : public Error {
 public:
  using Error::Error;
};

/// Frame lost g(t)-orthonormality beyond tolerance.
class FrameDriftError : public Error {
 public:
  using Error::Error;
};

class InstabilityError : public Error {
 public:
  using Error::Error;
};

class ResolutionError : public Error {
 public:
  using Error::Error;
};

class SnapshotError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A path step failed; carries the step index of the failure.
class PathError : public Error {
 public:
  PathError(int step, const std::string& what)
      : Error("step " + std::to_string(step) + ": " + what), step_(step) {}
  int step() const noexcept { return step_; }

 private:
  int step_;
};

}  // namespace flowbm

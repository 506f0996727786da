#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace shelab {

/// Base class for every error raised by the library.
class LabError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid extents, counts, radii ordering or malformed configuration.
class ConfigError : public LabError {
 public:
  using LabError::LabError;
};

/// Argument outside the domain of definition (e.g. time outside [0, T]).
class DomainError : public LabError {
 public:
  using LabError::LabError;
};

/// Ball containment or chain construction failure.
class GeometryError : public LabError {
 public:
  using LabError::LabError;
};

/// Requested size exceeds a configured cap.
class ResourceError : public LabError {
 public:
  using LabError::LabError;
};

/// Mismatched array sizes or meshes.
class ShapeError : public LabError {
 public:
  using LabError::LabError;
};

/// Linear solve failure or other numerical breakdown.
class NumericalError : public LabError {
 public:
  using LabError::LabError;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public LabError {
 public:
  using LabError::LabError;
};

/// Largest single space-time array (in doubles) the library will allocate: 512 MiB.
inline constexpr std::size_t kMaxFieldDoubles = std::size_t{1} << 26;

/// Throws ResourceError when `doubles` exceeds kMaxFieldDoubles.
inline void check_storage(std::size_t doubles, const std::string& what) {
  if (doubles > kMaxFieldDoubles) {
    throw ResourceError(what + ": " + std::to_string(doubles) + " doubles exceed the " +
                        std::to_string(kMaxFieldDoubles) + " limit; reduce nodes or tree depth");
  }
}

}  // namespace shelab

#ifndef AKSTAB_ERRORS_HPP
#define AKSTAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace akstab {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidField : Error {
  using Error::Error;
};
struct InvalidDensity : Error {
  using Error::Error;
};
struct RankError : Error {
  using Error::Error;
};
struct MetricError : Error {
  using Error::Error;
};
struct StructureError : Error {
  using Error::Error;
};
struct DegenerateStructure : Error {
  using Error::Error;
};
struct PathRangeError : Error {
  using Error::Error;
};
struct SymplecticError : Error {
  using Error::Error;
};
struct PrimitivityError : Error {
  using Error::Error;
};
struct AmbiguousKernel : Error {
  using Error::Error;
};
struct SolveError : Error {
  using Error::Error;
};
struct NotAPotential : Error {
  using Error::Error;
};
struct DegenerateBasis : Error {
  using Error::Error;
};
struct Diverged : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace akstab

#endif

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bcglab {

enum class ErrorKind {
  NonSymmetric,
  IndefiniteMatrix,
  NotPositiveDefinite,
  NonFinite,
  DimensionMismatch,
  DegenerateBasis,
  InvalidWeight,
  InvalidPrior,
  SingularPrior,
  Breakdown,
  DegenerateObservations,
  InvalidConfig,
  Usage,
  File,
};

std::string_view error_kind_name(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace bcglab

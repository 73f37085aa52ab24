#include "bcglab/errors.hpp"

namespace bcglab {

std::string_view error_kind_name(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NonSymmetric: return "NonSymmetric";
    case ErrorKind::IndefiniteMatrix: return "IndefiniteMatrix";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::DegenerateBasis: return "DegenerateBasis";
    case ErrorKind::InvalidWeight: return "InvalidWeight";
    case ErrorKind::InvalidPrior: return "InvalidPrior";
    case ErrorKind::SingularPrior: return "SingularPrior";
    case ErrorKind::Breakdown: return "Breakdown";
    case ErrorKind::DegenerateObservations: return "DegenerateObservations";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::Usage: return "UsageError";
    case ErrorKind::File: return "FileError";
  }
  return "Unknown";
}

}  // namespace bcglab

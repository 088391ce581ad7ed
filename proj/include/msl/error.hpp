#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace msl {

enum class Errc {
  // linalg
  NotPositiveDefinite,
  NoConvergence,
  SingularCore,
  NotSymmetric,
  NonFinite,
  DimensionMismatch,
  // fem
  InvalidMaterial,
  DegenerateJacobian,
  NegativeLumpedEntry,
  InvalidCounts,
  IndexOutOfRange,
  MeshFormat,
  // scaling
  InvalidParameter,
  EmptySelection,
  DegenerateLFT,
  LostDefiniteness,
  NonDiagonalMass,
  RankTooLarge,
  DefectiveElementPair,
  // analysis
  NoBoundForKind,
  NonUniformMesh,
  NonPositiveEigenvalue,
  // integrator
  SolveFailure,
  // experiment
  ConfigError,
};

std::string_view to_string(Errc code) noexcept;

/// Single exception type for the library. `index()` carries the failing
/// pivot / eigenvalue / element index when the error has one.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message,
        std::optional<std::size_t> index = std::nullopt)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        index_(index) {}

  Errc code() const noexcept { return code_; }
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  Errc code_;
  std::optional<std::size_t> index_;
};

}  // namespace msl

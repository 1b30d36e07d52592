#pragma once

// Matrix exponential by Pade scaling-and-squaring, and the action
// e^{tA} v through a restarted Arnoldi (Krylov) projection.

#include <optional>

#include "linsde/kron.hpp"

namespace linsde {

enum class ExpmMethod { DensePade, ActionOnVector };

/// Systems up to this size are exponentiated densely when no method is set.
inline constexpr Index kDenseExpmLimit = 400;

struct ExpmOptions {
  /// Unset: DensePade for systems of size <= kDenseExpmLimit, the action
  /// path above that (only where the caller consumes e^{tM} u as a vector).
  std::optional<ExpmMethod> method;
  /// Diagonal Pade degree. Supported: 3, 5, 7, 9, 13.
  int pade_order = 13;
  /// Relative accuracy target for the action path.
  double tolerance = 1e-12;
  /// Diagonal (power-of-two) balancing before the dense exponential.
  bool balance = false;
  /// Krylov subspace dimension for the action path.
  int krylov_dim = 30;
  /// Cap on the number of accepted time sub-steps of the action path.
  int max_substeps = 100000;
};

/// Throws std::invalid_argument for unsupported settings.
void validate(const ExpmOptions& opts);

/// e^{tA}. Throws DimensionError for non-square A and ComputationError when
/// the input is non-finite or the result overflows.
Matrix expm(const Matrix& a, double t = 1.0, const ExpmOptions& opts = {});

struct ExpmActionInfo {
  int substeps = 0;
  int rejected_steps = 0;
  /// Accumulated local error estimate relative to |v|.
  double error_estimate = 0.0;
  bool happy_breakdown = false;
};

/// e^{tA} v without forming e^{tA}. t must be >= 0. Throws ConvergenceError
/// (carrying the last local error estimate) when the step control fails.
Vector expm_action(const Matrix& a, const Vector& v, double t, const ExpmOptions& opts = {},
                   ExpmActionInfo* info = nullptr);

}  // namespace linsde

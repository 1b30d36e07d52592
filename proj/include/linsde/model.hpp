#pragma once

// Linear SDE with affine time dependence
//
//   dx = (A x + a0 + a1 t) dt + sum_i (B_i x + b_i0 + b_i1 t) dw^i,
//
// its initial moments, classification, and the JSON model file.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "linsde/kron.hpp"

namespace linsde {

struct LinearSde {
  Matrix A;
  Vector a0;
  Vector a1;
  std::vector<Matrix> B;
  std::vector<Vector> b0;
  std::vector<Vector> b1;
  double t0 = 0.0;

  Index dim() const { return A.rows(); }
  Index channels() const { return static_cast<Index>(B.size()); }

  /// a(t) = a0 + a1 t.
  Vector drift_offset(double t) const { return a0 + t * a1; }
  /// b_i(t) = b_i0 + b_i1 t.
  Vector diffusion_offset(Index i, double t) const { return b0[i] + t * b1[i]; }

  /// Throws ModelError naming the first inconsistent field.
  void validate() const;
};

/// Builds a model with zero a0, a1 and no noise channels.
LinearSde make_sde(Matrix A, double t0 = 0.0);

/// Appends a noise channel; b1 defaults to zero.
void add_channel(LinearSde& sde, Matrix B, Vector b0, Vector b1 = {});

/// First two moments at the model's initial time.
struct MomentState {
  Vector m0;
  Matrix P0;

  /// Symmetry of P0 (relative `sym_tol`) and positive semidefiniteness of
  /// P0 - m0 m0^T (minimum eigenvalue >= -psd_slack * max(1, |P0|)).
  void validate(double sym_tol = 1e-12, double psd_slack = 1e-10) const;
};

enum class SdeClass { NonAutonomous, AutonomousMultiplicative, AutonomousAdditive };

std::string_view to_string(SdeClass cls);

/// A coefficient counts as zero when its largest absolute entry is
/// <= zero_tol. a1 or any b_i1 nonzero: NonAutonomous. Otherwise any B_i
/// nonzero: AutonomousMultiplicative. Otherwise AutonomousAdditive (this
/// includes the noise-free case).
SdeClass classify(const LinearSde& sde, double zero_tol = 0.0);

struct Model {
  LinearSde sde;
  MomentState state;
};

/// Parses and validates the JSON model document. Errors are ModelError with
/// the offending field path.
Model parse_model(std::string_view text);

/// Reads and parses a model file. A missing or unreadable file is a
/// ModelError on the empty field path.
Model load_model(const std::filesystem::path& path);

/// Writes the model in the same schema parse_model reads. Numbers are
/// printed in shortest round-trip form.
std::string serialize_model(const LinearSde& sde, const MomentState& state);

}  // namespace linsde

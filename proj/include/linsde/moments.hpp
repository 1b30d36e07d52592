#pragma once

// Exact first and second moments of a linear SDE from a single matrix
// exponential of an augmented block upper-triangular matrix M.
//
// Three augmented forms are supported:
//
//   General     n = d^2 + 2d + 7   any model (time-dependent offsets allowed)
//   Autonomous  n = d^2 + d + 2    a1 = b_i1 = 0
//   Additive    n = 2d + 2         additionally B_i = 0
//
// For General and Autonomous, v = e^{M h} u gives vec(P_t) in its first d^2
// entries and m_t - m_0 in the `mean_offset` slice. The Additive form reads
// the blocks F, H and k of e^{M h} and sets P_t = F P0 F^T + H F^T + F H^T,
// m_t = m0 + k.

#include <optional>
#include <string>
#include <vector>

#include "linsde/expm.hpp"
#include "linsde/model.hpp"

namespace linsde {

enum class AugmentedForm { General, Autonomous, Additive };

std::string_view to_string(AugmentedForm form);

/// Form used for a model of the given class.
AugmentedForm natural_form(SdeClass cls);

/// Augmented dimension of `form` for state dimension d.
Index augmented_size(AugmentedForm form, Index d);

/// Coefficient matrices of the second-moment forcing expanded around t0:
///   beta1 = sum b_i(t0) b_i(t0)^T
///   beta2 = sum b_i(t0) b_i1^T + b_i1 b_i(t0)^T
///   beta3 = sum b_i1 b_i1^T
///   beta4 = a(t0) (+) a(t0) + sum b_i(t0) (x) B_i + B_i (x) b_i(t0)
///   beta5 = a1 (+) a1 + sum b_i1 (x) B_i + B_i (x) b_i1
struct BetaMatrices {
  Matrix beta1, beta2, beta3;
  Matrix beta4, beta5;  // d^2 x d
};

BetaMatrices build_beta(const LinearSde& sde);

/// Generator of the mean: m_{t0+s} = m0 + L e^{C s} r.
/// With a time ramp (non-autonomous models)
///   C = [A a1 A m0 + a(t0); 0 0 1; 0 0 0],   (d+2) x (d+2)
/// otherwise
///   C = [A A m0 + a(t0); 0 0],                (d+1) x (d+1)
/// L = [I_d 0] and r = e_last.
struct MeanGenerator {
  Matrix C;
  Matrix L;
  Vector r;
  bool time_ramp = false;
};

MeanGenerator build_mean_generator(const LinearSde& sde, const MomentState& state,
                                   bool time_ramp);

/// Picks the time ramp from the model class (NonAutonomous -> ramp).
MeanGenerator build_mean_generator(const LinearSde& sde, const MomentState& state, SdeClass cls);

/// vec of the forcing term of the second-moment equation as a function of
/// s = t - t0:
///   vec(F(s)) = c1 + c2 s + c3 s^2 + G4 e^{C s} r + s G5 e^{C s} r.
struct ForcingTerms {
  Vector constant;   // c1 = vec(beta1) + beta4 m0
  Vector linear;     // c2 = vec(beta2) + beta5 m0
  Vector quadratic;  // c3 = vec(beta3)
  Matrix mean_coupling;         // G4 = beta4 L
  Matrix mean_coupling_linear;  // G5 = beta5 L
};

ForcingTerms build_forcing(const LinearSde& sde, const MomentState& state,
                           const MeanGenerator& gen);

/// d^2 x d^2 generator of vec(P) for the homogeneous second-moment equation:
/// A (+) A + sum B_i (x) B_i, i.e. vec(A P + P A^T + sum B_i P B_i^T).
Matrix build_second_moment_operator(const LinearSde& sde);

struct BlockSpan {
  std::string name;
  Index offset;
  Index size;
};

struct AugmentedSystem {
  AugmentedForm form = AugmentedForm::General;
  Index d = 0;
  Matrix M;
  /// Empty for the Additive form, which reads matrix blocks instead.
  Vector u;
  /// General/Autonomous: start of the d-long slice of e^{Mh} u holding
  /// m_t - m0. Additive: column of e^{Mh} whose top d entries are k.
  Index mean_offset = 0;
  /// General/Autonomous: start of vec(P_t) in e^{Mh} u (always 0).
  /// Additive: column where the H block starts (F is at column 0).
  Index secmom_offset = 0;
  std::vector<BlockSpan> blocks;

  Index size() const { return M.rows(); }
};

/// Assembles the form matching classify(sde, zero_tol).
AugmentedSystem assemble(const LinearSde& sde, const MomentState& state, double zero_tol = 0.0);

/// Assembles a specific form. Throws Error when the model does not satisfy
/// the form's hypotheses (Autonomous needs a1 = b_i1 = 0, Additive also B_i = 0,
/// judged with zero_tol).
AugmentedSystem assemble(const LinearSde& sde, const MomentState& state, AugmentedForm form,
                         double zero_tol = 0.0);

struct MomentResult {
  double t = 0.0;
  Vector mean;
  Matrix secmom;
  Matrix variance;
  /// max |P - P^T| of the extracted second moment before symmetrization.
  double symmetry_defect = 0.0;
  double min_variance_eig = 0.0;
};

/// Symmetrizes `secmom`, records the defect and derives the variance.
MomentResult finalize_moments(double t, Vector mean, Matrix secmom);

struct MomentOptions {
  ExpmOptions expm;
  /// Overrides the form picked from the model class.
  std::optional<AugmentedForm> form;
  double zero_tol = 0.0;
};

/// Moments at time t >= t0 from one exponential of the augmented matrix.
MomentResult moments_at(const LinearSde& sde, const MomentState& state, double t,
                        const MomentOptions& opts = {});

/// Moments at an already assembled system.
MomentResult moments_at(const AugmentedSystem& sys, const MomentState& state, double t0,
                        double t, const ExpmOptions& opts = {});

/// Moments at start + k * step for k = 1..n_steps, where `state` holds the
/// moments at `start`. One exponential e^{M step} is formed and then applied
/// repeatedly.
std::vector<MomentResult> propagate_grid(const LinearSde& sde, const MomentState& state,
                                         double start, double step, Index n_steps,
                                         const MomentOptions& opts = {});

/// Reference route with separate exponentials: e^{calA h}, e^{C h} and one
/// small block-triangular exponential per integral term (seven in total),
/// combined as vec(P_t) = e^{calA h} vec(P0) + K + H r and m_t = m0 + L e^{C h} r.
/// Every model class goes through the same time-ramp generator.
MomentResult moments_baseline(const LinearSde& sde, const MomentState& state, double t,
                              const ExpmOptions& opts = {});

/// Number of exponentials evaluated by moments_baseline.
inline constexpr int kBaselineExponentials = 7;

}  // namespace linsde

#pragma once

// Independent references for the moment engine: classical RK4 on the
// moment ODEs and Euler-Maruyama Monte Carlo on the SDE itself. Neither
// route touches the augmented matrices or the Kronecker forcing terms.

#include <cstdint>
#include <utility>

#include "linsde/model.hpp"
#include "linsde/moments.hpp"

namespace linsde {

struct MomentDerivative {
  Vector dm;
  Matrix dP;
};

/// dm/dt = A m + a(t),
/// dP/dt = A P + P A^T + sum B_i P B_i^T + F(t), with
/// F(t) = a m^T + m a^T + sum (B_i m b_i^T + b_i m^T B_i^T + b_i b_i^T)
/// evaluated directly at the supplied m.
MomentDerivative moment_ode_rhs(const LinearSde& sde, const Vector& m, const Matrix& P, double t);

/// Classical fourth-order Runge-Kutta on the coupled (m, P) system from t0
/// to t with n_steps equal steps. Throws ComputationError naming the step at
/// which a non-finite value appears.
MomentResult rk4_moments(const LinearSde& sde, const MomentState& state, double t, Index n_steps);

struct McConfig {
  Index n_paths = 100000;
  Index n_steps = 1000;
  std::uint64_t seed = 0x5eed;
  /// Pairs path 2k with 2k+1 driven by negated normals; n_paths must be even.
  bool antithetic = false;
  /// 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
};

struct McEstimate {
  Vector mean;
  Matrix secmom;
  Vector stderr_mean;
  Matrix stderr_secmom;
  Index n_paths = 0;
};

/// Euler-Maruyama simulation of the SDE from t0 to t. Initial states are
/// Gaussian with mean m0 and covariance P0 - m0 m0^T. Path p draws from its
/// own generator seeded by (seed, p), and per-chunk partial sums are reduced
/// in a fixed order, so the estimate is bit-reproducible for a given config
/// regardless of the thread count.
McEstimate euler_maruyama_mc(const LinearSde& sde, const MomentState& state, double t,
                             const McConfig& cfg);

/// splitmix64 finalizer; used to derive per-path seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace linsde

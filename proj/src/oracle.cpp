#include "linsde/oracle.hpp"

#include <Eigen/Eigenvalues>
#include <atomic>
#include <cmath>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "linsde/errors.hpp"

namespace linsde {

MomentDerivative moment_ode_rhs(const LinearSde& sde, const Vector& m, const Matrix& P, double t) {
  const Vector a = sde.drift_offset(t);
  MomentDerivative out;
  out.dm = sde.A * m + a;
  Matrix forcing = a * m.transpose() + m * a.transpose();
  Matrix dP = sde.A * P + P * sde.A.transpose();
  for (Index i = 0; i < sde.channels(); ++i) {
    const Matrix& B = sde.B[i];
    const Vector b = sde.diffusion_offset(i, t);
    const Vector Bm = B * m;
    dP += B * P * B.transpose();
    forcing += Bm * b.transpose() + b * Bm.transpose() + b * b.transpose();
  }
  out.dP = dP + forcing;
  return out;
}

MomentResult rk4_moments(const LinearSde& sde, const MomentState& state, double t,
                         Index n_steps) {
  sde.validate();
  if (n_steps < 1) {
    throw ModelError("n_steps", "RK4 needs at least one step");
  }
  if (!(t >= sde.t0)) {
    throw ModelError("t", "RK4 integrates forward from t0 only");
  }
  const double h = (t - sde.t0) / static_cast<double>(n_steps);
  Vector m = state.m0;
  Matrix P = state.P0;
  for (Index k = 0; k < n_steps; ++k) {
    const double tk = sde.t0 + static_cast<double>(k) * h;
    const auto k1 = moment_ode_rhs(sde, m, P, tk);
    const auto k2 = moment_ode_rhs(sde, m + 0.5 * h * k1.dm, P + 0.5 * h * k1.dP, tk + 0.5 * h);
    const auto k3 = moment_ode_rhs(sde, m + 0.5 * h * k2.dm, P + 0.5 * h * k2.dP, tk + 0.5 * h);
    const auto k4 = moment_ode_rhs(sde, m + h * k3.dm, P + h * k3.dP, tk + h);
    m += (h / 6.0) * (k1.dm + 2.0 * k2.dm + 2.0 * k3.dm + k4.dm);
    P += (h / 6.0) * (k1.dP + 2.0 * k2.dP + 2.0 * k3.dP + k4.dP);
    if (!m.allFinite() || !P.allFinite()) {
      throw ComputationError("RK4: non-finite moments at step " + std::to_string(k + 1) +
                             " (t = " + std::to_string(tk + h) + ")");
    }
  }
  return finalize_moments(t, std::move(m), std::move(P));
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

constexpr Index kUnitsPerChunk = 256;

// Running sums over sample units, shifted by a common reference value so
// identical samples give exactly zero spread.
struct Sums {
  Vector mean_sum, mean_sq;
  Matrix mom_sum, mom_sq;

  explicit Sums(Index d)
      : mean_sum(Vector::Zero(d)),
        mean_sq(Vector::Zero(d)),
        mom_sum(Matrix::Zero(d, d)),
        mom_sq(Matrix::Zero(d, d)) {}

  void add(const Sums& o) {
    mean_sum += o.mean_sum;
    mean_sq += o.mean_sq;
    mom_sum += o.mom_sum;
    mom_sq += o.mom_sq;
  }
};

class PathSimulator {
 public:
  PathSimulator(const LinearSde& sde, const MomentState& state, const Matrix& init_factor,
                double t, const McConfig& cfg)
      : sde_(sde),
        m0_(state.m0),
        factor_(init_factor),
        d_(sde.dim()),
        channels_(sde.channels()),
        h_((t - sde.t0) / static_cast<double>(cfg.n_steps)),
        sqrt_h_(std::sqrt(h_)),
        n_steps_(cfg.n_steps),
        seed_(cfg.seed),
        antithetic_(cfg.antithetic),
        z_(d_),
        x_(antithetic_ ? 2 : 1, std::vector<double>(d_)),
        next_(d_) {}

  // Simulates sample unit `unit` (one path, or an antithetic pair) and
  // returns its mean contribution and second-moment contribution.
  void run(Index unit, Vector& y, Matrix& q) {
    std::mt19937_64 gen(mix_seed(seed_, static_cast<std::uint64_t>(unit)));
    std::normal_distribution<double> normal(0.0, 1.0);
    const int copies = antithetic_ ? 2 : 1;

    for (Index i = 0; i < d_; ++i) {
      z_[i] = normal(gen);
    }
    for (int c = 0; c < copies; ++c) {
      const double sign = c == 0 ? 1.0 : -1.0;
      for (Index i = 0; i < d_; ++i) {
        double s = m0_(i);
        for (Index j = 0; j < d_; ++j) {
          s += factor_(i, j) * sign * z_[j];
        }
        x_[c][i] = s;
      }
    }

    const double* A = sde_.A.data();
    for (Index k = 0; k < n_steps_; ++k) {
      const double tk = sde_.t0 + static_cast<double>(k) * h_;
      // Channel normals are shared between the two antithetic copies.
      xi_.resize(static_cast<std::size_t>(channels_));
      for (Index c = 0; c < channels_; ++c) {
        xi_[c] = normal(gen) * sqrt_h_;
      }
      for (int c = 0; c < copies; ++c) {
        const double sign = c == 0 ? 1.0 : -1.0;
        std::vector<double>& x = x_[c];
        for (Index i = 0; i < d_; ++i) {
          double drift = sde_.a0(i) + sde_.a1(i) * tk;
          for (Index j = 0; j < d_; ++j) {
            drift += A[i + j * d_] * x[j];
          }
          next_[i] = x[i] + drift * h_;
        }
        for (Index ch = 0; ch < channels_; ++ch) {
          const double* B = sde_.B[ch].data();
          const double dw = sign * xi_[ch];
          for (Index i = 0; i < d_; ++i) {
            double diff = sde_.b0[ch](i) + sde_.b1[ch](i) * tk;
            for (Index j = 0; j < d_; ++j) {
              diff += B[i + j * d_] * x[j];
            }
            next_[i] += diff * dw;
          }
        }
        x.swap(next_);
      }
    }

    y.setZero();
    q.setZero();
    for (int c = 0; c < copies; ++c) {
      const Eigen::Map<const Vector> x(x_[c].data(), d_);
      y += x;
      q += x * x.transpose();
    }
    if (copies == 2) {
      y *= 0.5;
      q *= 0.5;
    }
  }

 private:
  const LinearSde& sde_;
  const Vector& m0_;
  const Matrix& factor_;
  Index d_;
  Index channels_;
  double h_;
  double sqrt_h_;
  Index n_steps_;
  std::uint64_t seed_;
  bool antithetic_;
  std::vector<double> z_;
  std::vector<std::vector<double>> x_;
  std::vector<double> next_;
  std::vector<double> xi_;
};

Matrix initial_factor(const MomentState& state) {
  const Matrix cov = 0.5 * (state.P0 + state.P0.transpose()) - state.m0 * state.m0.transpose();
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  const double scale = std::max(1.0, max_abs(state.P0));
  Vector root = eig.eigenvalues();
  if (root.minCoeff() < -1e-10 * scale) {
    throw ModelError("P0", "P0 - m0 m0^T is not positive semidefinite; cannot sample x(t0)");
  }
  for (Index i = 0; i < root.size(); ++i) {
    root(i) = root(i) <= 1e-14 * scale ? 0.0 : std::sqrt(root(i));
  }
  return eig.eigenvectors() * root.asDiagonal();
}

}  // namespace

McEstimate euler_maruyama_mc(const LinearSde& sde, const MomentState& state, double t,
                             const McConfig& cfg) {
  sde.validate();
  if (cfg.n_paths < 2) {
    throw ModelError("paths", "Monte Carlo needs at least two paths");
  }
  if (cfg.n_steps < 1) {
    throw ModelError("mc-steps", "Monte Carlo needs at least one time step");
  }
  if (cfg.antithetic && cfg.n_paths % 2 != 0) {
    throw ModelError("paths", "antithetic sampling needs an even number of paths");
  }
  if (!(t >= sde.t0)) {
    throw ModelError("t", "Monte Carlo simulates forward from t0 only");
  }
  const Matrix factor = initial_factor(state);
  const Index d = sde.dim();
  const Index units = cfg.antithetic ? cfg.n_paths / 2 : cfg.n_paths;
  const Index chunks = (units + kUnitsPerChunk - 1) / kUnitsPerChunk;

  // Unit 0 provides the shift for all sums.
  Vector shift_mean(d);
  Matrix shift_mom(d, d);
  {
    PathSimulator sim(sde, state, factor, t, cfg);
    sim.run(0, shift_mean, shift_mom);
  }

  std::vector<Sums> partial(static_cast<std::size_t>(chunks), Sums(d));
  std::atomic<Index> next_chunk{0};
  const auto worker = [&] {
    PathSimulator sim(sde, state, factor, t, cfg);
    Vector y(d);
    Matrix q(d, d);
    for (Index c = next_chunk++; c < chunks; c = next_chunk++) {
      Sums& s = partial[static_cast<std::size_t>(c)];
      const Index end = std::min(units, (c + 1) * kUnitsPerChunk);
      for (Index u = c * kUnitsPerChunk; u < end; ++u) {
        sim.run(u, y, q);
        y -= shift_mean;
        q -= shift_mom;
        s.mean_sum += y;
        s.mean_sq += y.cwiseProduct(y);
        s.mom_sum += q;
        s.mom_sq += q.cwiseProduct(q);
      }
    }
  };

  unsigned threads = cfg.threads != 0 ? cfg.threads : std::thread::hardware_concurrency();
  threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(chunks)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned i = 0; i < threads; ++i) {
      pool.emplace_back(worker);
    }
    for (auto& th : pool) {
      th.join();
    }
  }

  Sums total(d);
  for (const auto& s : partial) {
    total.add(s);
  }
  const double n = static_cast<double>(units);
  McEstimate est;
  est.n_paths = cfg.n_paths;
  const Vector mean_dev = total.mean_sum / n;
  const Matrix mom_dev = total.mom_sum / n;
  est.mean = shift_mean + mean_dev;
  est.secmom = shift_mom + mom_dev;
  est.secmom = 0.5 * (est.secmom + est.secmom.transpose());
  const Vector var_mean =
      ((total.mean_sq - n * mean_dev.cwiseProduct(mean_dev)) / (n - 1.0)).cwiseMax(0.0);
  const Matrix var_mom =
      ((total.mom_sq - n * mom_dev.cwiseProduct(mom_dev)) / (n - 1.0)).cwiseMax(0.0);
  est.stderr_mean = (var_mean / n).cwiseSqrt();
  est.stderr_secmom = (var_mom / n).cwiseSqrt();
  return est;
}

}  // namespace linsde

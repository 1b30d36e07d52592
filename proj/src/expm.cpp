#include "linsde/expm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>

#include "linsde/errors.hpp"

namespace linsde {

namespace {

// Diagonal Pade coefficients b_0..b_m and the 1-norm bound theta_m below
// which the degree-m approximant is accurate to unit roundoff in double.
struct PadeTable {
  int order;
  double theta;
  std::span<const double> coeffs;
};

constexpr std::array<double, 4> kPade3 = {120.0, 60.0, 12.0, 1.0};
constexpr std::array<double, 6> kPade5 = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
constexpr std::array<double, 8> kPade7 = {17297280.0, 8648640.0, 1995840.0, 277200.0,
                                          25200.0,    1512.0,    56.0,      1.0};
constexpr std::array<double, 10> kPade9 = {17643225600.0, 8821612800.0, 2075673600.0,
                                           302702400.0,   30270240.0,   2162160.0,
                                           110880.0,      3960.0,       90.0,
                                           1.0};
constexpr std::array<double, 14> kPade13 = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
    1323241920.0,        40840800.0,          960960.0,           16380.0,
    182.0,               1.0};

PadeTable pade_table(int order) {
  switch (order) {
    case 3:
      return {3, 1.495585217958292e-2, kPade3};
    case 5:
      return {5, 2.539398330063230e-1, kPade5};
    case 7:
      return {7, 9.504178996162932e-1, kPade7};
    case 9:
      return {9, 2.097847961257068e0, kPade9};
    case 13:
      return {13, 5.371920351148152e0, kPade13};
    default:
      throw std::invalid_argument("unsupported Pade order " + std::to_string(order) +
                                  " (supported: 3, 5, 7, 9, 13)");
  }
}

// Odd part U and even part V of the Pade numerator, so that
// r(A) = (V - U)^{-1} (V + U).
void pade_terms(const Matrix& a, const PadeTable& tab, Matrix& u, Matrix& v) {
  const Index n = a.rows();
  const Matrix id = Matrix::Identity(n, n);
  const auto& b = tab.coeffs;
  const Matrix a2 = a * a;
  if (tab.order == 13) {
    const Matrix a4 = a2 * a2;
    const Matrix a6 = a4 * a2;
    Matrix tmp = b[13] * a6 + b[11] * a4 + b[9] * a2;
    Matrix inner = a6 * tmp;
    inner += b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id;
    u.noalias() = a * inner;
    tmp = b[12] * a6 + b[10] * a4 + b[8] * a2;
    v.noalias() = a6 * tmp;
    v += b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
    return;
  }
  Matrix odd = b[1] * id;
  v = b[0] * id;
  Matrix power = id;
  for (int k = 2; k <= tab.order; k += 2) {
    power = power * a2;
    v += b[k] * power;
    odd += b[k + 1] * power;
  }
  u.noalias() = a * odd;
}

// Parlett-Reinsch diagonal scaling by powers of two. Returns the scaling
// vector and overwrites `a` with D^{-1} a D.
Vector balance_in_place(Matrix& a) {
  const Index n = a.rows();
  Vector scale = Vector::Ones(n);
  bool converged = false;
  while (!converged) {
    converged = true;
    for (Index i = 0; i < n; ++i) {
      double c = a.col(i).cwiseAbs().sum() - std::abs(a(i, i));
      double r = a.row(i).cwiseAbs().sum() - std::abs(a(i, i));
      if (c == 0.0 || r == 0.0) {
        continue;
      }
      const double s = c + r;
      double f = 1.0;
      double g = r / 2.0;
      while (c < g) {
        f *= 2.0;
        c *= 4.0;
      }
      g = r * 2.0;
      while (c >= g) {
        f /= 2.0;
        c /= 4.0;
      }
      if ((c + r) / f < 0.95 * s) {
        converged = false;
        scale(i) *= f;
        a.row(i) /= f;
        a.col(i) *= f;
      }
    }
  }
  return scale;
}

Matrix pade_expm(const Matrix& a, const PadeTable& tab) {
  const double norm = norm1(a);
  int squarings = 0;
  if (norm > tab.theta) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / tab.theta)));
  }
  const Matrix scaled = std::ldexp(1.0, -squarings) * a;
  Matrix u(a.rows(), a.cols());
  Matrix v(a.rows(), a.cols());
  pade_terms(scaled, tab, u, v);
  const Matrix numer = v + u;
  const Matrix denom = v - u;
  Matrix result = denom.partialPivLu().solve(numer);
  for (int k = 0; k < squarings; ++k) {
    result = result * result;
  }
  return result;
}

double round_two_digits(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    return x;
  }
  const double s = std::pow(10.0, std::floor(std::log10(x)) - 1.0);
  return std::ceil(x / s) * s;
}

}  // namespace

void validate(const ExpmOptions& opts) {
  (void)pade_table(opts.pade_order);
  if (!(opts.tolerance > 0.0)) {
    throw std::invalid_argument("expm tolerance must be positive");
  }
  if (opts.krylov_dim < 1) {
    throw std::invalid_argument("krylov_dim must be at least 1");
  }
  if (opts.max_substeps < 1) {
    throw std::invalid_argument("max_substeps must be at least 1");
  }
}

Matrix expm(const Matrix& a, double t, const ExpmOptions& opts) {
  require_finite(a, "expm operand");
  if (a.rows() != a.cols()) {
    throw DimensionError("expm: matrix must be square, got " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()));
  }
  if (!std::isfinite(t)) {
    throw ComputationError("expm: time must be finite");
  }
  const PadeTable tab = pade_table(opts.pade_order);
  Matrix scaled = t * a;
  if (!scaled.allFinite()) {
    throw ComputationError("expm: t * A overflows");
  }
  if (scaled.isZero(0.0)) {
    return Matrix::Identity(a.rows(), a.cols());
  }
  Matrix result;
  if (opts.balance) {
    const Vector d = balance_in_place(scaled);
    result = pade_expm(scaled, tab);
    result = d.asDiagonal() * result * d.cwiseInverse().asDiagonal();
  } else {
    result = pade_expm(scaled, tab);
  }
  if (!result.allFinite()) {
    throw ComputationError("expm: result overflows the double range (1-norm of t*A is " +
                           std::to_string(norm1(t * a)) + ")");
  }
  return result;
}

Vector expm_action(const Matrix& a, const Vector& v, double t, const ExpmOptions& opts,
                   ExpmActionInfo* info) {
  validate(opts);
  require_finite(a, "expm_action operand");
  if (a.rows() != a.cols() || a.cols() != v.size()) {
    throw DimensionError("expm_action: need square A and conformable v");
  }
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw ComputationError("expm_action: time must be finite and non-negative");
  }
  ExpmActionInfo local;
  ExpmActionInfo& stats = info != nullptr ? *info : local;
  stats = {};

  const double v_norm = v.norm();
  const double a_norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  if (t == 0.0 || v_norm == 0.0 || a_norm == 0.0) {
    return v;
  }

  const Index n = a.rows();
  const int m = static_cast<int>(std::min<Index>(opts.krylov_dim, n));
  const double abs_tol = opts.tolerance * v_norm;
  const double rate = abs_tol / t;
  const double breakdown_tol = 1e-13 * a_norm;
  constexpr double kGamma = 0.9;
  constexpr double kDelta = 1.2;
  constexpr int kMaxRejections = 20;
  const double xm = 1.0 / m;

  const double fact = std::pow((m + 1) / std::numbers::e, m + 1) *
                      std::sqrt(2.0 * std::numbers::pi * (m + 1));
  double t_new =
      round_two_digits((1.0 / a_norm) * std::pow((fact * opts.tolerance) / (4.0 * a_norm), xm));

  Vector w = v;
  Matrix basis(n, m + 1);
  Matrix hess(m + 2, m + 2);
  double t_now = 0.0;
  while (t_now < t) {
    if (stats.substeps >= opts.max_substeps) {
      throw ConvergenceError("expm_action: sub-step cap of " + std::to_string(opts.max_substeps) +
                                 " reached at t = " + std::to_string(t_now),
                             stats.error_estimate);
    }
    double t_step = std::min(t - t_now, t_new);
    const double beta = w.norm();
    if (beta == 0.0) {
      break;
    }
    basis.setZero();
    hess.setZero();
    basis.col(0) = w / beta;

    int krylov = m;
    bool happy = false;
    for (int j = 0; j < m; ++j) {
      Vector p = a * basis.col(j);
      // Modified Gram-Schmidt with one reorthogonalization pass.
      for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i <= j; ++i) {
          const double h = basis.col(i).dot(p);
          hess(i, j) += h;
          p -= h * basis.col(i);
        }
      }
      const double s = p.norm();
      if (s < breakdown_tol) {
        happy = true;
        krylov = j + 1;
        t_step = t - t_now;
        break;
      }
      hess(j + 1, j) = s;
      basis.col(j + 1) = p / s;
    }

    double av_norm = 0.0;
    if (!happy) {
      hess(m + 1, m) = 1.0;
      av_norm = (a * basis.col(m)).norm();
    }
    const int dim = happy ? krylov : m + 2;

    Matrix small;
    double err_loc = 0.0;
    int rejections = 0;
    for (;;) {
      small = expm(hess.topLeftCorner(dim, dim), t_step);
      if (happy) {
        err_loc = 0.0;
        break;
      }
      const double err1 = beta * std::abs(small(m, 0));
      const double err2 = beta * std::abs(small(m + 1, 0)) * av_norm;
      if (err1 > 10.0 * err2) {
        err_loc = err2;
      } else if (err1 > err2) {
        err_loc = err1 * err2 / (err1 - err2);
      } else {
        err_loc = err1;
      }
      if (err_loc <= kDelta * t_step * rate) {
        break;
      }
      if (++rejections > kMaxRejections) {
        stats.rejected_steps += rejections;
        throw ConvergenceError("expm_action: step size control failed at t = " +
                                   std::to_string(t_now) + " (local error estimate " +
                                   std::to_string(err_loc / v_norm) + ")",
                               err_loc / v_norm);
      }
      t_step = round_two_digits(kGamma * t_step * std::pow(t_step * rate / err_loc, xm));
    }
    stats.rejected_steps += rejections;
    stats.happy_breakdown = stats.happy_breakdown || happy;

    const int used = happy ? krylov : m + 1;
    w = beta * (basis.leftCols(used) * small.col(0).head(used));
    t_now += t_step;
    stats.substeps += 1;
    stats.error_estimate += err_loc / v_norm;
    if (!w.allFinite()) {
      throw ComputationError("expm_action: iterate became non-finite");
    }
    if (happy) {
      break;
    }
    t_new = err_loc > 0.0
                ? round_two_digits(kGamma * t_step * std::pow(t_step * rate / err_loc, xm))
                : 2.0 * t_step;
  }
  return w;
}

}  // namespace linsde

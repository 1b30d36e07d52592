#include "linsde/kron.hpp"

#include <string>

#include "linsde/errors.hpp"

namespace linsde {

namespace {

void require_nonempty(const Matrix& x, std::string_view what) {
  if (x.rows() < 1 || x.cols() < 1) {
    throw DimensionError(std::string(what) + " must have at least one row and one column");
  }
}

void require_square(const Matrix& x, std::string_view what) {
  require_nonempty(x, what);
  if (x.rows() != x.cols()) {
    throw DimensionError(std::string(what) + " must be square, got " + std::to_string(x.rows()) +
                         "x" + std::to_string(x.cols()));
  }
}

}  // namespace

Matrix kron(const Matrix& a, const Matrix& b) {
  require_nonempty(a, "kron lhs");
  require_nonempty(b, "kron rhs");
  const Index r = b.rows();
  const Index s = b.cols();
  Matrix out(a.rows() * r, a.cols() * s);
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      out.block(i * r, j * s, r, s) = a(i, j) * b;
    }
  }
  return out;
}

Matrix kron_sum(const Matrix& a, const Matrix& b) {
  require_square(a, "kron_sum lhs");
  require_square(b, "kron_sum rhs");
  const Index n = a.rows();
  const Index m = b.rows();
  Matrix out = kron(a, Matrix::Identity(m, m));
  for (Index k = 0; k < n; ++k) {
    out.block(k * m, k * m, m, m) += b;
  }
  return out;
}

Matrix kron_sum_vec(const Vector& a, const Vector& b) {
  if (a.size() < 1 || a.size() != b.size()) {
    throw DimensionError("kron_sum_vec needs two non-empty vectors of equal length, got " +
                         std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  const Index d = a.size();
  Matrix out = Matrix::Zero(d * d, d);
  // a (x) I_d: block k is a(k) * I_d.
  for (Index k = 0; k < d; ++k) {
    out.block(k * d, 0, d, d).diagonal().array() += a(k);
  }
  // I_d (x) b: column k holds b in rows k*d .. k*d + d - 1.
  for (Index k = 0; k < d; ++k) {
    out.block(k * d, k, d, 1) += b;
  }
  return out;
}

Vector vec(const Matrix& x) {
  require_nonempty(x, "vec operand");
  return Eigen::Map<const Vector>(x.data(), x.size());
}

Matrix unvec(const Vector& v, Index rows, Index cols) {
  if (rows < 1 || cols < 1 || v.size() != rows * cols) {
    throw DimensionError("unvec: vector of length " + std::to_string(v.size()) +
                         " cannot be reshaped to " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  }
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

Matrix hilbert(Index d) {
  if (d < 1) {
    throw DimensionError("hilbert: dimension must be at least 1");
  }
  Matrix h(d, d);
  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < d; ++i) {
      h(i, j) = 1.0 / static_cast<double>(i + j + 1);
    }
  }
  return h;
}

double max_abs(const Matrix& x) { return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff(); }

double norm1(const Matrix& x) {
  return x.size() == 0 ? 0.0 : x.cwiseAbs().colwise().sum().maxCoeff();
}

double rel_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("rel_diff: operand shapes differ");
  }
  const double diff = max_abs(a - b);
  const double scale = max_abs(b);
  return scale > 0.0 ? diff / scale : diff;
}

void require_finite(const Matrix& x, std::string_view what) {
  require_nonempty(x, what);
  if (!x.allFinite()) {
    throw ComputationError(std::string(what) + " contains non-finite entries");
  }
}

}  // namespace linsde

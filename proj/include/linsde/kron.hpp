#pragma once

// Dense real linear algebra helpers and the Kronecker-algebra operators
// (vec, product, sum) the moment formulas are written in.
//
// vec is column stacking throughout: vec(X)[i + j * rows] == X(i, j).

#include <Eigen/Dense>
#include <string_view>

namespace linsde {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Kronecker product. Block (i, j) of the result is a(i, j) * b.
Matrix kron(const Matrix& a, const Matrix& b);

/// Kronecker sum a (+) b = a (x) I_m + I_n (x) b for square a (n x n), b (m x m).
Matrix kron_sum(const Matrix& a, const Matrix& b);

/// Kronecker sum of two d-vectors, a (x) I_d + I_d (x) b, a d^2 x d matrix.
/// For any m: kron_sum_vec(a, b) * m == vec(m a^T) + vec(b m^T).
Matrix kron_sum_vec(const Vector& a, const Vector& b);

/// Column-stacking vectorization.
Vector vec(const Matrix& x);

/// Inverse of vec.
Matrix unvec(const Vector& v, Index rows, Index cols);

/// d x d Hilbert matrix, H(i, j) = 1 / (i + j + 1) with zero-based indices.
Matrix hilbert(Index d);

/// Largest absolute entry; 0 for an empty operand.
double max_abs(const Matrix& x);

/// Induced 1-norm (maximum absolute column sum).
double norm1(const Matrix& x);

/// Normwise relative difference max|a - b| / max|b|. Falls back to the
/// absolute difference when b is identically zero.
double rel_diff(const Matrix& a, const Matrix& b);

/// Throws DimensionError when x is empty and ComputationError when it holds
/// NaN or Inf. `what` names the operand in the message.
void require_finite(const Matrix& x, std::string_view what);

}  // namespace linsde

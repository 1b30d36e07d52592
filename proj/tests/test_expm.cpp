#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "linsde/errors.hpp"
#include "linsde/expm.hpp"
#include "test_support.hpp"

using namespace linsde;
using linsde::testing::make_hurwitz;
using linsde::testing::random_matrix;
using linsde::testing::random_vector;

namespace {

// Eigen's own scaling-and-squaring implementation as an independent reference.
Matrix reference_expm(const Matrix& a, double t) { return (t * a).exp(); }

Matrix random_with_norm(std::mt19937_64& rng, Index n, double norm) {
  Matrix a = random_matrix(rng, n, n);
  return a * (norm / norm1(a));
}

}  // namespace

TEST(Expm, ZeroGivesIdentity) {
  for (Index n : {1, 3, 7}) {
    EXPECT_EQ(expm(Matrix::Zero(n, n), 2.5), Matrix::Identity(n, n));
  }
}

TEST(Expm, Diagonal) {
  const Vector lambda = (Vector(4) << -3.0, -0.25, 0.0, 1.5).finished();
  const Matrix e = expm(lambda.asDiagonal().toDenseMatrix(), 0.7);
  for (Index i = 0; i < 4; ++i) {
    EXPECT_NEAR(e(i, i), std::exp(0.7 * lambda(i)), 1e-15 * std::exp(0.7 * lambda(i)));
  }
  EXPECT_EQ((e - e.diagonal().asDiagonal().toDenseMatrix()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Expm, NilpotentSeriesTerminates) {
  const Matrix n = (Matrix(2, 2) << 0, 1, 0, 0).finished();
  for (double t : {0.0, 0.5, 3.0, 40.0}) {
    const Matrix e = expm(n, t);
    EXPECT_NEAR(e(0, 0), 1.0, 1e-15);
    EXPECT_NEAR(e(0, 1), t, 1e-15 * std::max(1.0, t));
    EXPECT_EQ(e(1, 0), 0.0);
    EXPECT_NEAR(e(1, 1), 1.0, 1e-15);
  }
}

TEST(Expm, AgreesWithIndependentImplementation) {
  std::mt19937_64 rng(21);
  for (double norm : {1e-3, 0.5, 3.0, 20.0, 150.0}) {
    for (Index n : {1, 2, 5, 12}) {
      const Matrix a = random_with_norm(rng, n, norm);
      EXPECT_LE(rel_diff(expm(a, 1.0), reference_expm(a, 1.0)), 1e-12)
          << "norm " << norm << " n " << n;
    }
  }
}

TEST(Expm, SemigroupProperty) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = random_with_norm(rng, 1 + trial % 6, 5.0);
    const double s = 0.3 + 0.05 * trial;
    const double t = 0.9 - 0.03 * trial;
    const Matrix whole = expm(a, s + t);
    EXPECT_LE(max_abs(whole - expm(a, s) * expm(a, t)), 1e-10 * max_abs(whole));
  }
  // Random stable 3x3.
  const Matrix a = make_hurwitz(random_matrix(rng, 3, 3));
  EXPECT_LE(rel_diff(expm(a, 0.4) * expm(a, 1.1), expm(a, 1.5)), 1e-12);
}

TEST(Expm, DeterminantIsExpOfTrace) {
  std::mt19937_64 rng(8);
  for (Index n = 1; n <= 6; ++n) {
    const Matrix a = random_with_norm(rng, n, 4.0);
    const double t = 0.8;
    const double expected = std::exp(a.trace() * t);
    EXPECT_NEAR(expm(a, t).determinant(), expected, 1e-8 * expected);
  }
}

TEST(Expm, PreservesBlockUpperTriangularPattern) {
  std::mt19937_64 rng(17);
  const std::vector<Index> sizes = {3, 1, 4, 2};
  Index n = 0;
  for (Index s : sizes) n += s;
  Matrix a = random_matrix(rng, n, n, -2.0, 2.0);
  Index offset = 0;
  for (Index s : sizes) {
    a.block(offset + s, offset, n - offset - s, s).setZero();
    offset += s;
  }
  const Matrix e = expm(a, 1.3);
  offset = 0;
  const double scale = max_abs(e);
  for (Index s : sizes) {
    EXPECT_LE(max_abs(e.block(offset + s, offset, n - offset - s, s)), 1e-13 * scale);
    offset += s;
  }
}

TEST(Expm, LowerPadeOrdersAndBalancing) {
  std::mt19937_64 rng(31);
  const Matrix a = random_with_norm(rng, 6, 2.0);
  const Matrix ref = reference_expm(a, 1.0);
  for (int order : {3, 5, 7, 9, 13}) {
    ExpmOptions opts;
    opts.pade_order = order;
    EXPECT_LE(rel_diff(expm(a, 1.0, opts), ref), 1e-12) << "order " << order;
  }
  // Badly scaled similarity transform of a.
  Vector scale(6);
  scale << 1e-4, 1e-2, 1.0, 1e2, 1e3, 1e4;
  const Matrix skewed = scale.asDiagonal() * a * scale.cwiseInverse().asDiagonal();
  ExpmOptions balanced;
  balanced.balance = true;
  const Matrix expected = scale.asDiagonal() * ref * scale.cwiseInverse().asDiagonal();
  const Matrix got = expm(skewed, 1.0, balanced);
  EXPECT_LE(max_abs((got - expected).cwiseQuotient(expected.cwiseAbs() + Matrix::Constant(6, 6, 1e-300))),
            1e-9);
}

TEST(Expm, ErrorPaths) {
  EXPECT_THROW(expm(Matrix::Ones(2, 3)), DimensionError);
  Matrix bad = Matrix::Identity(2, 2);
  bad(0, 1) = std::nan("");
  EXPECT_THROW(expm(bad), ComputationError);
  EXPECT_THROW(expm(Matrix::Constant(1, 1, 1000.0), 1.0), ComputationError);
  EXPECT_THROW(expm(Matrix::Identity(2, 2), std::numeric_limits<double>::infinity()),
               ComputationError);
  ExpmOptions opts;
  opts.pade_order = 6;
  EXPECT_THROW(expm(Matrix::Identity(2, 2), 1.0, opts), std::invalid_argument);
  opts = {};
  opts.tolerance = 0.0;
  EXPECT_THROW(validate(opts), std::invalid_argument);
}

TEST(ExpmAction, TrivialCases) {
  const Vector v = (Vector(3) << 1.0, -2.0, 0.5).finished();
  EXPECT_EQ(expm_action(Matrix::Zero(3, 3), v, 1.0), v);
  const Vector e1 = Vector::Unit(3, 0);
  const Vector got = expm_action(Matrix::Identity(3, 3), e1, 1.0);
  EXPECT_NEAR(got(0), std::exp(1.0), 1e-14);
  EXPECT_NEAR(got(1), 0.0, 1e-15);
  EXPECT_EQ(expm_action(Matrix::Identity(3, 3), v, 0.0), v);
}

TEST(ExpmAction, MatchesDenseOnStableMatrices) {
  std::mt19937_64 rng(99);
  ExpmOptions opts;
  opts.tolerance = 1e-10;
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix a = make_hurwitz(random_matrix(rng, 20, 20));
    const Vector v = random_vector(rng, 20);
    const Vector dense = expm(a, 1.0) * v;
    ExpmActionInfo info;
    const Vector action = expm_action(a, v, 1.0, opts, &info);
    EXPECT_LE(rel_diff(action, dense), 1e-8);
    EXPECT_GE(info.substeps, 1);
    EXPECT_LE(info.error_estimate, 1e-8);
  }
}

TEST(ExpmAction, SubsteppingWithSmallBasis) {
  std::mt19937_64 rng(5);
  const Matrix a = make_hurwitz(random_matrix(rng, 120, 120, -3.0, 3.0));
  const Vector v = random_vector(rng, 120);
  ExpmOptions opts;
  opts.krylov_dim = 12;
  opts.tolerance = 1e-10;
  ExpmActionInfo info;
  const Vector action = expm_action(a, v, 2.0, opts, &info);
  EXPECT_GT(info.substeps, 1);
  EXPECT_LE(rel_diff(action, expm(a, 2.0) * v), 1e-8);
}

TEST(ExpmAction, HappyBreakdownIsExact) {
  // The Krylov space of a 2x2 block acting on e_0 closes after two vectors.
  Matrix a = Matrix::Zero(50, 50);
  a(0, 0) = -1.0;
  a(0, 1) = 2.0;
  a(1, 0) = -2.0;
  a(1, 1) = -0.5;
  ExpmActionInfo info;
  const Vector v = Vector::Unit(50, 0);
  const Vector got = expm_action(a, v, 1.7, {}, &info);
  EXPECT_TRUE(info.happy_breakdown);
  EXPECT_LE(rel_diff(got, expm(a, 1.7) * v), 1e-13);
}

TEST(ExpmAction, ReportsNonConvergence) {
  std::mt19937_64 rng(2);
  const Matrix a = random_matrix(rng, 60, 60, -50.0, 50.0);
  const Vector v = random_vector(rng, 60);
  ExpmOptions opts;
  opts.krylov_dim = 4;
  opts.max_substeps = 2;
  try {
    (void)expm_action(a, v, 1.0, opts);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_GE(e.residual(), 0.0);
  }
  EXPECT_THROW(expm_action(a, v, -1.0), ComputationError);
  EXPECT_THROW(expm_action(a, Vector::Zero(3), 1.0), DimensionError);
}

#include <gtest/gtest.h>

#include <random>
#include <string>

#include "linsde/bench.hpp"
#include "linsde/errors.hpp"
#include "linsde/model.hpp"
#include "test_support.hpp"

using namespace linsde;

namespace {

std::string field_of(const std::string& text) {
  try {
    (void)parse_model(text);
  } catch (const ModelError& e) {
    return e.field();
  }
  return "<no error>";
}

constexpr const char* kOu = R"({"d": 1, "m": 1, "A": [[-1]], "b0": [[1]], "m0": [0], "P0": [[0]]})";

}  // namespace

TEST(Classify, ByZeroPattern) {
  LinearSde sde = make_sde(Matrix::Constant(2, 2, -1.0));
  EXPECT_EQ(classify(sde), SdeClass::AutonomousAdditive);  // m = 0
  add_channel(sde, Matrix::Identity(2, 2), Vector::Zero(2));
  EXPECT_EQ(classify(sde), SdeClass::AutonomousMultiplicative);
  sde.B[0].setZero();
  EXPECT_EQ(classify(sde), SdeClass::AutonomousAdditive);
  sde.b1[0] = Vector::Constant(2, 0.1);
  EXPECT_EQ(classify(sde), SdeClass::NonAutonomous);
  sde.b1[0].setZero();
  sde.a1 = Vector::Ones(2);
  EXPECT_EQ(classify(sde), SdeClass::NonAutonomous);
}

TEST(Classify, NoiseFreeTimeDependentIsNonAutonomous) {
  LinearSde sde = make_sde(Matrix::Identity(1, 1));
  sde.a1 = Vector::Ones(1);
  EXPECT_EQ(classify(sde), SdeClass::NonAutonomous);
}

TEST(Classify, HilbertTestEquations) {
  for (Index d : {2, 8}) {
    EXPECT_EQ(classify(hilbert_test_equation(SdeClass::NonAutonomous, d).sde),
              SdeClass::NonAutonomous);
    EXPECT_EQ(classify(hilbert_test_equation(SdeClass::AutonomousMultiplicative, d).sde),
              SdeClass::AutonomousMultiplicative);
    EXPECT_EQ(classify(hilbert_test_equation(SdeClass::AutonomousAdditive, d).sde),
              SdeClass::AutonomousAdditive);
  }
}

TEST(Classify, ZeroToleranceAndScaleInvariance) {
  LinearSde sde = make_sde(-Matrix::Identity(2, 2));
  add_channel(sde, Matrix::Constant(2, 2, 1e-14), Vector::Ones(2));
  EXPECT_EQ(classify(sde), SdeClass::AutonomousMultiplicative);
  EXPECT_EQ(classify(sde, 1e-12), SdeClass::AutonomousAdditive);

  std::mt19937_64 rng(1);
  for (SdeClass cls : {SdeClass::NonAutonomous, SdeClass::AutonomousMultiplicative,
                       SdeClass::AutonomousAdditive}) {
    Model model = linsde::testing::random_model(rng, 3, cls);
    for (double c : {1e-3, 0.5, 7.0, 1e4}) {
      LinearSde scaled = model.sde;
      scaled.a1 *= c;
      for (auto& b : scaled.B) b *= c;
      for (auto& b : scaled.b1) b *= c;
      EXPECT_EQ(classify(scaled), cls);
    }
  }
}

TEST(ParseModel, MinimalOrnsteinUhlenbeck) {
  const Model model = parse_model(kOu);
  EXPECT_EQ(model.sde.dim(), 1);
  EXPECT_EQ(model.sde.channels(), 1);
  EXPECT_EQ(model.sde.A(0, 0), -1.0);
  EXPECT_EQ(model.sde.b0[0](0), 1.0);
  EXPECT_EQ(model.sde.B[0](0, 0), 0.0);
  EXPECT_EQ(model.sde.a1(0), 0.0);
  EXPECT_EQ(model.sde.t0, 0.0);
  EXPECT_EQ(classify(model.sde), SdeClass::AutonomousAdditive);
}

TEST(ParseModel, HilbertMultiplicativeFile) {
  const std::string text = R"({
    "d": 2, "m": 1, "t0": 0,
    "A": [[-1, -0.5], [-0.5, -0.3333333333333333]],
    "B": [[[1, 0.5], [0.5, 0.3333333333333333]]],
    "m0": [1, 1], "P0": [[1, 1], [1, 1]]})";
  const Model model = parse_model(text);
  EXPECT_EQ(classify(model.sde), SdeClass::AutonomousMultiplicative);
  EXPECT_EQ(model.sde.b0[0], Vector::Zero(2));
  EXPECT_EQ(model.state.P0, Matrix::Ones(2, 2));
}

TEST(ParseModel, NoiseFreeModel) {
  const Model model = parse_model(R"({"d": 1, "A": [[0.5]], "a1": [1], "m0": [1], "P0": [[1]]})");
  EXPECT_EQ(model.sde.channels(), 0);
  EXPECT_EQ(classify(model.sde), SdeClass::NonAutonomous);
}

TEST(ParseModel, AsymmetricSecondMoment) {
  const std::string text =
      R"({"d": 2, "A": [[-1, 0], [0, -1]], "m0": [0, 0], "P0": [[1, 2], [0, 1]]})";
  EXPECT_EQ(field_of(text), "P0");
}

TEST(ParseModel, FieldPathDiagnostics) {
  EXPECT_EQ(field_of(R"({"d": 1, "A": [[-1]], "m0": [0]})"), "P0");
  EXPECT_EQ(field_of(R"({"d": 2, "A": [[-1, 0], [0]], "m0": [0, 0], "P0": [[1,0],[0,1]]})"),
            "A[1]");
  EXPECT_EQ(field_of(R"({"d": 1, "m": 2, "A": [[-1]], "B": [[[1]], [["x"]]], "m0": [0], "P0": [[1]]})"),
            "B[1][0][0]");
  // Out-of-range literals are rejected by the JSON reader itself.
  EXPECT_EQ(field_of(R"({"d": 1, "A": [[1e999]], "m0": [0], "P0": [[1]]})"), "");
  EXPECT_EQ(field_of(R"({"d": 1, "m": 2, "A": [[-1]], "b0": [[1]], "m0": [0], "P0": [[1]]})"),
            "b0");
  EXPECT_EQ(field_of(R"j({"d": 1, "A": [[-1]], "a": "sin(t)", "m0": [0], "P0": [[1]]})j"), "a");
  EXPECT_EQ(field_of(R"({"d": 0, "A": [], "m0": [], "P0": []})"), "d");
  EXPECT_EQ(field_of(R"({"d": 1, "A": [[-1]], "a0": [1, 2], "m0": [0], "P0": [[1]]})"), "a0");
  EXPECT_EQ(field_of("[1, 2]"), "");
  EXPECT_EQ(field_of("{not json"), "");
}

TEST(ParseModel, CovarianceMustBePositiveSemidefinite) {
  EXPECT_EQ(field_of(R"({"d": 1, "A": [[-1]], "m0": [2], "P0": [[1]]})"), "P0");
  // P0 = m0 m0^T is a point mass and is accepted.
  EXPECT_NO_THROW(parse_model(R"({"d": 2, "A": [[-1,0],[0,-1]], "m0": [1,1], "P0": [[1,1],[1,1]]})"));
}

TEST(ParseModel, SerializeRoundTripIsExact) {
  std::mt19937_64 rng(42);
  for (SdeClass cls : {SdeClass::NonAutonomous, SdeClass::AutonomousMultiplicative,
                       SdeClass::AutonomousAdditive}) {
    for (Index d = 1; d <= 4; ++d) {
      const Model model = linsde::testing::random_model(rng, d, cls, 1 + d % 3);
      const Model back = parse_model(serialize_model(model.sde, model.state));
      EXPECT_EQ(back.sde.A, model.sde.A);
      EXPECT_EQ(back.sde.a0, model.sde.a0);
      EXPECT_EQ(back.sde.a1, model.sde.a1);
      EXPECT_EQ(back.sde.t0, model.sde.t0);
      ASSERT_EQ(back.sde.channels(), model.sde.channels());
      for (Index i = 0; i < model.sde.channels(); ++i) {
        EXPECT_EQ(back.sde.B[i], model.sde.B[i]);
        EXPECT_EQ(back.sde.b0[i], model.sde.b0[i]);
        EXPECT_EQ(back.sde.b1[i], model.sde.b1[i]);
      }
      EXPECT_EQ(back.state.m0, model.state.m0);
      EXPECT_EQ(back.state.P0, model.state.P0);
    }
  }
}

TEST(ParseModel, MissingFile) {
  EXPECT_THROW(load_model("/nonexistent/model.json"), ModelError);
}

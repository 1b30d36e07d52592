#include "linsde/model.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "linsde/errors.hpp"

namespace linsde {

namespace {

using json = nlohmann::json;

std::string shape(Index r, Index c) { return std::to_string(r) + "x" + std::to_string(c); }

void check_finite(const Matrix& x, const std::string& field) {
  for (Index j = 0; j < x.cols(); ++j) {
    for (Index i = 0; i < x.rows(); ++i) {
      if (!std::isfinite(x(i, j))) {
        throw ModelError(field + "[" + std::to_string(i) + "][" + std::to_string(j) + "]",
                         "entry is not finite");
      }
    }
  }
}

void check_finite(const Vector& x, const std::string& field) {
  for (Index i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x(i))) {
      throw ModelError(field + "[" + std::to_string(i) + "]", "entry is not finite");
    }
  }
}

void check_matrix(const Matrix& x, Index rows, Index cols, const std::string& field) {
  if (x.rows() != rows || x.cols() != cols) {
    throw ModelError(field, "expected " + shape(rows, cols) + ", got " + shape(x.rows(), x.cols()));
  }
  check_finite(x, field);
}

void check_vector(const Vector& x, Index len, const std::string& field) {
  if (x.size() != len) {
    throw ModelError(field, "expected length " + std::to_string(len) + ", got " +
                                std::to_string(x.size()));
  }
  check_finite(x, field);
}

double read_number(const json& j, const std::string& path) {
  if (!j.is_number()) {
    throw ModelError(path, "expected a number");
  }
  const double x = j.get<double>();
  if (!std::isfinite(x)) {
    throw ModelError(path, "number is not finite");
  }
  return x;
}

Index read_count(const json& j, const std::string& path) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) {
    throw ModelError(path, "expected a non-negative integer");
  }
  const auto x = j.get<long long>();
  if (x < 0) {
    throw ModelError(path, "expected a non-negative integer");
  }
  return static_cast<Index>(x);
}

Vector read_vector(const json& j, Index len, const std::string& path) {
  if (!j.is_array()) {
    throw ModelError(path, "expected an array of " + std::to_string(len) + " numbers");
  }
  if (static_cast<Index>(j.size()) != len) {
    throw ModelError(path, "expected length " + std::to_string(len) + ", got " +
                               std::to_string(j.size()));
  }
  Vector v(len);
  for (Index i = 0; i < len; ++i) {
    v(i) = read_number(j[i], path + "[" + std::to_string(i) + "]");
  }
  return v;
}

// Row-major nested arrays.
Matrix read_matrix(const json& j, Index rows, Index cols, const std::string& path) {
  if (!j.is_array() || static_cast<Index>(j.size()) != rows) {
    throw ModelError(path, "expected " + std::to_string(rows) + " rows of " +
                               std::to_string(cols) + " numbers");
  }
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const std::string row_path = path + "[" + std::to_string(i) + "]";
    const json& row = j[i];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
      throw ModelError(row_path, "expected a row of " + std::to_string(cols) + " numbers");
    }
    for (Index c = 0; c < cols; ++c) {
      m(i, c) = read_number(row[c], row_path + "[" + std::to_string(c) + "]");
    }
  }
  return m;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) {
      row.push_back(m(i, j));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) {
    out.push_back(v(i));
  }
  return out;
}

constexpr std::array<std::string_view, 11> kKnownFields = {"d",  "m",  "t0", "A",  "a0", "a1",
                                                           "B",  "b0", "b1", "m0", "P0"};

}  // namespace

void LinearSde::validate() const {
  const Index d = A.rows();
  if (d < 1) {
    throw ModelError("d", "state dimension must be at least 1");
  }
  check_matrix(A, d, d, "A");
  check_vector(a0, d, "a0");
  check_vector(a1, d, "a1");
  if (!std::isfinite(t0)) {
    throw ModelError("t0", "initial time is not finite");
  }
  if (b0.size() != B.size() || b1.size() != B.size()) {
    throw ModelError("m", "B, b0 and b1 must list the same number of channels");
  }
  for (std::size_t i = 0; i < B.size(); ++i) {
    const std::string idx = "[" + std::to_string(i) + "]";
    check_matrix(B[i], d, d, "B" + idx);
    check_vector(b0[i], d, "b0" + idx);
    check_vector(b1[i], d, "b1" + idx);
  }
}

LinearSde make_sde(Matrix A, double t0) {
  LinearSde sde;
  const Index d = A.rows();
  sde.A = std::move(A);
  sde.a0 = Vector::Zero(d);
  sde.a1 = Vector::Zero(d);
  sde.t0 = t0;
  return sde;
}

void add_channel(LinearSde& sde, Matrix B, Vector b0, Vector b1) {
  const Index d = sde.dim();
  sde.B.push_back(std::move(B));
  sde.b0.push_back(std::move(b0));
  sde.b1.push_back(b1.size() == 0 ? Vector::Zero(d) : std::move(b1));
}

void MomentState::validate(double sym_tol, double psd_slack) const {
  const Index d = m0.size();
  if (d < 1) {
    throw ModelError("m0", "initial mean must be non-empty");
  }
  check_finite(m0, "m0");
  check_matrix(P0, d, d, "P0");
  const double scale = std::max(max_abs(P0), 1e-300);
  const double asym = max_abs(P0 - P0.transpose());
  if (asym > sym_tol * scale) {
    throw ModelError("P0", "second moment is not symmetric (max |P0 - P0^T| = " +
                               std::to_string(asym) + ")");
  }
  const Matrix cov = 0.5 * (P0 + P0.transpose()) - m0 * m0.transpose();
  const double min_eig = Eigen::SelfAdjointEigenSolver<Matrix>(cov, Eigen::EigenvaluesOnly)
                             .eigenvalues()
                             .minCoeff();
  if (min_eig < -psd_slack * std::max(1.0, max_abs(P0))) {
    throw ModelError("P0", "P0 - m0 m0^T is not positive semidefinite (minimum eigenvalue " +
                               std::to_string(min_eig) + ")");
  }
}

std::string_view to_string(SdeClass cls) {
  switch (cls) {
    case SdeClass::NonAutonomous:
      return "non-autonomous";
    case SdeClass::AutonomousMultiplicative:
      return "autonomous-multiplicative";
    case SdeClass::AutonomousAdditive:
      return "autonomous-additive";
  }
  return "unknown";
}

SdeClass classify(const LinearSde& sde, double zero_tol) {
  const auto is_zero = [zero_tol](const Matrix& x) { return max_abs(x) <= zero_tol; };
  bool time_dependent = !is_zero(sde.a1);
  for (const auto& b : sde.b1) {
    time_dependent = time_dependent || !is_zero(b);
  }
  if (time_dependent) {
    return SdeClass::NonAutonomous;
  }
  const bool multiplicative =
      std::any_of(sde.B.begin(), sde.B.end(), [&](const Matrix& b) { return !is_zero(b); });
  return multiplicative ? SdeClass::AutonomousMultiplicative : SdeClass::AutonomousAdditive;
}

Model parse_model(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ModelError("", std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) {
    throw ModelError("", "model file must be a JSON object");
  }
  for (const auto& [key, value] : doc.items()) {
    if (std::find(kKnownFields.begin(), kKnownFields.end(), key) == kKnownFields.end()) {
      throw ModelError(key, "unknown field (drift and diffusion offsets are affine in time: "
                            "use a0/a1 and b0/b1)");
    }
  }
  for (const char* required : {"d", "A", "m0", "P0"}) {
    if (!doc.contains(required)) {
      throw ModelError(required, "required field is missing");
    }
  }

  const Index d = read_count(doc["d"], "d");
  if (d < 1) {
    throw ModelError("d", "state dimension must be at least 1");
  }

  Index m = 0;
  if (doc.contains("m")) {
    m = read_count(doc["m"], "m");
  } else {
    for (const char* key : {"B", "b0", "b1"}) {
      if (doc.contains(key) && doc[key].is_array()) {
        m = std::max<Index>(m, static_cast<Index>(doc[key].size()));
      }
    }
  }

  Model out;
  LinearSde& sde = out.sde;
  sde.t0 = doc.contains("t0") ? read_number(doc["t0"], "t0") : 0.0;
  sde.A = read_matrix(doc["A"], d, d, "A");
  sde.a0 = doc.contains("a0") ? read_vector(doc["a0"], d, "a0") : Vector::Zero(d);
  sde.a1 = doc.contains("a1") ? read_vector(doc["a1"], d, "a1") : Vector::Zero(d);

  for (const char* key : {"B", "b0", "b1"}) {
    if (doc.contains(key) &&
        (!doc[key].is_array() || static_cast<Index>(doc[key].size()) != m)) {
      throw ModelError(key, "expected an array of m = " + std::to_string(m) + " entries");
    }
  }
  for (Index i = 0; i < m; ++i) {
    const std::string idx = "[" + std::to_string(i) + "]";
    sde.B.push_back(doc.contains("B") ? read_matrix(doc["B"][i], d, d, "B" + idx)
                                      : Matrix::Zero(d, d));
    sde.b0.push_back(doc.contains("b0") ? read_vector(doc["b0"][i], d, "b0" + idx)
                                        : Vector::Zero(d));
    sde.b1.push_back(doc.contains("b1") ? read_vector(doc["b1"][i], d, "b1" + idx)
                                        : Vector::Zero(d));
  }

  out.state.m0 = read_vector(doc["m0"], d, "m0");
  out.state.P0 = read_matrix(doc["P0"], d, d, "P0");

  sde.validate();
  out.state.validate();
  return out;
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ModelError("", "cannot open model file '" + path.string() + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

std::string serialize_model(const LinearSde& sde, const MomentState& state) {
  json doc;
  doc["d"] = sde.dim();
  doc["m"] = sde.channels();
  doc["t0"] = sde.t0;
  doc["A"] = matrix_to_json(sde.A);
  doc["a0"] = vector_to_json(sde.a0);
  doc["a1"] = vector_to_json(sde.a1);
  doc["B"] = json::array();
  doc["b0"] = json::array();
  doc["b1"] = json::array();
  for (Index i = 0; i < sde.channels(); ++i) {
    doc["B"].push_back(matrix_to_json(sde.B[i]));
    doc["b0"].push_back(vector_to_json(sde.b0[i]));
    doc["b1"].push_back(vector_to_json(sde.b1[i]));
  }
  doc["m0"] = vector_to_json(state.m0);
  doc["P0"] = matrix_to_json(state.P0);
  return doc.dump(2) + "\n";
}

}  // namespace linsde

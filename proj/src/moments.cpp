#include "linsde/moments.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "linsde/errors.hpp"

namespace linsde {

namespace {

void require_state_matches(const LinearSde& sde, const MomentState& state) {
  if (state.m0.size() != sde.dim() || state.P0.rows() != sde.dim() ||
      state.P0.cols() != sde.dim()) {
    throw DimensionError("initial moments do not match the model dimension " +
                         std::to_string(sde.dim()));
  }
}

void require_forward(double t0, double t) {
  if (!std::isfinite(t)) {
    throw ModelError("t", "time is not finite");
  }
  if (t < t0) {
    throw ModelError("t", "requested time " + std::to_string(t) + " precedes t0 = " +
                              std::to_string(t0) + "; only forward evaluation is supported");
  }
}

ExpmMethod resolve_method(const AugmentedSystem& sys, const ExpmOptions& opts) {
  if (sys.form == AugmentedForm::Additive) {
    return ExpmMethod::DensePade;
  }
  return opts.method.value_or(sys.size() <= kDenseExpmLimit ? ExpmMethod::DensePade
                                                            : ExpmMethod::ActionOnVector);
}

MomentResult from_vector(const AugmentedSystem& sys, const MomentState& state, double t,
                         const Vector& v) {
  const Index d = sys.d;
  Vector mean = state.m0 + v.segment(sys.mean_offset, d);
  Matrix secmom = unvec(v.head(d * d), d, d);
  return finalize_moments(t, std::move(mean), std::move(secmom));
}

MomentResult from_blocks(const AugmentedSystem& sys, const MomentState& state, double t,
                         const Matrix& e) {
  const Index d = sys.d;
  const Matrix f = e.topLeftCorner(d, d);
  const Matrix h = e.block(0, sys.secmom_offset, d, d);
  Vector mean = state.m0 + e.block(0, sys.mean_offset, d, 1);
  const Matrix hf = h * f.transpose();
  Matrix secmom = f * state.P0 * f.transpose() + hf + hf.transpose();
  return finalize_moments(t, std::move(mean), std::move(secmom));
}

}  // namespace

std::string_view to_string(AugmentedForm form) {
  switch (form) {
    case AugmentedForm::General:
      return "general";
    case AugmentedForm::Autonomous:
      return "autonomous";
    case AugmentedForm::Additive:
      return "additive";
  }
  return "unknown";
}

AugmentedForm natural_form(SdeClass cls) {
  switch (cls) {
    case SdeClass::NonAutonomous:
      return AugmentedForm::General;
    case SdeClass::AutonomousMultiplicative:
      return AugmentedForm::Autonomous;
    case SdeClass::AutonomousAdditive:
      return AugmentedForm::Additive;
  }
  return AugmentedForm::General;
}

Index augmented_size(AugmentedForm form, Index d) {
  switch (form) {
    case AugmentedForm::General:
      return d * d + 2 * d + 7;
    case AugmentedForm::Autonomous:
      return d * d + d + 2;
    case AugmentedForm::Additive:
      return 2 * d + 2;
  }
  return 0;
}

BetaMatrices build_beta(const LinearSde& sde) {
  const Index d = sde.dim();
  const Vector a_t0 = sde.drift_offset(sde.t0);
  BetaMatrices beta{Matrix::Zero(d, d), Matrix::Zero(d, d), Matrix::Zero(d, d),
                    kron_sum_vec(a_t0, a_t0), kron_sum_vec(sde.a1, sde.a1)};
  for (Index i = 0; i < sde.channels(); ++i) {
    const Vector b_t0 = sde.diffusion_offset(i, sde.t0);
    const Vector& b1 = sde.b1[i];
    beta.beta1 += b_t0 * b_t0.transpose();
    beta.beta2 += b_t0 * b1.transpose() + b1 * b_t0.transpose();
    beta.beta3 += b1 * b1.transpose();
    beta.beta4 += kron(b_t0, sde.B[i]) + kron(sde.B[i], b_t0);
    beta.beta5 += kron(b1, sde.B[i]) + kron(sde.B[i], b1);
  }
  return beta;
}

MeanGenerator build_mean_generator(const LinearSde& sde, const MomentState& state,
                                   bool time_ramp) {
  require_state_matches(sde, state);
  const Index d = sde.dim();
  const Index k = time_ramp ? d + 2 : d + 1;
  MeanGenerator gen;
  gen.time_ramp = time_ramp;
  gen.C = Matrix::Zero(k, k);
  gen.C.topLeftCorner(d, d) = sde.A;
  gen.C.block(0, k - 1, d, 1) = sde.A * state.m0 + sde.drift_offset(sde.t0);
  if (time_ramp) {
    gen.C.block(0, d, d, 1) = sde.a1;
    gen.C(d, d + 1) = 1.0;
  }
  gen.L = Matrix::Zero(d, k);
  gen.L.leftCols(d).setIdentity();
  gen.r = Vector::Zero(k);
  gen.r(k - 1) = 1.0;
  return gen;
}

MeanGenerator build_mean_generator(const LinearSde& sde, const MomentState& state,
                                   SdeClass cls) {
  return build_mean_generator(sde, state, cls == SdeClass::NonAutonomous);
}

ForcingTerms build_forcing(const LinearSde& sde, const MomentState& state,
                           const MeanGenerator& gen) {
  require_state_matches(sde, state);
  const Index d = sde.dim();
  const Index k = gen.C.rows();
  const BetaMatrices beta = build_beta(sde);
  ForcingTerms out;
  out.constant = vec(beta.beta1) + beta.beta4 * state.m0;
  out.linear = vec(beta.beta2) + beta.beta5 * state.m0;
  out.quadratic = vec(beta.beta3);
  // beta L with L = [I_d 0] is beta padded with zero columns.
  out.mean_coupling = Matrix::Zero(d * d, k);
  out.mean_coupling.leftCols(d) = beta.beta4;
  out.mean_coupling_linear = Matrix::Zero(d * d, k);
  out.mean_coupling_linear.leftCols(d) = beta.beta5;
  return out;
}

Matrix build_second_moment_operator(const LinearSde& sde) {
  Matrix op = kron_sum(sde.A, sde.A);
  for (const auto& b : sde.B) {
    op += kron(b, b);
  }
  return op;
}

AugmentedSystem assemble(const LinearSde& sde, const MomentState& state, double zero_tol) {
  return assemble(sde, state, natural_form(classify(sde, zero_tol)), zero_tol);
}

AugmentedSystem assemble(const LinearSde& sde, const MomentState& state, AugmentedForm form,
                         double zero_tol) {
  sde.validate();
  require_state_matches(sde, state);
  const SdeClass cls = classify(sde, zero_tol);
  if (form == AugmentedForm::Autonomous && cls == SdeClass::NonAutonomous) {
    throw Error("autonomous augmented form requires a1 = b_i1 = 0");
  }
  if (form == AugmentedForm::Additive && cls != SdeClass::AutonomousAdditive) {
    throw Error("additive augmented form requires B_i = 0 and a1 = b_i1 = 0");
  }

  const Index d = sde.dim();
  const Index d2 = d * d;
  AugmentedSystem sys;
  sys.form = form;
  sys.d = d;
  const Index n = augmented_size(form, d);
  sys.M = Matrix::Zero(n, n);

  if (form == AugmentedForm::Additive) {
    const Vector a = sde.drift_offset(sde.t0);
    const Vector mean_rate = sde.A * state.m0 + a;
    Matrix noise = Matrix::Zero(d, d);
    for (Index i = 0; i < sde.channels(); ++i) {
      const Vector b = sde.diffusion_offset(i, sde.t0);
      noise += b * b.transpose();
    }
    sys.M.topLeftCorner(d, d) = sde.A;
    sys.M.block(0, d, d, 1) = a;
    sys.M.block(0, d + 1, d, d) = a * state.m0.transpose() + 0.5 * noise;
    sys.M.block(0, 2 * d + 1, d, 1) = mean_rate;
    sys.M.block(d, d + 1, 1, d) = mean_rate.transpose();
    sys.M.block(d + 1, d + 1, d, d) = -sde.A.transpose();
    sys.secmom_offset = d + 1;
    sys.mean_offset = 2 * d + 1;
    sys.blocks = {{"A", 0, d}, {"drift", d, 1}, {"-A^T", d + 1, d}, {"mean-rate", 2 * d + 1, 1}};
    return sys;
  }

  const MeanGenerator gen = build_mean_generator(sde, state, form == AugmentedForm::General);
  const ForcingTerms forcing = build_forcing(sde, state, gen);
  const Index k = gen.C.rows();
  sys.M.topLeftCorner(d2, d2) = build_second_moment_operator(sde);
  sys.u = Vector::Zero(n);
  sys.u.head(d2) = vec(state.P0);

  if (form == AugmentedForm::General) {
    const Index c1 = d2;
    const Index c2 = d2 + k;
    const Index s1 = d2 + 2 * k;
    const Index s2 = s1 + 1;
    const Index s3 = s1 + 2;
    sys.M.block(0, c1, d2, k) = forcing.mean_coupling_linear;
    sys.M.block(0, c2, d2, k) = forcing.mean_coupling;
    sys.M.block(0, s1, d2, 1) = forcing.quadratic;
    sys.M.block(0, s2, d2, 1) = forcing.linear;
    sys.M.block(0, s3, d2, 1) = forcing.constant;
    sys.M.block(c1, c1, k, k) = gen.C;
    sys.M.block(c1, c2, k, k).setIdentity();
    sys.M.block(c2, c2, k, k) = gen.C;
    sys.M(s1, s2) = 2.0;
    sys.M(s2, s3) = 1.0;
    sys.u.segment(c2, k) = gen.r;
    sys.u(s3) = 1.0;
    sys.mean_offset = c2;
    sys.blocks = {{"second-moment", 0, d2}, {"C-ramp", c1, k}, {"C", c2, k},
                  {"s^2", s1, 1},           {"s", s2, 1},     {"one", s3, 1}};
  } else {
    const Index one = d2;
    const Index c = d2 + 1;
    sys.M.block(0, one, d2, 1) = forcing.constant;
    sys.M.block(0, c, d2, k) = forcing.mean_coupling;
    sys.M.block(c, c, k, k) = gen.C;
    sys.u(one) = 1.0;
    sys.u.segment(c, k) = gen.r;
    sys.mean_offset = c;
    sys.blocks = {{"second-moment", 0, d2}, {"one", one, 1}, {"C", c, k}};
  }
  sys.secmom_offset = 0;
  return sys;
}

MomentResult finalize_moments(double t, Vector mean, Matrix secmom) {
  MomentResult out;
  out.t = t;
  out.symmetry_defect = max_abs(secmom - secmom.transpose());
  out.secmom = 0.5 * (secmom + secmom.transpose());
  out.variance = out.secmom - mean * mean.transpose();
  out.mean = std::move(mean);
  out.min_variance_eig =
      Eigen::SelfAdjointEigenSolver<Matrix>(out.variance, Eigen::EigenvaluesOnly)
          .eigenvalues()
          .minCoeff();
  if (!out.mean.allFinite() || !out.secmom.allFinite()) {
    throw ComputationError("moments are not finite at t = " + std::to_string(t));
  }
  return out;
}

MomentResult moments_at(const AugmentedSystem& sys, const MomentState& state, double t0,
                        double t, const ExpmOptions& opts) {
  require_forward(t0, t);
  const double h = t - t0;
  if (sys.form == AugmentedForm::Additive) {
    return from_blocks(sys, state, t, expm(sys.M, h, opts));
  }
  if (resolve_method(sys, opts) == ExpmMethod::ActionOnVector) {
    return from_vector(sys, state, t, expm_action(sys.M, sys.u, h, opts));
  }
  return from_vector(sys, state, t, expm(sys.M, h, opts) * sys.u);
}

MomentResult moments_at(const LinearSde& sde, const MomentState& state, double t,
                        const MomentOptions& opts) {
  require_forward(sde.t0, t);
  const AugmentedSystem sys = opts.form ? assemble(sde, state, *opts.form, opts.zero_tol)
                                        : assemble(sde, state, opts.zero_tol);
  return moments_at(sys, state, sde.t0, t, opts.expm);
}

std::vector<MomentResult> propagate_grid(const LinearSde& sde, const MomentState& state,
                                         double start, double step, Index n_steps,
                                         const MomentOptions& opts) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw ModelError("step", "grid step must be positive and finite");
  }
  if (n_steps < 1) {
    throw ModelError("n_steps", "grid needs at least one step");
  }
  LinearSde shifted = sde;
  shifted.t0 = start;
  const AugmentedSystem sys = opts.form ? assemble(shifted, state, *opts.form, opts.zero_tol)
                                        : assemble(shifted, state, opts.zero_tol);
  std::vector<MomentResult> out;
  out.reserve(static_cast<std::size_t>(n_steps));

  if (sys.form == AugmentedForm::Additive) {
    const Matrix e = expm(sys.M, step, opts.expm);
    Matrix power = e;
    for (Index k = 1; k <= n_steps; ++k) {
      out.push_back(from_blocks(sys, state, start + static_cast<double>(k) * step, power));
      if (k < n_steps) {
        power = power * e;
      }
    }
    return out;
  }

  Vector v = sys.u;
  if (resolve_method(sys, opts.expm) == ExpmMethod::ActionOnVector) {
    for (Index k = 1; k <= n_steps; ++k) {
      v = expm_action(sys.M, v, step, opts.expm);
      out.push_back(from_vector(sys, state, start + static_cast<double>(k) * step, v));
    }
    return out;
  }
  const Matrix e = expm(sys.M, step, opts.expm);
  for (Index k = 1; k <= n_steps; ++k) {
    v = e * v;
    out.push_back(from_vector(sys, state, start + static_cast<double>(k) * step, v));
  }
  return out;
}

MomentResult moments_baseline(const LinearSde& sde, const MomentState& state, double t,
                              const ExpmOptions& opts) {
  sde.validate();
  require_state_matches(sde, state);
  require_forward(sde.t0, t);
  const double h = t - sde.t0;
  const Index d = sde.dim();
  const Index d2 = d * d;

  const Matrix op = build_second_moment_operator(sde);
  const MeanGenerator gen = build_mean_generator(sde, state, true);
  const ForcingTerms forcing = build_forcing(sde, state, gen);
  const Index k = gen.C.rows();

  const Matrix f1 = expm(op, h, opts);
  const Matrix f3 = expm(gen.C, h, opts);

  // int_0^h e^{op (h-s)} c1 ds
  Matrix vl = Matrix::Zero(d2 + 1, d2 + 1);
  vl.topLeftCorner(d2, d2) = op;
  vl.block(0, d2, d2, 1) = forcing.constant;
  const Vector k_const = expm(vl, h, opts).block(0, d2, d2, 1);

  // int_0^h e^{op (h-s)} c2 s ds
  vl = Matrix::Zero(d2 + 2, d2 + 2);
  vl.topLeftCorner(d2, d2) = op;
  vl.block(0, d2, d2, 1) = forcing.linear;
  vl(d2, d2 + 1) = 1.0;
  const Vector k_lin = expm(vl, h, opts).block(0, d2 + 1, d2, 1);

  // int_0^h e^{op (h-s)} c3 s^2 ds
  vl = Matrix::Zero(d2 + 3, d2 + 3);
  vl.topLeftCorner(d2, d2) = op;
  vl.block(0, d2, d2, 1) = forcing.quadratic;
  vl(d2, d2 + 1) = 2.0;
  vl(d2 + 1, d2 + 2) = 1.0;
  const Vector k_quad = expm(vl, h, opts).block(0, d2 + 2, d2, 1);

  // int_0^h e^{op (h-s)} G4 e^{C s} ds
  vl = Matrix::Zero(d2 + k, d2 + k);
  vl.topLeftCorner(d2, d2) = op;
  vl.block(0, d2, d2, k) = forcing.mean_coupling;
  vl.block(d2, d2, k, k) = gen.C;
  const Matrix h_mean = expm(vl, h, opts).block(0, d2, d2, k);

  // int_0^h e^{op (h-s)} G5 s e^{C s} ds
  vl = Matrix::Zero(d2 + 2 * k, d2 + 2 * k);
  vl.topLeftCorner(d2, d2) = op;
  vl.block(0, d2, d2, k) = forcing.mean_coupling_linear;
  vl.block(d2, d2, k, k) = gen.C;
  vl.block(d2, d2 + k, k, k).setIdentity();
  vl.block(d2 + k, d2 + k, k, k) = gen.C;
  const Matrix h_mean_lin = expm(vl, h, opts).block(0, d2 + k, d2, k);

  const Vector vec_p = f1 * vec(state.P0) + k_const + k_lin + k_quad + (h_mean + h_mean_lin) * gen.r;
  Vector mean = state.m0 + gen.L * (f3 * gen.r);
  return finalize_moments(t, std::move(mean), unvec(vec_p, d, d));
}

}  // namespace linsde

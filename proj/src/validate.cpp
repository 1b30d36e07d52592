#include "linsde/validate.hpp"

#include <algorithm>
#include <cmath>

namespace linsde {

bool ValidationReport::passed() const {
  return !checks.empty() &&
         std::all_of(checks.begin(), checks.end(), [](const CheckLine& c) { return c.passed; });
}

ValidationReport validate_model(const LinearSde& sde, const MomentState& state,
                                const ValidateConfig& cfg) {
  ValidationReport report;
  report.engine = moments_at(sde, state, cfg.t);
  if (cfg.engine_hook) {
    cfg.engine_hook(report.engine);
  }
  report.rk4 = rk4_moments(sde, state, cfg.t, cfg.rk4_steps);

  const auto add = [&](std::string name, double value, double threshold) {
    report.checks.push_back({std::move(name), value, threshold, value <= threshold});
  };
  add("rk4 mean rel err", rel_diff(report.engine.mean, report.rk4.mean), cfg.rk4_tol);
  add("rk4 secmom rel err", rel_diff(report.engine.secmom, report.rk4.secmom), cfg.rk4_tol);
  const double var_scale = max_abs(report.engine.variance);
  add("variance min eigenvalue (negated)", -report.engine.min_variance_eig, 1e-8 * var_scale);
  add("secmom symmetry defect", report.engine.symmetry_defect,
      1e-10 * std::max(max_abs(report.engine.secmom), 1e-300));

  if (cfg.run_mc) {
    report.mc = euler_maruyama_mc(sde, state, cfg.t, cfg.mc);
    const McEstimate& mc = *report.mc;
    const double h = (cfg.t - sde.t0) / static_cast<double>(cfg.mc.n_steps);
    const double mean_bias = h * std::max(1.0, max_abs(report.engine.mean));
    const double mom_bias = h * std::max(1.0, max_abs(report.engine.secmom));
    const Index d = sde.dim();
    for (Index i = 0; i < d; ++i) {
      add("mc mean[" + std::to_string(i) + "]", std::abs(mc.mean(i) - report.engine.mean(i)),
          cfg.n_sigma * mc.stderr_mean(i) + mean_bias);
    }
    for (Index j = 0; j < d; ++j) {
      for (Index i = 0; i <= j; ++i) {
        add("mc secmom[" + std::to_string(i) + "][" + std::to_string(j) + "]",
            std::abs(mc.secmom(i, j) - report.engine.secmom(i, j)),
            cfg.n_sigma * mc.stderr_secmom(i, j) + mom_bias);
      }
    }
  }
  return report;
}

}  // namespace linsde

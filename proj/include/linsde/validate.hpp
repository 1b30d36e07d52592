#pragma once

// Cross-checks the moment engine against the RK4 and Monte Carlo oracles.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "linsde/oracle.hpp"

namespace linsde {

struct ValidateConfig {
  double t = 1.0;
  Index rk4_steps = 10000;
  double rk4_tol = 1e-6;
  bool run_mc = true;
  McConfig mc{};
  double n_sigma = 3.0;
  /// Lets tests perturb the engine result before comparison.
  std::function<void(MomentResult&)> engine_hook;
};

struct CheckLine {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

struct ValidationReport {
  MomentResult engine;
  MomentResult rk4;
  std::optional<McEstimate> mc;
  std::vector<CheckLine> checks;

  bool passed() const;
};

/// RK4 checks compare normwise relative differences of mean and second
/// moment with rk4_tol. Each Monte Carlo component must satisfy
/// |mc - engine| <= n_sigma * stderr + h * max(1, max|engine quantity|),
/// where h is the Euler-Maruyama step (bias allowance of the scheme).
ValidationReport validate_model(const LinearSde& sde, const MomentState& state,
                                const ValidateConfig& cfg);

}  // namespace linsde

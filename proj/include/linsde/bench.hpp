#pragma once

// New-vs-baseline timing on the Hilbert-matrix test equations and the
// BenchReport table/CSV formats.

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "linsde/model.hpp"

namespace linsde {

/// Test equations with H = hilbert(d) and 1 the all-ones vector, t0 = 0,
/// m0 = 1, P0 = 1 1^T:
///   NonAutonomous:             dx = (-H x + 1 t) dt + H x dw
///   AutonomousMultiplicative:  dx = -H x dt + H x dw
///   AutonomousAdditive:        dx = -H x dt + 1 dw
Model hilbert_test_equation(SdeClass cls, Index d);

struct BenchRow {
  SdeClass equation_class = SdeClass::NonAutonomous;
  Index d = 0;
  double time_new = 0.0;       // seconds per evaluation, median over reps
  double time_baseline = 0.0;  // seconds per evaluation, median over reps
  double ratio = 0.0;          // time_new / time_baseline
  int reps = 0;
  double max_rel_diff = 0.0;   // new vs baseline moments
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::string environment;
};

struct BenchOptions {
  std::vector<Index> dims{2, 8};
  int reps = 7;
  /// Each timed sample repeats the evaluation until at least this much
  /// wall time has elapsed.
  double min_sample_seconds = 2e-3;
  double t = 1.0;
};

/// Times moments_at against moments_baseline at t = opts.t for every class
/// and dimension, single-threaded. A warm-up rep is discarded. Requires
/// reps >= 5 and dims within 1..12.
BenchReport run_bench(const BenchOptions& opts);

/// Host and build description recorded in reports.
std::string describe_environment();

/// Human-readable table, 6 significant digits.
void write_table(std::ostream& out, const BenchReport& report);

/// CSV with 17 significant digits; parse_bench_csv reads it back exactly.
std::string bench_to_csv(const BenchReport& report);
BenchReport parse_bench_csv(std::string_view text);

SdeClass parse_sde_class(std::string_view name);

}  // namespace linsde

#include "cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "linsde/bench.hpp"
#include "linsde/errors.hpp"
#include "linsde/moments.hpp"
#include "linsde/validate.hpp"

namespace linsde::cli {

namespace {

std::string fmt(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

void print_vector(std::ostream& out, const Vector& v) {
  out << "[";
  for (Index i = 0; i < v.size(); ++i) {
    out << (i == 0 ? "" : ", ") << fmt(v(i), 6);
  }
  out << "]\n";
}

void print_matrix(std::ostream& out, const Matrix& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    out << "    ";
    print_vector(out, m.row(i).transpose());
  }
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream file(path);
  if (!file) {
    throw ModelError("csv", "cannot open '" + path + "' for writing");
  }
  file << content;
}

struct MomentsArgs {
  std::string model;
  std::vector<double> times;
  std::string csv;
  bool secmom = false;
};

int cmd_moments(const MomentsArgs& args, std::ostream& out) {
  const Model model = load_model(args.model);
  std::ostringstream csv;
  csv << "t,quantity,row,col,value\n";
  const auto csv_matrix = [&](double t, const char* name, const Matrix& m) {
    for (Index j = 0; j < m.cols(); ++j) {
      for (Index i = 0; i < m.rows(); ++i) {
        csv << fmt(t, 17) << "," << name << "," << i << "," << j << "," << fmt(m(i, j), 17)
            << "\n";
      }
    }
  };

  out << "model: d = " << model.sde.dim() << ", m = " << model.sde.channels()
      << ", class = " << to_string(classify(model.sde)) << "\n";
  for (double t : args.times) {
    const MomentResult r = moments_at(model.sde, model.state, t);
    out << "\nt = " << fmt(t, 6) << "\n";
    out << "  mean: ";
    print_vector(out, r.mean);
    out << "  variance:\n";
    print_matrix(out, r.variance);
    if (args.secmom) {
      out << "  second moment:\n";
      print_matrix(out, r.secmom);
    }
    out << "  symmetry defect: " << fmt(r.symmetry_defect, 6)
        << ", min variance eigenvalue: " << fmt(r.min_variance_eig, 6) << "\n";
    csv_matrix(t, "mean", r.mean);
    csv_matrix(t, "variance", r.variance);
    csv_matrix(t, "secmom", r.secmom);
  }
  if (!args.csv.empty()) {
    write_file(args.csv, csv.str());
  }
  return kSuccess;
}

struct ValidateArgs {
  std::string model;
  double t = 1.0;
  Index rk4_steps = 10000;
  bool no_mc = false;
  McConfig mc;
  bool inject_fault = false;
};

int cmd_validate(const ValidateArgs& args, std::ostream& out) {
  const Model model = load_model(args.model);
  ValidateConfig cfg;
  cfg.t = args.t;
  cfg.rk4_steps = args.rk4_steps;
  cfg.run_mc = !args.no_mc;
  cfg.mc = args.mc;
  if (args.inject_fault) {
    cfg.engine_hook = [](MomentResult& r) {
      r.mean(0) += 1e-3;
      r.secmom(0, 0) += 1e-3;
    };
  }
  const ValidationReport report = validate_model(model.sde, model.state, cfg);
  out << "validate: class = " << to_string(classify(model.sde)) << ", t = " << fmt(args.t, 6)
      << ", rk4 steps = " << args.rk4_steps;
  if (cfg.run_mc) {
    out << ", paths = " << args.mc.n_paths << ", mc steps = " << args.mc.n_steps
        << ", seed = " << args.mc.seed;
  }
  out << "\n";
  for (const auto& c : report.checks) {
    out << (c.passed ? "  PASS  " : "  FAIL  ") << c.name << ": " << fmt(c.value, 6)
        << " <= " << fmt(c.threshold, 6) << "\n";
  }
  out << (report.passed() ? "PASS" : "FAIL") << "\n";
  return report.passed() ? kSuccess : kComputationFailure;
}

struct BenchArgs {
  std::vector<Index> dims{2, 8};
  int reps = 7;
  std::string csv;
  double min_sample = 2e-3;
};

int cmd_bench(const BenchArgs& args, std::ostream& out) {
  BenchOptions opts;
  opts.dims = args.dims;
  opts.reps = args.reps;
  opts.min_sample_seconds = args.min_sample;
  const BenchReport report = run_bench(opts);
  write_table(out, report);
  if (!args.csv.empty()) {
    write_file(args.csv, bench_to_csv(report));
  }
  return kSuccess;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact mean and variance of linear SDEs via a single matrix exponential",
               "linsde"};
  app.require_subcommand(1);

  MomentsArgs margs;
  auto* moments = app.add_subcommand("moments", "Mean, variance and second moment at given times");
  moments->add_option("file", margs.model, "Model file (JSON)")->required();
  moments->add_option("--t", margs.times, "Comma-separated evaluation times")
      ->required()
      ->delimiter(',');
  moments->add_option("--csv", margs.csv, "Write all moments to this CSV file");
  moments->add_flag("--secmom", margs.secmom, "Also print the second moment");

  ValidateArgs vargs;
  auto* validate = app.add_subcommand("validate", "Check the engine against RK4 and Monte Carlo");
  validate->add_option("file", vargs.model, "Model file (JSON)")->required();
  validate->add_option("--t", vargs.t, "Evaluation time")->required();
  validate->add_option("--rk4-steps", vargs.rk4_steps, "RK4 steps")->capture_default_str();
  validate->add_option("--paths", vargs.mc.n_paths, "Monte Carlo paths")->capture_default_str();
  validate->add_option("--mc-steps", vargs.mc.n_steps, "Euler-Maruyama steps per path")
      ->capture_default_str();
  validate->add_option("--seed", vargs.mc.seed, "Monte Carlo seed")->capture_default_str();
  validate->add_flag("--antithetic", vargs.mc.antithetic, "Antithetic path pairs");
  validate->add_flag("--no-mc", vargs.no_mc, "Skip the Monte Carlo oracle");
  validate->add_flag("--inject-fault", vargs.inject_fault, "Perturb the engine result")
      ->group("");

  BenchArgs bargs;
  auto* bench = app.add_subcommand("bench", "Time the single-exponential route against the "
                                            "multi-exponential baseline");
  bench->add_option("--dims", bargs.dims, "Comma-separated state dimensions (1..12)")
      ->delimiter(',')
      ->capture_default_str();
  bench->add_option("--reps", bargs.reps, "Timed repetitions (>= 5)")->capture_default_str();
  bench->add_option("--csv", bargs.csv, "Write the report to this CSV file");
  bench->add_option("--min-sample", bargs.min_sample, "Minimum seconds per timed sample")
      ->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kInputError;
  }

  try {
    if (moments->parsed()) {
      return cmd_moments(margs, out);
    }
    if (validate->parsed()) {
      return cmd_validate(vargs, out);
    }
    return cmd_bench(bargs, out);
  } catch (const ModelError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kComputationFailure;
  }
}

}  // namespace linsde::cli

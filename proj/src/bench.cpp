#include "linsde/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <sys/utsname.h>

#include "linsde/errors.hpp"
#include "linsde/moments.hpp"

namespace linsde {

namespace {

using Clock = std::chrono::steady_clock;

// Median seconds per call of `fn`, over `reps` samples after one warm-up.
template <class Fn>
double median_seconds(Fn&& fn, int reps, double min_sample_seconds) {
  // Grow the inner loop until a sample is well above clock resolution.
  long inner = 1;
  for (;;) {
    const auto start = Clock::now();
    for (long i = 0; i < inner; ++i) {
      fn();
    }
    const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
    if (elapsed >= min_sample_seconds || inner >= (1L << 24)) {
      break;
    }
    inner *= 2;
  }
  std::vector<double> samples;
  samples.reserve(static_cast<std::size_t>(reps));
  for (int r = 0; r <= reps; ++r) {
    const auto start = Clock::now();
    for (long i = 0; i < inner; ++i) {
      fn();
    }
    const double per_call =
        std::chrono::duration<double>(Clock::now() - start).count() / static_cast<double>(inner);
    if (r > 0) {
      samples.push_back(per_call);
    }
  }
  std::sort(samples.begin(), samples.end());
  const std::size_t mid = samples.size() / 2;
  return samples.size() % 2 == 1 ? samples[mid] : 0.5 * (samples[mid - 1] + samples[mid]);
}

std::string format_g(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    fields.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) {
      break;
    }
    start = comma + 1;
  }
  return fields;
}

double parse_double(const std::string& s, const std::string& field) {
  try {
    std::size_t used = 0;
    const double x = std::stod(s, &used);
    if (used != s.size()) {
      throw std::invalid_argument(s);
    }
    return x;
  } catch (const std::exception&) {
    throw ModelError(field, "cannot parse '" + s + "' as a number");
  }
}

constexpr const char* kCsvHeader = "equation_class,d,time_new,time_baseline,ratio,reps,max_rel_diff";

}  // namespace

Model hilbert_test_equation(SdeClass cls, Index d) {
  const Matrix h = hilbert(d);
  const Vector ones = Vector::Ones(d);
  Model model;
  model.sde = make_sde(-h, 0.0);
  switch (cls) {
    case SdeClass::NonAutonomous:
      model.sde.a1 = ones;
      add_channel(model.sde, h, Vector::Zero(d));
      break;
    case SdeClass::AutonomousMultiplicative:
      add_channel(model.sde, h, Vector::Zero(d));
      break;
    case SdeClass::AutonomousAdditive:
      add_channel(model.sde, Matrix::Zero(d, d), ones);
      break;
  }
  model.state.m0 = ones;
  model.state.P0 = ones * ones.transpose();
  return model;
}

SdeClass parse_sde_class(std::string_view name) {
  for (SdeClass cls : {SdeClass::NonAutonomous, SdeClass::AutonomousMultiplicative,
                       SdeClass::AutonomousAdditive}) {
    if (to_string(cls) == name) {
      return cls;
    }
  }
  throw ModelError("equation_class", "unknown equation class '" + std::string(name) + "'");
}

std::string describe_environment() {
  std::ostringstream out;
  utsname info{};
  if (uname(&info) == 0) {
    out << info.sysname << " " << info.release << " " << info.machine;
  } else {
    out << "unknown host";
  }
  out << "; " << std::thread::hardware_concurrency() << " hardware threads";
#if defined(__clang__)
  out << "; clang " << __clang_major__ << "." << __clang_minor__;
#elif defined(__GNUC__)
  out << "; gcc " << __GNUC__ << "." << __GNUC_MINOR__;
#endif
#ifdef NDEBUG
  out << "; optimized build";
#else
  out << "; debug build";
#endif
  out << "; Eigen " << EIGEN_WORLD_VERSION << "." << EIGEN_MAJOR_VERSION << "."
      << EIGEN_MINOR_VERSION;
  return out.str();
}

BenchReport run_bench(const BenchOptions& opts) {
  if (opts.reps < 5) {
    throw ModelError("reps", "at least 5 repetitions are required");
  }
  if (opts.dims.empty()) {
    throw ModelError("dims", "no dimensions requested");
  }
  for (Index d : opts.dims) {
    if (d < 1 || d > 12) {
      throw ModelError("dims", "dimension " + std::to_string(d) + " outside 1..12");
    }
  }
  BenchReport report;
  report.environment = describe_environment();
  for (SdeClass cls : {SdeClass::NonAutonomous, SdeClass::AutonomousMultiplicative,
                       SdeClass::AutonomousAdditive}) {
    for (Index d : opts.dims) {
      const Model model = hilbert_test_equation(cls, d);
      const MomentResult fresh = moments_at(model.sde, model.state, opts.t);
      const MomentResult base = moments_baseline(model.sde, model.state, opts.t);
      BenchRow row;
      row.equation_class = cls;
      row.d = d;
      row.reps = opts.reps;
      row.max_rel_diff =
          std::max(rel_diff(fresh.mean, base.mean), rel_diff(fresh.secmom, base.secmom));
      volatile double sink = 0.0;
      row.time_new = median_seconds(
          [&] { sink = sink + moments_at(model.sde, model.state, opts.t).secmom(0, 0); },
          opts.reps, opts.min_sample_seconds);
      row.time_baseline = median_seconds(
          [&] { sink = sink + moments_baseline(model.sde, model.state, opts.t).secmom(0, 0); },
          opts.reps, opts.min_sample_seconds);
      row.ratio = row.time_new / row.time_baseline;
      report.rows.push_back(row);
    }
  }
  return report;
}

void write_table(std::ostream& out, const BenchReport& report) {
  out << "Relative computational time, single-exponential vs multi-exponential route\n";
  out << "environment: " << report.environment << "\n";
  out << "ratios are hardware dependent; compare the pattern across classes and dimensions\n\n";
  out << std::left << std::setw(28) << "equation class" << std::right << std::setw(4) << "d"
      << std::setw(14) << "new [s]" << std::setw(14) << "baseline [s]" << std::setw(12)
      << "ratio" << std::setw(6) << "reps" << std::setw(14) << "max rel diff" << "\n";
  for (const auto& row : report.rows) {
    out << std::left << std::setw(28) << to_string(row.equation_class) << std::right
        << std::setw(4) << row.d << std::setw(14) << format_g(row.time_new, 6) << std::setw(14)
        << format_g(row.time_baseline, 6) << std::setw(12) << format_g(row.ratio, 6)
        << std::setw(6) << row.reps << std::setw(14) << format_g(row.max_rel_diff, 6) << "\n";
  }
}

std::string bench_to_csv(const BenchReport& report) {
  std::ostringstream out;
  out << "# environment: " << report.environment << "\n";
  out << "# ratio = time_new / time_baseline; times are medians in seconds per evaluation\n";
  out << kCsvHeader << "\n";
  for (const auto& row : report.rows) {
    out << to_string(row.equation_class) << "," << row.d << "," << format_g(row.time_new, 17)
        << "," << format_g(row.time_baseline, 17) << "," << format_g(row.ratio, 17) << ","
        << row.reps << "," << format_g(row.max_rel_diff, 17) << "\n";
  }
  return out.str();
}

BenchReport parse_bench_csv(std::string_view text) {
  BenchReport report;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.remove_suffix(1);
    }
    if (line.empty()) {
      continue;
    }
    constexpr std::string_view kEnv = "# environment: ";
    if (line.starts_with(kEnv)) {
      report.environment = std::string(line.substr(kEnv.size()));
      continue;
    }
    if (line.front() == '#') {
      continue;
    }
    if (!header_seen) {
      if (line != kCsvHeader) {
        throw ModelError("line " + std::to_string(line_no), "unexpected CSV header");
      }
      header_seen = true;
      continue;
    }
    const auto f = split_csv_line(line);
    const std::string where = "line " + std::to_string(line_no);
    if (f.size() != 7) {
      throw ModelError(where, "expected 7 fields");
    }
    BenchRow row;
    row.equation_class = parse_sde_class(f[0]);
    row.d = static_cast<Index>(parse_double(f[1], where + " d"));
    row.time_new = parse_double(f[2], where + " time_new");
    row.time_baseline = parse_double(f[3], where + " time_baseline");
    row.ratio = parse_double(f[4], where + " ratio");
    row.reps = static_cast<int>(parse_double(f[5], where + " reps"));
    row.max_rel_diff = parse_double(f[6], where + " max_rel_diff");
    report.rows.push_back(row);
  }
  if (!header_seen) {
    throw ModelError("", "CSV header missing");
  }
  return report;
}

}  // namespace linsde

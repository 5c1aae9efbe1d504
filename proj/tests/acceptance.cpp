// One PASS/FAIL line per acceptance criterion. Exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "modlab/harness.hpp"

using namespace modlab;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

struct Outcome {
  bool passed = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    passed = passed && ok;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "FAILED ") + what;
  }
  void add(const CheckResult& c) {
    require(c.passed, c.name + " " + num(c.measured) + " <= " + num(c.tolerance));
  }
  void add(const std::vector<CheckResult>& cs) {
    for (const auto& c : cs) add(c);
  }
};

int failures = 0;

void criterion(int id, const std::string& title, const std::function<Outcome()>& body) {
  Outcome o;
  const auto t0 = Clock::now();
  try {
    o = body();
  } catch (const std::exception& e) {
    o.passed = false;
    o.detail = std::string("exception: ") + e.what();
  }
  if (!o.passed) ++failures;
  std::printf("%s %2d %s (%.1f s): %s\n", o.passed ? "PASS" : "FAIL", id, title.c_str(),
              seconds_since(t0), o.detail.c_str());
  std::fflush(stdout);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance run"};
  std::string cache_dir = ".";
  app.add_option("--cache-dir", cache_dir, "directory for the B-spline norm cache and the report");
  CLI11_PARSE(app, argc, argv);

  ExperimentConfig cfg;  // n=1, m=0.5, delta=0.3, eps=0.05, p=2, q=4, j=10..14
  const WindowSet windows(1);
  const std::filesystem::path dir(cache_dir);
  BsplineNormCache cache(dir / "bspline_norm_cache.json");

  criterion(1, "transform conventions", [] {
    Outcome o;
    const auto t0 = Clock::now();
    o.add(check_transform_conventions());
    const double t = seconds_since(t0);
    o.require(t < 5.0, "runtime " + num(t) + " s < 5 s");
    return o;
  });

  criterion(2, "Moyal constant and pairing", [&] {
    Outcome o;
    o.add(check_moyal(cfg.seed));
    return o;
  });

  criterion(3, "modulated family transform, j = 10..14", [&] {
    Outcome o;
    const auto t0 = Clock::now();
    o.add(check_family_transform(cfg, windows));
    const double t = seconds_since(t0);
    o.require(t < 60.0, "runtime " + num(t) + " s < 60 s");
    return o;
  });

  criterion(4, "closed-form action and truncation doubling", [&] {
    Outcome o;
    for (const auto& c : check_closed_form_action(cfg, windows)) {
      if (c.name.rfind("truncation", 0) == 0) {
        o.require(c.passed, c.name + " decreasing [" + c.detail + "]");
      } else {
        o.add(c);
      }
    }
    return o;
  });

  criterion(5, "cross-term orthogonality and diagonal sum", [&] {
    Outcome o;
    o.add(check_orthogonality(cfg, windows));
    return o;
  });

  criterion(6, "discrete adjoint, dense and separable", [&] {
    Outcome o;
    o.add(check_adjoint(cfg.seed));
    return o;
  });

  criterion(7, "dense vs separable path", [&] {
    Outcome o;
    o.add(check_path_equivalence(cfg, windows, cfg.seed));
    return o;
  });

  GrowthReport report;
  double experiment_seconds = 0.0;
  bool have_report = false;
  try {
    const auto t0 = Clock::now();
    report = run_growth_experiment(cfg, windows, cache, [](const std::string& s) {
      std::fprintf(stderr, "%s\n", s.c_str());
    });
    experiment_seconds = seconds_since(t0);
    emit_report(report, dir / "acceptance_report");
    have_report = true;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "growth experiment failed: %s\n", e.what());
  }
  auto need_report = [&] {
    if (!have_report) throw std::runtime_error("growth experiment did not complete");
  };

  criterion(8, "input-norm exponent", [&] {
    need_report();
    Outcome o;
    o.require(std::abs(report.input.slope - (-0.225)) <= 0.10,
              "slope " + num(report.input.slope) + " within 0.10 of -0.225");
    o.require(report.input.r_squared >= 0.9, "R^2 " + num(report.input.r_squared) + " >= 0.9");
    return o;
  });

  criterion(9, "output lower-bound exponent", [&] {
    need_report();
    Outcome o;
    o.require(report.output_lower.slope >= 0.30, "slope " + num(report.output_lower.slope) + " >= 0.30");
    o.require(report.output_lower.r_squared >= 0.9,
              "R^2 " + num(report.output_lower.r_squared) + " >= 0.9");
    return o;
  });

  criterion(10, "ratio growth and bounded control", [&] {
    need_report();
    Outcome o;
    o.require(report.ratio.slope >= 0.50, "ratio slope " + num(report.ratio.slope) + " >= 0.50");
    const double growth = report.rows.back().ratio / report.rows.front().ratio;
    o.require(growth >= 4.0, "ratio growth x" + num(growth) + " >= 4");
    o.require(std::abs(report.control_ratio.slope) <= 0.05,
              "control slope " + num(report.control_ratio.slope) + " within 0.05 of 0");
    o.require(report.ratio.slope - report.control_ratio.slope >= 0.4, "slopes differ by >= 0.4");
    o.require(experiment_seconds <= 600.0, "experiment " + num(experiment_seconds) + " s <= 600 s");
    o.detail += "; " + report.verdict.statement;
    return o;
  });

  criterion(11, "symbol-class seminorms, shells 10..14", [&] {
    Outcome o;
    o.add(check_symbol_class(cfg, windows).slopes);
    // far shells, for the record only; h_x no longer resolves x-frequency s^2
    // there, so only the beta = 0 rows are meaningful
    ExperimentConfig far = cfg;
    far.j_lo = 20;
    far.j_hi = 30;
    const auto s = check_symbol_class(far, windows);
    double worst = 0.0;
    for (const auto& c : s.slopes) {
      if (c.name.size() >= 6 && c.name.compare(c.name.size() - 6, 6, "beta=0") == 0) {
        worst = std::max(worst, std::abs(c.measured));
      }
    }
    o.detail += "; for reference, beta = 0 on shells 20..30 gives |slope| <= " + num(worst);
    return o;
  });

  criterion(12, "norm invariances", [&] {
    Outcome o;
    o.add(check_norm_invariances(cfg.seed));
    return o;
  });

  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

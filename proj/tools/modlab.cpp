#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "modlab/error.hpp"
#include "modlab/harness.hpp"

using namespace modlab;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitGate = 3;
constexpr int kExitCheck = 4;

void log_line(const std::string& s) { std::cerr << s << '\n'; }

std::string fixed(double v, int digits = 4) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

int print_checks(const std::vector<CheckResult>& checks) {
  bool ok = true;
  for (const auto& c : checks) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.measured << " (tolerance "
              << c.tolerance << ")";
    if (!c.detail.empty()) std::cout << " [" << c.detail << "]";
    std::cout << '\n';
    ok = ok && c.passed;
  }
  return ok ? 0 : kExitCheck;
}

struct RangeSpec {
  double a, b, step;
};

RangeSpec parse_range(const std::string& text) {
  RangeSpec r{};
  char c1 = 0, c2 = 0;
  std::istringstream is(text);
  if (!(is >> r.a >> c1 >> r.b >> c2 >> r.step) || c1 != ':' || c2 != ':' || !is.eof()) {
    throw ConfigError("--range: expected a:b:step, got '" + text + "'");
  }
  return r;
}

int cmd_run(const std::string& config, const std::string& out, const std::string& cache_dir,
            std::optional<int> spectrogram_j) {
  const ExperimentConfig cfg = load_config(config);
  const WindowSet windows(cfg.n);
  const std::filesystem::path dir(out);
  std::filesystem::create_directories(dir);
  const std::filesystem::path cache_file =
      (cache_dir.empty() ? dir : std::filesystem::path(cache_dir)) / "bspline_norm_cache.json";
  BsplineNormCache cache(cache_file);
  const GrowthReport rep = run_growth_experiment(cfg, windows, cache, log_line);
  emit_report(rep, dir);

  if (spectrogram_j) {
    const int j = *spectrogram_j;
    if (j < cfg.j_lo || j > cfg.j_hi) throw ConfigError("--spectrogram: j outside the configured range");
    const auto prm = cfg.params();
    const Grid<double> grid = experiment_grid(cfg, j);
    const Field Tu = apply_separable(tau_symbol(prm, grid, windows), build_input(j, prm, grid, windows));
    write_file_atomic(dir / ("spectrogram_j" + std::to_string(j) + ".csv"),
                      spectrogram_csv(stft(Tu, StftPlan(grid, cfg.stft_step))));
  }

  std::cout << "slope input        " << fixed(rep.input.slope) << "  theory " << fixed(rep.theory.input)
            << "  R^2 " << fixed(rep.input.r_squared) << '\n'
            << "slope output_lower " << fixed(rep.output_lower.slope) << "  theory "
            << fixed(rep.theory.output_lower) << "  R^2 " << fixed(rep.output_lower.r_squared) << '\n'
            << "slope ratio        " << fixed(rep.ratio.slope) << "  theory " << fixed(rep.theory.ratio)
            << "  R^2 " << fixed(rep.ratio.r_squared) << '\n'
            << "slope control      " << fixed(rep.control_ratio.slope) << '\n'
            << rep.verdict.statement << '\n'
            << "report written to " << dir.string() << '\n';
  return 0;
}

int cmd_symbol_class(const std::string& config, const std::string& out) {
  const ExperimentConfig cfg = load_config(config);
  const WindowSet windows(cfg.n);
  const SymbolClassSummary s = check_symbol_class(cfg, windows);
  if (!out.empty()) write_file_atomic(out, symbol_class_csv(s.rows));
  return print_checks(s.slopes);
}

int cmd_identities(const std::string& config) {
  const ExperimentConfig cfg = load_config(config);
  const WindowSet windows(cfg.n);
  return print_checks(identity_suite(cfg, windows, [](const std::string& s) { log_line("running " + s); }));
}

int cmd_exponents(const std::string& config) {
  const ExperimentConfig cfg = load_config(config);
  const auto prm = cfg.params();
  const auto t = theoretical_exponents(prm);
  const auto sigma = sigma_from_tau(prm);
  std::cout << "input " << t.input << '\n'
            << "output_lower " << t.output_lower << '\n'
            << "ratio " << t.ratio << '\n'
            << "ratio_positive " << (t.ratio_positive ? "true" : "false") << '\n'
            << "theorem_condition " << (t.theorem_condition ? "true" : "false")
            << "  (m > -|1/q - 1/2| 2 delta n)\n"
            << "j0 " << prm.j0 << '\n'
            << "sigma_form delta " << sigma.delta_sigma << " class " << sigma.class_claim << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Growth experiments for a pseudo-differential counterexample on modulation spaces"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  std::string config, out, cache_dir, which, range;
  std::optional<int> spectrogram_j;

  auto* run = app.add_subcommand("run", "run the growth experiment and write report.csv/report.json");
  run->add_option("--config", config, "config JSON")->required();
  run->add_option("--out", out, "report directory")->required();
  run->add_option("--cache-dir", cache_dir, "directory of bspline_norm_cache.json (default: --out)");
  run->add_option("--spectrogram", spectrogram_j, "also write the output spectrogram of shell j");

  auto* check = app.add_subcommand("check", "diagnostics");
  check->require_subcommand(1);
  auto* sym = check->add_subcommand("symbol-class", "per-shell symbol seminorm slopes");
  sym->add_option("--config", config, "config JSON")->required();
  sym->add_option("--out", out, "CSV of the per-shell sups");
  auto* ids = check->add_subcommand("identities", "transform, quantization and pairing identities");
  ids->add_option("--config", config, "config JSON")->required();

  auto* win = app.add_subcommand("windows", "window tables");
  win->require_subcommand(1);
  auto* dump = win->add_subcommand("dump", "CSV t,value");
  dump->add_option("--which", which, "phi|psi|eta|Phi|Psi")->required();
  dump->add_option("--range", range, "a:b:step (use --range=-a:b:step for negative a)")->required();

  auto* exps = app.add_subcommand("exponents", "theoretical growth exponents");
  exps->add_option("--config", config, "config JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*run) return cmd_run(config, out, cache_dir, spectrogram_j);
    if (*sym) return cmd_symbol_class(config, out);
    if (*ids) return cmd_identities(config);
    if (*dump) {
      const RangeSpec r = parse_range(range);
      std::cout << window_dump_csv(WindowSet(1), which, r.a, r.b, r.step);
      return 0;
    }
    if (*exps) return cmd_exponents(config);
  } catch (const ConfigError& e) {
    std::cerr << "config invalid: " << e.what() << '\n';
    return kExitConfig;
  } catch (const GateError& e) {
    std::cerr << "numerical gate: " << e.what() << '\n';
    return kExitGate;
  } catch (const ConsistencyError& e) {
    std::cerr << "numerical gate: " << e.what() << '\n';
    return kExitGate;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

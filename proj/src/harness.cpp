#include "modlab/harness.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "modlab/error.hpp"

namespace modlab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kGridBudgetLog2 = 20;  // row grid; the refinement rebuild doubles it
constexpr double kGrowthSlack = 0.15;

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

const Json& field(const Json& obj, const std::string& key, const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) bad(path + "." + key, "required field missing");
  return *it;
}

double as_real(const Json& v, const std::string& path) {
  if (!v.is_number()) bad(path, std::string("expected a number, got ") + v.type_name());
  const double x = v.get<double>();
  if (!std::isfinite(x)) bad(path, "expected a finite number");
  return x;
}

long long as_integer(const Json& v, const std::string& path) {
  if (!v.is_number_integer()) bad(path, std::string("expected an integer, got ") + v.type_name());
  if (v.is_number_unsigned() && v.get<std::uint64_t>() > std::uint64_t(std::numeric_limits<int>::max())) {
    bad(path, "integer out of range");
  }
  return v.get<long long>();
}

int as_int(const Json& v, const std::string& path) {
  const long long x = as_integer(v, path);
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
    bad(path, "integer out of range");
  }
  return static_cast<int>(x);
}

bool as_bool(const Json& v, const std::string& path) {
  if (!v.is_boolean()) bad(path, std::string("expected a boolean, got ") + v.type_name());
  return v.get<bool>();
}

std::string as_string(const Json& v, const std::string& path) {
  if (!v.is_string()) bad(path, std::string("expected a string, got ") + v.type_name());
  return v.get<std::string>();
}

const Json& as_object(const Json& v, const std::string& path) {
  if (!v.is_object()) bad(path, std::string("expected an object, got ") + v.type_name());
  return v;
}

const Json& as_array(const Json& v, const std::string& path) {
  if (!v.is_array()) bad(path, std::string("expected an array, got ") + v.type_name());
  return v;
}

std::string read_text(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError(file.string() + ": cannot read file");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Json parse_text(const std::string& text, const std::filesystem::path& file) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(file.string() + ": $: invalid JSON (" + e.what() + ")");
  }
}

// ---------------------------------------------------------------------------

std::string stage_prefix(int j, const char* stage) {
  return "j=" + std::to_string(j) + " stage " + stage + ": ";
}

template <class Fn>
auto staged(int j, const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    throw ConfigError(stage_prefix(j, stage) + e.what());
  } catch (const GateError& e) {
    throw GateError(stage_prefix(j, stage) + e.what());
  } catch (const ConsistencyError& e) {
    throw ConsistencyError(stage_prefix(j, stage) + e.what());
  } catch (const std::exception& e) {
    throw Error(stage_prefix(j, stage) + e.what());
  }
}

struct Measured {
  double input = 0.0;
  double output = 0.0;
  double lower = 0.0;
  double control = 0.0;
};

Measured measure(int j, const CounterexampleParams& prm, const Grid<double>& grid, double step,
                 const WindowSet& windows, BsplineNormCache& cache) {
  const StftPlan plan(grid, step);
  const Field u = staged(j, "input", [&] { return build_input(j, prm, grid, windows); });
  const Field Tu = staged(j, "apply", [&] {
    return apply_separable(tau_symbol(prm, grid, windows), u);
  });
  const Field Cu = staged(j, "control", [&] { return apply_separable(control_symbol(prm, grid), u); });
  Measured m;
  m.input = staged(j, "input_norm", [&] { return mpq_norm_checked(u, prm.norm, plan).value; });
  m.output = staged(j, "output_norm", [&] { return mpq_norm_checked(Tu, prm.norm, plan).value; });
  m.lower = staged(j, "lower_bound", [&] {
    return bspline_lower_bound(Tu, prm.norm, plan, cache, std::ldexp(1.0, j));
  });
  m.control = staged(j, "control_norm", [&] { return mpq_norm_checked(Cu, prm.norm, plan).value; });
  return m;
}

double rel_change(double a, double b) { return std::abs(a - b) / std::abs(a); }

SlopeFit fit_rows(const std::vector<GrowthRow>& rows, double GrowthRow::*member) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rows) pts.emplace_back(r.j, r.*member);
  return fit_slope(pts);
}

Json fit_json(const SlopeFit& f) {
  return Json{{"slope", f.slope}, {"intercept", f.intercept}, {"r_squared", f.r_squared}};
}

SlopeFit fit_from(const Json& v, const std::string& path) {
  as_object(v, path);
  return {as_real(field(v, "slope", path), path + ".slope"),
          as_real(field(v, "intercept", path), path + ".intercept"),
          as_real(field(v, "r_squared", path), path + ".r_squared")};
}

// ---------------------------------------------------------------------------

Field random_packets(const Grid<double>& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::tuple<Point, Point, Complex, double>> packets;
  for (int k = 0; k < 3; ++k) {
    Point c(g.dim()), w(g.dim());
    for (int a = 0; a < g.dim(); ++a) {
      c[a] = 2.0 * u(rng);
      w[a] = 4.0 * u(rng);
    }
    packets.emplace_back(c, w, Complex(u(rng), u(rng)), 0.6 + 0.4 * u(rng));
  }
  return sample(g, [&](const Point& x) {
    Complex acc(0.0);
    for (const auto& [c, w, amp, s] : packets) {
      acc += amp * std::exp(-s * (x - c).squaredNorm()) * std::polar(1.0, w.dot(x));
    }
    return acc;
  });
}

Field random_noise(const Grid<double>& g, std::mt19937_64& rng) {
  std::normal_distribution<double> N(0.0, 1.0);
  ComplexVector v(g.size());
  for (Index i = 0; i < g.size(); ++i) v[i] = {N(rng), N(rng)};
  return Field(g, v);
}

SymbolEvaluator hashed_symbol(std::uint64_t seed) {
  return [seed](const Point& x, const Point& xi) {
    std::uint64_t h = seed ^ std::hash<double>{}(x[0]) * 0x9E3779B97F4A7C15ULL;
    h ^= std::hash<double>{}(xi[0]) + 0x632BE59BD9B4E019ULL + (h << 6) + (h >> 2);
    std::mt19937_64 r(h);
    std::normal_distribution<double> N(0.0, 1.0);
    return Complex(N(r), N(r));
  };
}

CheckResult at_most(std::string name, double measured, double tol, std::string detail = {}) {
  return {std::move(name), measured, tol, measured <= tol, std::move(detail)};
}

std::string sci(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

std::string format_point(const Point& p) {
  std::string out;
  for (Index a = 0; a < p.size(); ++a) {
    if (a) out += ';';
    out += format_double(p[a]);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

CounterexampleParams ExperimentConfig::params() const {
  return CounterexampleParams::make(n, m, delta_tau, epsilon, p, q, j_lo, j_hi);
}

ExperimentConfig parse_config(const Json& j) {
  static const char* known[] = {"n", "m", "delta_tau", "epsilon", "p", "q",
                                "j_lo", "j_hi", "L", "stft_step", "seed"};
  as_object(j, "$");
  for (const auto& [key, _] : j.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      bad("$." + key, "unknown field");
    }
  }
  ExperimentConfig c;
  c.n = as_int(field(j, "n", "$"), "$.n");
  c.m = as_real(field(j, "m", "$"), "$.m");
  c.delta_tau = as_real(field(j, "delta_tau", "$"), "$.delta_tau");
  c.epsilon = as_real(field(j, "epsilon", "$"), "$.epsilon");
  c.p = as_real(field(j, "p", "$"), "$.p");
  c.q = as_real(field(j, "q", "$"), "$.q");
  c.j_lo = as_int(field(j, "j_lo", "$"), "$.j_lo");
  c.j_hi = as_int(field(j, "j_hi", "$"), "$.j_hi");
  if (j.contains("L")) c.L = as_real(j["L"], "$.L");
  if (j.contains("stft_step")) c.stft_step = as_real(j["stft_step"], "$.stft_step");
  if (j.contains("seed")) {
    const Json& s = j["seed"];
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
      bad("$.seed", "expected a non-negative integer");
    }
    c.seed = s.get<std::uint64_t>();
  }

  if (!(c.L > 0.0)) bad("$.L", "must be positive");
  if (!(c.stft_step > 0.0)) bad("$.stft_step", "must be positive");
  if (!(c.p > 1.0)) bad("$.p", "must exceed 1");
  if (!(c.q > 1.0)) bad("$.q", "must exceed 1");
  if (c.j_hi - c.j_lo + 1 < 4) bad("$.j_hi", "the j-range needs at least 4 points for the slope fits");
  try {
    (void)c.params();
  } catch (const ConfigError& e) {
    bad("$", e.what());
  }
  if (!(snapped_half_extent(c) > 0.0)) bad("$.L", "too small to hold one lattice period");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  return parse_config(parse_text(read_text(file), file));
}

Json to_json(const ExperimentConfig& c) {
  return Json{{"n", c.n},         {"m", c.m},       {"delta_tau", c.delta_tau},
              {"epsilon", c.epsilon}, {"p", c.p},   {"q", c.q},
              {"j_lo", c.j_lo},   {"j_hi", c.j_hi}, {"L", c.L},
              {"stft_step", c.stft_step}, {"seed", c.seed}};
}

double snapped_half_extent(const ExperimentConfig& cfg) {
  const double scale = std::ldexp(1.0, cfg.j_lo);
  return kPi * std::round(scale * cfg.L / kPi) / scale;
}

int grid_log2_samples(double half_extent, int j) {
  const double need = 1.1 * std::exp2(j + 0.5);
  for (int k = 1; k < 62; ++k) {
    const double dx = 2.0 * half_extent / std::ldexp(1.0, k);
    if (kNyquistMargin * kPi / dx >= need) return k;
  }
  throw GateError("no grid resolves shell j=" + std::to_string(j));
}

Grid<double> experiment_grid(const ExperimentConfig& cfg, int j) {
  const double L = snapped_half_extent(cfg);
  const int k = grid_log2_samples(L, j);
  if (cfg.n * k > kGridBudgetLog2) {
    throw GateError("shell j=" + std::to_string(j) + " needs 2^" + std::to_string(cfg.n * k) +
                    " grid points, above the budget 2^" + std::to_string(kGridBudgetLog2));
  }
  return make_grid(cfg.n, L, k);
}

TheoreticalExponents theoretical_exponents(const CounterexampleParams& prm) {
  TheoreticalExponents t;
  const double n = prm.n, q = prm.norm.q;
  t.input = prm.delta * n * (1.0 / q - 1.0);
  t.output_lower = prm.m - prm.delta * (n / q + prm.epsilon);
  t.ratio = t.output_lower - t.input;
  t.ratio_positive = t.ratio > 0.0;
  t.theorem_condition = prm.theorem_condition;
  return t;
}

SlopeFit fit_slope(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3) throw std::invalid_argument("slope fit needs at least 3 points");
  const double k = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  std::vector<double> ys;
  for (const auto& [x, v] : points) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("slope fit needs positive values (j=" + format_double(x) + ")");
    }
    ys.push_back(std::log2(v));
    mx += x;
    my += ys.back();
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double dx = points[i].first - mx, dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw std::invalid_argument("slope fit needs distinct abscissae");
  SlopeFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double r = ys[i] - (f.intercept + f.slope * points[i].first);
    ss_res += r * r;
  }
  f.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return f;
}

namespace {

GrowthRow growth_row(const ExperimentConfig& cfg, const CounterexampleParams& prm, int j,
                     const WindowSet& windows, BsplineNormCache& cache) {
  const Grid<double> grid = staged(j, "grid", [&] { return experiment_grid(cfg, j); });
  const Measured m = measure(j, prm, grid, cfg.stft_step, windows, cache);
  const Grid<double> fine = make_grid(cfg.n, grid.half_extent(), grid.log2_samples() + 1);
  const Measured f = measure(j, prm, fine, cfg.stft_step, windows, cache);

  GrowthRow row;
  row.j = j;
  row.input_norm = m.input;
  row.output_norm = m.output;
  row.output_lower_bound = m.lower;
  row.ratio = m.output / m.input;
  row.control_ratio = m.control / m.input;
  row.log2_N = grid.log2_samples();
  row.refinement_delta_pct =
      100.0 * std::max({rel_change(m.input, f.input), rel_change(m.output, f.output),
                        rel_change(m.lower, f.lower), rel_change(m.control, f.control)});
  row.fingerprint = StftPlan(grid, cfg.stft_step).fingerprint();

  if (!(row.refinement_delta_pct < kRowRefinementGatePct)) {
    throw GateError(stage_prefix(j, "refinement") + "doubling N moves a norm by " +
                    format_double(row.refinement_delta_pct) + "%");
  }
  if (!(row.output_lower_bound <= row.output_norm * (1.0 + 1e-3))) {
    throw ConsistencyError(stage_prefix(j, "lower_bound") + "B-spline bound " +
                           format_double(row.output_lower_bound) + " exceeds the norm " +
                           format_double(row.output_norm));
  }
  return row;
}

}  // namespace

GrowthReport run_growth_experiment(const ExperimentConfig& cfg, const WindowSet& windows,
                                   BsplineNormCache& cache, const ProgressLog& log) {
  const CounterexampleParams prm = cfg.params();
  if (windows.dim() != cfg.n) throw ConfigError("window set dimension differs from n");
  GrowthReport rep;
  rep.config = cfg;
  rep.half_extent = snapped_half_extent(cfg);
  rep.theory = theoretical_exponents(prm);

  // Bounded pool of two workers; each row owns its grids, results land by index.
  const int count = cfg.j_hi - cfg.j_lo + 1;
  std::vector<GrowthRow> rows(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<int> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      const int j = cfg.j_lo + i;
      try {
        rows[i] = growth_row(cfg, prm, j, windows, cache);
        if (log) {
          const GrowthRow& row = rows[i];
          const std::lock_guard<std::mutex> lock(log_mutex);
          log("j=" + std::to_string(j) + " N=2^" + std::to_string(row.log2_N) +
              " input=" + sci(row.input_norm) + " output=" + sci(row.output_norm) +
              " lower=" + sci(row.output_lower_bound) + " ratio=" + sci(row.ratio) +
              " refinement=" + sci(row.refinement_delta_pct) + "%");
        }
      } catch (...) {
        errors[i] = std::current_exception();
        next = count;  // stop handing out rows
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (int w = 0; w < std::min(2, count); ++w) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  rep.rows = std::move(rows);

  rep.input = fit_rows(rep.rows, &GrowthRow::input_norm);
  rep.output_lower = fit_rows(rep.rows, &GrowthRow::output_lower_bound);
  rep.ratio = fit_rows(rep.rows, &GrowthRow::ratio);
  rep.control_ratio = fit_rows(rep.rows, &GrowthRow::control_ratio);

  rep.verdict.r_squared = rep.ratio.r_squared;
  rep.verdict.unbounded_growth = rep.theory.ratio > 0.0 && rep.ratio.slope > 0.0 &&
                                 rep.ratio.slope >= rep.theory.ratio - kGrowthSlack &&
                                 rep.ratio.r_squared >= 0.9;
  rep.verdict.statement = rep.verdict.unbounded_growth
                              ? "growth consistent with unboundedness at predicted exponent"
                              : "no growth consistent with unboundedness at predicted exponent";
  return rep;
}

// ---------------------------------------------------------------------------

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Json to_json(const GrowthReport& r) {
  Json rows = Json::array();
  Json prints = Json::object();
  for (const auto& row : r.rows) {
    rows.push_back(Json{{"j", row.j},
                        {"input_norm", row.input_norm},
                        {"output_norm", row.output_norm},
                        {"output_lower_bound", row.output_lower_bound},
                        {"ratio", row.ratio},
                        {"log2_N", row.log2_N},
                        {"refinement_delta_pct", row.refinement_delta_pct},
                        {"control_ratio", row.control_ratio}});
    prints[std::to_string(row.j)] = row.fingerprint;
  }
  return Json{
      {"schema", r.schema},
      {"tool_version", r.tool_version},
      {"config", to_json(r.config)},
      {"half_extent", r.half_extent},
      {"rows", rows},
      {"slopes",
       {{"input", fit_json(r.input)},
        {"output_lower", fit_json(r.output_lower)},
        {"ratio", fit_json(r.ratio)},
        {"control_ratio", fit_json(r.control_ratio)}}},
      {"theory",
       {{"input", r.theory.input},
        {"output_lower", r.theory.output_lower},
        {"ratio", r.theory.ratio},
        {"ratio_positive", r.theory.ratio_positive},
        {"theorem_condition", r.theory.theorem_condition}}},
      {"verdict",
       {{"unbounded_growth", r.verdict.unbounded_growth},
        {"r_squared", r.verdict.r_squared},
        {"statement", r.verdict.statement}}},
      {"grid_fingerprints", prints},
  };
}

GrowthReport report_from_json(const Json& j) {
  as_object(j, "$");
  GrowthReport r;
  r.schema = as_int(field(j, "schema", "$"), "$.schema");
  if (r.schema != kReportSchema) bad("$.schema", "unsupported report schema " + std::to_string(r.schema));
  r.tool_version = as_string(field(j, "tool_version", "$"), "$.tool_version");
  r.config = parse_config(field(j, "config", "$"));
  r.half_extent = as_real(field(j, "half_extent", "$"), "$.half_extent");

  const Json& prints = as_object(field(j, "grid_fingerprints", "$"), "$.grid_fingerprints");
  const Json& rows = as_array(field(j, "rows", "$"), "$.rows");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string p = "$.rows[" + std::to_string(i) + "]";
    const Json& v = as_object(rows[i], p);
    GrowthRow row;
    row.j = as_int(field(v, "j", p), p + ".j");
    row.input_norm = as_real(field(v, "input_norm", p), p + ".input_norm");
    row.output_norm = as_real(field(v, "output_norm", p), p + ".output_norm");
    row.output_lower_bound = as_real(field(v, "output_lower_bound", p), p + ".output_lower_bound");
    row.ratio = as_real(field(v, "ratio", p), p + ".ratio");
    row.log2_N = as_int(field(v, "log2_N", p), p + ".log2_N");
    row.refinement_delta_pct = as_real(field(v, "refinement_delta_pct", p), p + ".refinement_delta_pct");
    row.control_ratio = as_real(field(v, "control_ratio", p), p + ".control_ratio");
    const std::string key = std::to_string(row.j);
    row.fingerprint = as_string(field(prints, key, "$.grid_fingerprints"), "$.grid_fingerprints." + key);
    r.rows.push_back(std::move(row));
  }

  const Json& s = as_object(field(j, "slopes", "$"), "$.slopes");
  r.input = fit_from(field(s, "input", "$.slopes"), "$.slopes.input");
  r.output_lower = fit_from(field(s, "output_lower", "$.slopes"), "$.slopes.output_lower");
  r.ratio = fit_from(field(s, "ratio", "$.slopes"), "$.slopes.ratio");
  r.control_ratio = fit_from(field(s, "control_ratio", "$.slopes"), "$.slopes.control_ratio");

  const Json& t = as_object(field(j, "theory", "$"), "$.theory");
  r.theory.input = as_real(field(t, "input", "$.theory"), "$.theory.input");
  r.theory.output_lower = as_real(field(t, "output_lower", "$.theory"), "$.theory.output_lower");
  r.theory.ratio = as_real(field(t, "ratio", "$.theory"), "$.theory.ratio");
  r.theory.ratio_positive = as_bool(field(t, "ratio_positive", "$.theory"), "$.theory.ratio_positive");
  r.theory.theorem_condition =
      as_bool(field(t, "theorem_condition", "$.theory"), "$.theory.theorem_condition");

  const Json& v = as_object(field(j, "verdict", "$"), "$.verdict");
  r.verdict.unbounded_growth =
      as_bool(field(v, "unbounded_growth", "$.verdict"), "$.verdict.unbounded_growth");
  r.verdict.r_squared = as_real(field(v, "r_squared", "$.verdict"), "$.verdict.r_squared");
  r.verdict.statement = as_string(field(v, "statement", "$.verdict"), "$.verdict.statement");
  return r;
}

std::string report_csv(const GrowthReport& r) {
  std::string out = "j,input_norm,output_norm,output_lower_bound,ratio,log2_N,refinement_delta_pct\n";
  for (const auto& row : r.rows) {
    out += std::to_string(row.j) + ',' + format_double(row.input_norm) + ',' +
           format_double(row.output_norm) + ',' + format_double(row.output_lower_bound) + ',' +
           format_double(row.ratio) + ',' + std::to_string(row.log2_N) + ',' +
           format_double(row.refinement_delta_pct) + '\n';
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(tmp.string() + ": cannot open for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) throw Error(tmp.string() + ": write failed");
  }
  std::filesystem::rename(tmp, path);
}

void emit_report(const GrowthReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "report.csv", report_csv(report));
  write_file_atomic(dir / "report.json", to_json(report).dump(2) + "\n");
}

GrowthReport load_report(const std::filesystem::path& dir) {
  const auto file = dir / "report.json";
  return report_from_json(parse_text(read_text(file), file));
}

// ---------------------------------------------------------------------------

CheckResult check_transform_conventions() {
  double worst_pair = 0.0, worst_trip = 0.0, worst_shift = 0.0, worst_mod = 0.0;
  {
    const auto g = make_grid(1, 16.0, 14);
    const Spectrum_d s = fourier(sample(g, [](const Point& x) { return std::exp(-0.5 * x.squaredNorm()); }));
    const double peak = std::sqrt(2 * kPi);
    for (Index k = 0; k < s.size(); ++k) {
      const double xi = s.fgrid().frequency(k);
      if (std::abs(xi) > 8.0) continue;
      worst_pair = std::max(worst_pair, std::abs(s.values()[k] - peak * std::exp(-0.5 * xi * xi)) / peak);
    }
  }
  const auto g = make_grid(1, 16.0, 12);
  const Field f = random_packets(g, 5);
  worst_trip = relative_l2(inverse_fourier(fourier(f)), f);
  const Spectrum_d fh = fourier(f);
  const double scale = fh.values().cwiseAbs().maxCoeff();
  {
    const Index shift = 37;
    ComplexVector sv(g.size());
    for (Index i = 0; i < g.size(); ++i) sv[i] = f[(i - shift + g.size()) % g.size()];
    const Spectrum_d sh = fourier(Field(g, sv));
    const double a = shift * g.spacing();
    for (Index k = 0; k < g.size(); ++k) {
      const Complex want = fh.values()[k] * std::polar(1.0, -a * fh.fgrid().frequency(k));
      worst_shift = std::max(worst_shift, std::abs(sh.values()[k] - want) / scale);
    }
  }
  {
    const Index shift = 24;
    const double omega = shift * fh.fgrid().spacing();
    const Spectrum_d mh = fourier(multiply(sample(g, [&](const Point& x) { return std::polar(1.0, omega * x[0]); }), f));
    for (Index k = shift; k < g.size(); ++k) {
      worst_mod = std::max(worst_mod, std::abs(mh.values()[k] - fh.values()[k - shift]) / scale);
    }
  }
  const double worst = std::max({worst_pair, worst_trip, worst_shift, worst_mod});
  return at_most("transform conventions", worst, kTransformTolerance,
                 "gaussian " + sci(worst_pair) + ", round trip " + sci(worst_trip) +
                     ", translation " + sci(worst_shift) + ", modulation " + sci(worst_mod));
}

std::vector<CheckResult> check_moyal(std::uint64_t seed) {
  std::vector<CheckResult> out;
  const double c = moyal_constant_oracle(1);
  out.push_back(at_most("moyal constant", std::abs(c - 1.0), kMoyalConstantTolerance,
                        "kappa/(2pi)^n = " + format_double(c)));
  const auto g = make_grid(1, 12.0, 10);
  const StftPlan plan(g);
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Field f = random_packets(g, seed + 2 * s), h = random_packets(g, seed + 2 * s + 1);
    const Complex direct = inner_product(f, h);
    worst = std::max(worst, std::abs(moyal_pairing(f, h, plan) - direct) / std::abs(direct));
  }
  out.push_back(at_most("moyal pairing", worst, kMoyalPairingTolerance, "10 random pairs"));
  return out;
}

std::vector<CheckResult> check_family_transform(const ExperimentConfig& cfg, const WindowSet& windows) {
  const auto prm = cfg.params();
  const double L = snapped_half_extent(cfg);
  std::vector<CheckResult> out;
  for (int j = cfg.j_lo; j <= cfg.j_hi; ++j) {
    const double s = prm.dilation(j);
    const auto gy = make_grid(cfg.n, s * L, grid_log2_samples(L, j));
    const Spectrum_d cf = fhat_closed_form(j, prm, FreqGrid(gy), windows);
    const Spectrum_d fh = fourier(build_modulated_f(j, prm, gy, windows));
    const double r = (fh.values() - cf.values()).norm() / cf.values().norm();
    out.push_back(at_most("family transform j=" + std::to_string(j), r, kFamilyTransformTolerance));
  }
  return out;
}

std::vector<CheckResult> check_closed_form_action(const ExperimentConfig& cfg,
                                                  const WindowSet& windows) {
  const auto prm = cfg.params();
  std::vector<CheckResult> out;
  for (int j = cfg.j_lo; j <= cfg.j_hi; ++j) {
    const auto grid = experiment_grid(cfg, j);
    const auto S = tau_symbol(prm, grid, windows);
    const Field ref = closed_form_action(j, prm, grid, windows);
    const double exact = relative_l2(apply_separable(S, build_input(j, prm, grid, windows)), ref);
    out.push_back(at_most("closed-form action j=" + std::to_string(j), exact, kClosedFormTolerance));

    std::vector<double> res;
    std::string detail;
    for (double R : {16.0, 32.0, 64.0}) {
      res.push_back(relative_l2(apply_separable(S, build_input(j, prm, grid, windows, R)), ref));
      detail += (detail.empty() ? "R=" : ", R=") + format_double(R) + ": " + sci(res.back());
    }
    const bool falls = res[1] < res[0] && res[2] < res[1];
    out.push_back({"truncation doubling j=" + std::to_string(j), res.back(), res[0], falls, detail});
  }
  return out;
}

std::vector<CheckResult> check_orthogonality(const ExperimentConfig& cfg, const WindowSet& windows) {
  const auto prm = cfg.params();
  std::vector<CheckResult> out;
  for (int j : {prm.j0, prm.j0 + 4}) {
    const PairingTerms P = pairing_terms(j, prm, windows, cfg.seed);
    const std::string tag = " j=" + std::to_string(j);
    out.push_back(at_most("cross terms" + tag, std::abs(P.II) / P.I, kCrossTermTolerance,
                          std::to_string(P.pairs_evaluated) + " of " + std::to_string(P.pairs_total) +
                              " pairs, I = " + format_double(P.I)));
    out.push_back(at_most("diagonal sum" + tag, std::abs(P.I - P.I_quadrature) / P.I, kDiagonalTolerance));
  }
  return out;
}

std::vector<CheckResult> check_adjoint(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto g = make_grid(1, 2.0, 8);
  const DenseSymbolMatrix dense(g, hashed_symbol(seed));
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  auto residual = [](const Field& Tf, const Field& h, const Field& f, const Field& Tsh) {
    return std::abs(inner_product(Tf, h) - inner_product(f, Tsh)) / (norm_l2(f) * norm_l2(h));
  };
  double worst_sep = 0.0, worst_dense = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<SymbolTerm> terms;
    for (int j = 4; j <= 6; ++j) terms.push_back({j, u(rng), random_noise(g, rng)});
    const DyadicSeparableSymbol S(g, std::move(terms), 0.5, 0.3);
    const Field f = random_noise(g, rng), h = random_noise(g, rng);
    worst_sep = std::max(worst_sep, residual(apply_separable(S, f), h, f, discrete_adjoint(S, h)));
    worst_dense = std::max(worst_dense, residual(dense.apply(f), h, f, dense.adjoint(h)));
  }
  return {at_most("adjoint separable", worst_sep, kAdjointTolerance, "20 random pairs, N=256"),
          at_most("adjoint dense", worst_dense, kAdjointTolerance, "20 random pairs, N=256")};
}

CheckResult check_path_equivalence(const ExperimentConfig& cfg, const WindowSet& windows,
                                   std::uint64_t seed) {
  const auto prm = CounterexampleParams::make(1, cfg.m, cfg.delta_tau, cfg.epsilon, cfg.p, cfg.q, 4, 6, false);
  const auto g = make_grid(1, 2.0, 9);
  std::mt19937_64 rng(seed);
  const Field f = random_noise(g, rng);
  const SymbolEvaluator sigma = [&](const Point& x, const Point& xi) { return tau_value(prm, windows, x, xi); };
  const double r = relative_l2(apply_dense(sigma, f), apply_separable(tau_symbol(prm, g, windows), f));
  return at_most("dense vs separable", r, kPathTolerance, "reduced tau, j=4..6, N=512");
}

std::vector<CheckResult> check_norm_invariances(std::uint64_t seed) {
  const auto g = make_grid(1, 16.0, 10);
  const StftPlan plan(g);
  const MixedNormParams prm(2.0, 4.0);
  const Field f = random_packets(g, seed);
  const double base = mpq_norm(f, prm, plan);
  const double omega = 32 * kPi / g.half_extent();
  const Field mod = multiply(sample(g, [&](const Point& x) { return std::polar(1.0, omega * x[0]); }), f);
  ComplexVector moved = ComplexVector::Zero(g.size());
  for (Index i = 24; i < g.size(); ++i) moved[i] = f[i - 24];
  const double dm = std::abs(mpq_norm(mod, prm, plan) - base) / base;
  const double dt = std::abs(mpq_norm(Field(g, moved), prm, plan) - base) / base;

  const auto g2 = make_grid(1, 12.0, 10);
  const StftPlan plan2(g2);
  std::vector<double> ratios;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Field h = random_packets(g2, seed + 100 + s);
    ratios.push_back(mpq_norm(h, MixedNormParams(2.0, 2.0), plan2) / norm_l2(h));
  }
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  return {at_most("modulation/translation invariance", std::max(dm, dt), kInvarianceTolerance,
                  "modulation " + sci(dm) + ", translation " + sci(dt)),
          at_most("M22 / L2 spread", (*hi - *lo) / *lo, kM22SpreadTolerance, "10 random fields")};
}

std::vector<CheckResult> identity_suite(const ExperimentConfig& cfg, const WindowSet& windows,
                                        const ProgressLog& log) {
  std::vector<CheckResult> out;
  auto add = [&](const char* what, std::vector<CheckResult> part) {
    if (log) log(what);
    out.insert(out.end(), part.begin(), part.end());
  };
  add("moyal", check_moyal(cfg.seed));
  add("family transform", check_family_transform(cfg, windows));
  add("closed-form action", check_closed_form_action(cfg, windows));
  add("orthogonality", check_orthogonality(cfg, windows));
  add("adjoint", check_adjoint(cfg.seed));
  add("paths", {check_path_equivalence(cfg, windows, cfg.seed)});
  return out;
}

SymbolClassSummary check_symbol_class(const ExperimentConfig& cfg, const WindowSet& windows) {
  SymbolClassSummary out;
  out.rows = symbol_class_table(cfg.params(), windows);
  std::map<std::pair<std::string, std::string>, std::vector<std::pair<double, double>>> groups;
  std::vector<std::pair<std::string, std::string>> order;
  for (const auto& r : out.rows) {
    const auto key = std::make_pair(format_multi_index(r.alpha), format_multi_index(r.beta));
    if (!groups.count(key)) order.push_back(key);
    groups[key].emplace_back(r.j, r.estimate.sup_ratio);
  }
  for (const auto& key : order) {
    const auto& pts = groups[key];
    const std::string name = "symbol class alpha=" + key.first + " beta=" + key.second;
    std::string detail;
    for (const auto& [j, v] : pts) detail += (detail.empty() ? "" : " ") + sci(v);
    const bool positive = std::all_of(pts.begin(), pts.end(), [](const auto& p) { return p.second > 0.0; });
    if (!positive) {
      out.slopes.push_back({name, std::numeric_limits<double>::quiet_NaN(), kSymbolSlopeTolerance, false,
                            "vanishing seminorm on a shell: " + detail});
      continue;
    }
    const SlopeFit f = fit_slope(pts);
    out.slopes.push_back({name, f.slope, kSymbolSlopeTolerance,
                          std::abs(f.slope) <= kSymbolSlopeTolerance, "sups " + detail});
  }
  return out;
}

std::string symbol_class_csv(const std::vector<SymbolClassRow>& rows) {
  std::string out = "j,alpha,beta,sup_ratio,argmax_x,argmax_xi\n";
  for (const auto& r : rows) {
    out += std::to_string(r.j) + ',' + format_multi_index(r.alpha) + ',' + format_multi_index(r.beta) +
           ',' + format_double(r.estimate.sup_ratio) + ',' + format_point(r.estimate.argmax_x) + ',' +
           format_point(r.estimate.argmax_xi) + '\n';
  }
  return out;
}

std::string spectrogram_csv(const Spectrogram& s) {
  std::string out = "x_index,xi_index,re,im\n";
  for (Index a = 0; a < s.rows(); ++a) {
    for (Index k = 0; k < s.cols(); ++k) {
      const Complex v = s.values()(a, k);
      out += std::to_string(a) + ',' + std::to_string(k) + ',' + format_double(v.real()) + ',' +
             format_double(v.imag()) + '\n';
    }
  }
  return out;
}

std::string window_dump_csv(const WindowSet& windows, const std::string& which, double a, double b,
                            double step) {
  std::function<double(double)> fn;
  if (which == "phi") fn = [&](double r) { return windows.phi_radial(r); };
  else if (which == "psi") fn = [&](double r) { return windows.psi_radial(r); };
  else if (which == "eta") fn = [](double r) { return WindowSet::eta_radial(r); };
  else if (which == "Phi") fn = [&](double r) { return windows.Phi(r); };
  else if (which == "Psi") fn = [&](double r) { return windows.Psi(r); };
  else throw ConfigError("--which: expected phi, psi, eta, Phi or Psi, got '" + which + "'");
  if (!(step > 0.0) || !std::isfinite(a) || !std::isfinite(b) || b < a) {
    throw ConfigError("--range: expected a:b:step with a <= b and step > 0");
  }
  const double count = std::floor((b - a) / step + 1e-9) + 1.0;
  if (count > 1e7) throw ConfigError("--range: more than 10^7 samples");
  std::string out = "t,value\n";
  for (long i = 0; i < static_cast<long>(count); ++i) {
    const double t = a + i * step;
    out += format_double(t) + ',' + format_double(fn(std::abs(t))) + '\n';
  }
  return out;
}

}  // namespace modlab

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "modlab/counterexample.hpp"
#include "modlab/quantize.hpp"
#include "modlab/symbols.hpp"
#include "modlab/tfa.hpp"

namespace modlab {

inline constexpr const char* kToolVersion = "modlab 0.1.0";
inline constexpr int kReportSchema = 1;

using Json = nlohmann::ordered_json;

struct ExperimentConfig {
  int n = 1;
  double m = 0.5;
  double delta_tau = 0.3;
  double epsilon = 0.05;
  double p = 2.0;
  double q = 4.0;
  int j_lo = 10;
  int j_hi = 14;
  double L = 8.0;
  double stft_step = 0.25;
  std::uint64_t seed = 0x5EED;

  CounterexampleParams params() const;
  bool operator==(const ExperimentConfig&) const = default;
};

/// Parses and validates; ConfigError messages start with the JSON path ("$.q: ...").
ExperimentConfig parse_config(const Json& j);
ExperimentConfig load_config(const std::filesystem::path& file);
Json to_json(const ExperimentConfig& cfg);

/// Half extent near cfg.L with 2^{j_lo} L / pi integral, so every modulation
/// 2^j with j >= j_lo sits on the frequency lattice.
double snapped_half_extent(const ExperimentConfig& cfg);
/// Smallest log2 N with 0.8 pi / dx >= 1.1 * 2^{j+1/2}.
int grid_log2_samples(double half_extent, int j);
Grid<double> experiment_grid(const ExperimentConfig& cfg, int j);

struct TheoreticalExponents {
  /// delta n (1/q - 1)
  double input = 0.0;
  /// m - delta (n/q + eps)
  double output_lower = 0.0;
  /// output_lower - input
  double ratio = 0.0;
  bool ratio_positive = false;
  /// m > -|1/q - 1/2| (2 delta) n
  bool theorem_condition = false;
  bool operator==(const TheoreticalExponents&) const = default;
};

TheoreticalExponents theoretical_exponents(const CounterexampleParams& prm);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  bool operator==(const SlopeFit&) const = default;
};

/// Least squares of log2(value) on j; needs >= 3 points with positive values.
SlopeFit fit_slope(std::span<const std::pair<double, double>> points);

struct GrowthRow {
  int j = 0;
  double input_norm = 0.0;
  double output_norm = 0.0;
  double output_lower_bound = 0.0;
  double ratio = 0.0;
  int log2_N = 0;
  /// Largest relative norm change (percent) when the row is rebuilt at 2N.
  double refinement_delta_pct = 0.0;
  /// Norm ratio of the bounded control symbol on the same input.
  double control_ratio = 0.0;
  std::string fingerprint;
  bool operator==(const GrowthRow&) const = default;
};

struct Verdict {
  bool unbounded_growth = false;
  double r_squared = 0.0;
  std::string statement;
  bool operator==(const Verdict&) const = default;
};

struct GrowthReport {
  ExperimentConfig config;
  double half_extent = 0.0;
  std::vector<GrowthRow> rows;
  SlopeFit input;
  SlopeFit output_lower;
  SlopeFit ratio;
  SlopeFit control_ratio;
  TheoreticalExponents theory;
  Verdict verdict;
  std::string tool_version = kToolVersion;
  int schema = kReportSchema;
  bool operator==(const GrowthReport&) const = default;
};

/// Refinement gate on each row, percent.
inline constexpr double kRowRefinementGatePct = 0.5;

using ProgressLog = std::function<void(const std::string&)>;

/// Rows j_lo..j_hi: input u_j, output tau(X,D) u_j, their M^{p,q} norms, the
/// B-spline lower bound of the output, and the control symbol on the same
/// input. Failures are rethrown with the j and stage prefixed.
GrowthReport run_growth_experiment(const ExperimentConfig& cfg, const WindowSet& windows,
                                   BsplineNormCache& cache, const ProgressLog& log = {});

Json to_json(const GrowthReport& report);
GrowthReport report_from_json(const Json& j);
std::string report_csv(const GrowthReport& report);

/// Writes report.csv and report.json into dir (temp file, then rename).
void emit_report(const GrowthReport& report, const std::filesystem::path& dir);
GrowthReport load_report(const std::filesystem::path& dir);

/// Atomic text write: path.tmp then rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

// ---------------------------------------------------------------------------
// Checks shared by the CLI and the acceptance run. Tolerances are fixed here.

struct CheckResult {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

inline constexpr double kTransformTolerance = 1e-10;
inline constexpr double kMoyalConstantTolerance = 1e-6;
inline constexpr double kMoyalPairingTolerance = 1e-8;
inline constexpr double kFamilyTransformTolerance = 1e-8;
inline constexpr double kClosedFormTolerance = 1e-4;
inline constexpr double kCrossTermTolerance = 1e-8;
inline constexpr double kDiagonalTolerance = 1e-10;
inline constexpr double kAdjointTolerance = 1e-12;
inline constexpr double kPathTolerance = 1e-10;
inline constexpr double kInvarianceTolerance = 1e-10;
inline constexpr double kM22SpreadTolerance = 1e-4;
inline constexpr double kSymbolSlopeTolerance = 0.1;

/// Gaussian pair, round trip, translation and modulation laws (worst relative error).
CheckResult check_transform_conventions();
/// kappa / (2 pi)^n by brute force, then the STFT pairing on 10 random pairs.
std::vector<CheckResult> check_moyal(std::uint64_t seed);
/// FFT of the modulated family against its closed form, one result per j.
std::vector<CheckResult> check_family_transform(const ExperimentConfig& cfg, const WindowSet& windows);
/// Separable quantization on u_j against the closed-form action per j, and
/// the residual of hard-cut inputs at R = 16, 32, 64.
std::vector<CheckResult> check_closed_form_action(const ExperimentConfig& cfg,
                                                  const WindowSet& windows);
/// |II| / I and the diagonal closed form against quadrature at j0 and j0 + 4.
std::vector<CheckResult> check_orthogonality(const ExperimentConfig& cfg, const WindowSet& windows);
/// Discrete adjoint on 20 random pairs, dense and separable, N = 256.
std::vector<CheckResult> check_adjoint(std::uint64_t seed);
/// Dense oracle against the separable path on reduced parameters (N = 512).
CheckResult check_path_equivalence(const ExperimentConfig& cfg, const WindowSet& windows,
                                   std::uint64_t seed);
/// Lattice-aligned modulation/translation invariance and the M^{2,2} / L^2 spread.
std::vector<CheckResult> check_norm_invariances(std::uint64_t seed);

/// Moyal, family transform, closed-form action, orthogonality, adjoint, paths.
std::vector<CheckResult> identity_suite(const ExperimentConfig& cfg, const WindowSet& windows,
                                        const ProgressLog& log = {});

struct SymbolClassSummary {
  std::vector<SymbolClassRow> rows;
  /// One slope check per (alpha, beta).
  std::vector<CheckResult> slopes;
};

SymbolClassSummary check_symbol_class(const ExperimentConfig& cfg, const WindowSet& windows);
std::string symbol_class_csv(const std::vector<SymbolClassRow>& rows);

/// x_index,xi_index,re,im
std::string spectrogram_csv(const Spectrogram& s);

/// t,value over a:b:step for phi, psi, eta, Phi or Psi (radial profiles at |t|).
std::string window_dump_csv(const WindowSet& windows, const std::string& which, double a,
                            double b, double step);

}  // namespace modlab

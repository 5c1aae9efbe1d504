#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "modlab/spectral.hpp"
#include "modlab/windows.hpp"

namespace modlab {

/// Exponents of the mixed norm, both in (1, inf).
struct MixedNormParams {
  double p = 2.0;
  double q = 2.0;

  MixedNormParams() = default;
  MixedNormParams(double p_, double q_);

  double conj_p() const { return p / (p - 1.0); }
  double conj_q() const { return q / (q - 1.0); }
  MixedNormParams conjugate() const { return {conj_p(), conj_q()}; }
};

/// Window centers x_a = a * step on every axis, |x_a| <= extent, over the
/// field grid. The field is taken to vanish outside its box.
class StftPlan {
 public:
  StftPlan(const Grid<double>& grid, double step = 0.25, GaussianWindow window = {},
           std::optional<double> extent = std::nullopt);

  const Grid<double>& grid() const { return grid_; }
  const GaussianWindow& window() const { return window_; }
  double step() const { return step_; }
  double extent() const { return extent_; }
  /// Exact ||gamma||^2.
  double window_energy() const { return window_.energy(grid_.dim()); }

  /// Per-axis center coordinates, ascending.
  const std::vector<double>& axis_centers() const { return axis_centers_; }
  Index center_count() const;
  Point center(Index flat) const;

  /// Same window and step, extent scaled by factor.
  StftPlan extended(double factor) const;
  /// Half the step, same extent.
  StftPlan refined() const;

  std::string fingerprint() const;

 private:
  Grid<double> grid_;
  GaussianWindow window_;
  double step_;
  double extent_;
  std::vector<double> axis_centers_;
};

/// V_gamma f at all centers of a plan: row a holds the transform at x_a.
class Spectrogram {
 public:
  Spectrogram(StftPlan plan, Eigen::MatrixXcd values);

  const StftPlan& plan() const { return plan_; }
  const Eigen::MatrixXcd& values() const { return values_; }
  Index rows() const { return values_.rows(); }
  Index cols() const { return values_.cols(); }

 private:
  StftPlan plan_;
  Eigen::MatrixXcd values_;
};

/// Calls emit(a, row) with row = V_gamma f(x_a, .) for each listed center, in order.
void stft_rows(const Field& f, const StftPlan& plan, std::span<const Index> centers,
               const std::function<void(Index, const ComplexVector&)>& emit);

/// Whole spectrogram; refuses more than 2^26 entries (use the streaming norms).
Spectrogram stft(const Field& f, const StftPlan& plan);

/// ( sum_k dxi^n ( sum_a s^n |S(a,k)|^p )^{q/p} )^{1/q}.
double mixed_norm(const Spectrogram& s, const MixedNormParams& prm);

/// Streaming accumulator for the inner x-integral of the mixed norm.
class MixedNormAccumulator {
 public:
  MixedNormAccumulator(const StftPlan& plan, double p);
  void add(const ComplexVector& row);
  /// Adds scale times the inner integrals of another accumulator.
  void merge(const MixedNormAccumulator& other, double scale = 1.0);
  double finish(double q) const;

 private:
  double p_;
  double weight_;
  double dxi_volume_;
  Eigen::ArrayXd inner_;
};

struct NormEstimate {
  double value = 0.0;
  /// Relative change when the center lattice is extended by 25%.
  double extension_delta = 0.0;
  /// Relative change when the center step is halved.
  double refinement_delta = 0.0;
};

/// Gate thresholds for mpq_norm.
inline constexpr double kExtensionTolerance = 5e-3;
inline constexpr double kRefinementTolerance = 1e-3;

/// ||f||_{M^{p,q}} with both lattice gates evaluated; throws GateError on failure.
NormEstimate mpq_norm_checked(const Field& f, const MixedNormParams& prm, const StftPlan& plan);
double mpq_norm(const Field& f, const MixedNormParams& prm, const StftPlan& plan);
/// Same quadrature without gates.
double mpq_norm_unchecked(const Field& f, const MixedNormParams& prm, const StftPlan& plan);

/// Convention constant of the STFT energy identity, (2 pi)^n.
double moyal_constant(int n);

/// kappa / (2 pi)^n from a brute-force double sum on a dense N = 256 1D grid
/// (or 16 x 16 in 2D) with no FFT involved.
double moyal_constant_oracle(int n);

/// (kappa ||gamma||^2)^{-1} * sum of V f conj(V g) over the plan; equals (f, g).
Complex moyal_pairing(const Field& f, const Field& g, const StftPlan& plan);

/// Dedicated plan for ||F^{-1} B||: 1D, L = 256, N = 2^16.
struct BsplinePlanSpec {
  double L = 256.0;
  int log2_N = 16;
  double step = 0.25;
};

/// ||F^{-1} B||_{M^{p', q'}} in dimension n for primal exponents prm, through
/// a JSON cache file {p, q, L, log2_N, s_x, value} holding the 1D value.
/// The n-D value is the n-th power of the 1D one (tensor window and function).
/// Values are also kept in memory; calls may come from several threads.
class BsplineNormCache {
 public:
  explicit BsplineNormCache(std::optional<std::filesystem::path> file = std::nullopt,
                            BsplinePlanSpec spec = {});

  double dual_norm(const MixedNormParams& prm, int n);
  /// 1D value computed without the cache.
  static double compute_1d(const MixedNormParams& prm, const BsplinePlanSpec& spec);

 private:
  double lookup_1d(const MixedNormParams& prm);

  std::optional<std::filesystem::path> file_;
  BsplinePlanSpec spec_;
  std::mutex mutex_;
  std::map<std::pair<double, double>, double> memo_;
};

/// kappa ||gamma||^2 |(f, M_omega F^{-1}B)| / ||F^{-1}B||_{M^{p',q'}}, a lower
/// bound for ||f||_{M^{p,q}}. omega modulates along the first axis.
double bspline_lower_bound(const Field& f, const MixedNormParams& prm, const StftPlan& plan,
                           BsplineNormCache& cache, double omega = 0.0);

}  // namespace modlab

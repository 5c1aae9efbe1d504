#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "modlab/tfa.hpp"
#include "modlab/windows.hpp"

namespace modlab {

/// Smallest integer j0 >= 0 with
///   1 + 2^{j0(2 delta - 1) + 1} <= 2^{1/4},
///   1 - 2^{j0(2 delta - 1) + 1} >= 2^{-1/4},
///   2^{-j0 delta} sqrt(n) <= 1/8.
/// Throws ConfigError for delta outside (0, 1/2).
int min_j0(double delta, int n);

/// Parameters of the counterexample, tau-form delta throughout.
struct CounterexampleParams {
  int n = 1;
  double m = 0.5;
  double delta = 0.3;
  double epsilon = 0.05;
  MixedNormParams norm{2.0, 4.0};
  int j_lo = 10;
  int j_hi = 14;
  int j0 = 10;
  /// m > -|1/q - 1/2| (2 delta) n.
  bool theorem_condition = true;

  /// Validates and derives j0. With admissible = false the j-range may start
  /// below j0 (reduced-parameter oracle configurations).
  static CounterexampleParams make(int n, double m, double delta, double epsilon, double p,
                                   double q, int j_lo, int j_hi, bool admissible = true);

  /// 2^{j delta}
  double dilation(int j) const { return std::exp2(j * delta); }
  /// n/q + epsilon
  double decay_exponent() const { return n / norm.q + epsilon; }
};

struct SigmaForm {
  double delta_sigma;
  double m;
  std::string class_claim;
};

/// sigma_{2 delta} = tau_delta: the same construction reported in sigma-form.
SigmaForm sigma_from_tau(const CounterexampleParams& prm);

/// Integer points 0 < |k| <= radius in lexicographic order.
std::vector<Point> lattice_ball(int n, double radius);

/// Optional hard cut of the Phi/Psi tails: |argument| > radius counts as 0.
using Truncation = std::optional<double>;

/// a_j(x) = sum_{0<|k|<=s} exp(-i k.(s x - k)) Phi(s x - k), s = 2^{j delta}.
Complex x_profile_at(int j, const CounterexampleParams& prm, const WindowSet& windows,
                     const Point& x, Truncation cut = std::nullopt);

/// a_j sampled on a grid.
Field x_profile(int j, const CounterexampleParams& prm, const Grid<double>& grid,
                const WindowSet& windows, Truncation cut = std::nullopt);

struct SymbolTerm {
  int j;
  double scale;
  Field profile;
  /// Replaces eta(2^{-j} xi) when set; such terms skip the Nyquist check.
  std::function<double(const Point&)> custom_cutoff = {};

  double cutoff(const Point& xi) const;
};

/// sum_j scale_j a_j(x) eta(2^{-j} xi) over a finite j-range.
class DyadicSeparableSymbol {
 public:
  DyadicSeparableSymbol(Grid<double> grid, std::vector<SymbolTerm> terms, double m,
                        double delta);

  const Grid<double>& grid() const { return grid_; }
  const std::vector<SymbolTerm>& terms() const { return terms_; }
  double order() const { return m_; }
  double delta() const { return delta_; }

  /// Cutoff eta(2^{-j} xi) of a term.
  static double cutoff(int j, const Point& xi) {
    return WindowSet::eta_radial(std::ldexp(xi.norm(), -j));
  }

  /// sigma(x_i, xi) at a lattice point of the grid.
  Complex at(Index i, const Point& xi) const;

  /// Only the terms whose shells lie below the Nyquist margin of the grid.
  DyadicSeparableSymbol band_limited() const;

 private:
  Grid<double> grid_;
  std::vector<SymbolTerm> terms_;
  double m_;
  double delta_;
};

/// tau_delta restricted to j in [j_lo, j_hi]. Terms whose shell passes the
/// Nyquist margin of the grid are left out.
DyadicSeparableSymbol tau_symbol(const CounterexampleParams& prm, const Grid<double>& grid,
                                 const WindowSet& windows, Truncation cut = std::nullopt);

/// Bounded control: a_j = 1, order 0, same cutoffs (resolvable shells only).
DyadicSeparableSymbol control_symbol(const CounterexampleParams& prm, const Grid<double>& grid);

/// tau_delta(x, xi) at arbitrary points.
Complex tau_value(const CounterexampleParams& prm, const WindowSet& windows, const Point& x,
                  const Point& xi);

using MultiIndex = std::vector<int>;
using SymbolEvaluator = std::function<Complex(const Point&, const Point&)>;

struct SeminormSample {
  Point x;
  Point xi;
};

struct SeminormEstimate {
  double sup_ratio = 0.0;
  Point argmax_x;
  Point argmax_xi;
};

/// max over samples of |d_xi^alpha d_x^beta sigma| / (1+|xi|)^{m - rho|alpha| + delta|beta|}
/// with second-order central differences of steps h_x and h_xi.
SeminormEstimate symbol_class_seminorm(const SymbolEvaluator& sigma, const MultiIndex& alpha,
                                       const MultiIndex& beta, double m, double rho,
                                       double delta, const std::vector<SeminormSample>& samples,
                                       double h_x, double h_xi);

/// Per shell j: 64 log-uniform radii in the annulus (two steps clear of its
/// edges) times 128 points over one period 2 pi / 2^{2 j delta} of the fastest
/// x-oscillation, along the first axis.
std::vector<SeminormSample> shell_samples(int j, const CounterexampleParams& prm);

struct SymbolClassRow {
  int j;
  MultiIndex alpha;
  MultiIndex beta;
  SeminormEstimate estimate;
};

/// Every |alpha|, |beta| <= 2 on every shell of the j-range, for tau_delta in
/// S^m_{1, 2 delta}. Steps h_x = 2^{-j delta}/64, h_xi = 2^j/1024.
std::vector<SymbolClassRow> symbol_class_table(const CounterexampleParams& prm,
                                               const WindowSet& windows);

/// Multi-indices of total order <= 2 in dimension n.
std::vector<MultiIndex> multi_indices(int n, int max_order);

std::string format_multi_index(const MultiIndex& a);

}  // namespace modlab

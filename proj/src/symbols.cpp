#include "modlab/symbols.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "modlab/error.hpp"
#include "modlab/spectral.hpp"

namespace modlab {

namespace {

constexpr double kPi = std::numbers::pi;

void lattice_rec(int n, int axis, int bound, double r2, Point& cur, std::vector<Point>& out) {
  if (axis == n) {
    const double s2 = cur.squaredNorm();
    if (s2 > 0.0 && s2 <= r2) out.push_back(cur);
    return;
  }
  for (int k = -bound; k <= bound; ++k) {
    cur[axis] = k;
    lattice_rec(n, axis + 1, bound, r2, cur, out);
  }
}

double profile_kernel(const WindowSet& w, double r, const Truncation& cut) {
  if (cut && r > *cut) return 0.0;
  return w.Phi(r);
}

// Central-difference stencil for one axis: (offset, weight) pairs.
std::vector<std::pair<int, double>> stencil(int order, double h) {
  switch (order) {
    case 0: return {{0, 1.0}};
    case 1: return {{-1, -0.5 / h}, {1, 0.5 / h}};
    case 2: return {{-1, 1.0 / (h * h)}, {0, -2.0 / (h * h)}, {1, 1.0 / (h * h)}};
    default: throw ConfigError("derivative orders above 2 are not supported");
  }
}

int total(const MultiIndex& a) {
  int t = 0;
  for (int v : a) t += v;
  return t;
}

}  // namespace

int min_j0(double delta, int n) {
  if (!(delta > 0.0 && delta < 0.5)) {
    throw ConfigError("no admissible j0 for delta = " + std::to_string(delta) +
                      ": the annulus conditions need delta in (0, 1/2)");
  }
  if (n < 1) throw ConfigError("dimension must be positive");
  const double up = std::exp2(0.25), down = std::exp2(-0.25);
  for (int j = 0; j < 100000; ++j) {
    const double t = std::exp2(j * (2.0 * delta - 1.0) + 1.0);
    if (1.0 + t <= up && 1.0 - t >= down && std::exp2(-j * delta) * std::sqrt(double(n)) <= 0.125) {
      return j;
    }
  }
  throw ConfigError("no admissible j0 found");
}

CounterexampleParams CounterexampleParams::make(int n, double m, double delta, double epsilon,
                                                double p, double q, int j_lo, int j_hi,
                                                bool admissible) {
  if (n < 1 || n > kMaxDim) throw ConfigError("n must lie in [1, " + std::to_string(kMaxDim) + "]");
  if (!std::isfinite(m)) throw ConfigError("m must be finite");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigError("epsilon must be positive");
  CounterexampleParams prm;
  prm.n = n;
  prm.m = m;
  prm.delta = delta;
  prm.epsilon = epsilon;
  prm.norm = MixedNormParams(p, q);
  prm.j0 = min_j0(delta, n);
  if (j_hi < j_lo) throw ConfigError("j_hi must not be below j_lo");
  if (j_lo < 0) throw ConfigError("j_lo must be non-negative");
  if (admissible && j_lo < prm.j0) {
    throw ConfigError("j_lo = " + std::to_string(j_lo) + " is below j0 = " + std::to_string(prm.j0));
  }
  prm.j_lo = j_lo;
  prm.j_hi = j_hi;
  prm.theorem_condition = m > -std::abs(1.0 / q - 0.5) * 2.0 * delta * n;
  return prm;
}

SigmaForm sigma_from_tau(const CounterexampleParams& prm) {
  std::ostringstream os;
  os << "S^" << prm.m << "_{1," << 2.0 * prm.delta << "}";
  return {2.0 * prm.delta, prm.m, os.str()};
}

std::vector<Point> lattice_ball(int n, double radius) {
  std::vector<Point> out;
  if (radius < 1.0) return out;
  Point cur(n);
  lattice_rec(n, 0, static_cast<int>(std::floor(radius + 1e-12)), radius * radius * (1 + 1e-14),
              cur, out);
  return out;
}

Complex x_profile_at(int j, const CounterexampleParams& prm, const WindowSet& windows,
                     const Point& x, Truncation cut) {
  const double s = prm.dilation(j);
  const Point y = s * x;
  Complex acc(0.0, 0.0);
  for (const Point& k : lattice_ball(prm.n, s)) {
    const Point t = y - k;
    const double phase = -k.dot(t);
    acc += std::polar(profile_kernel(windows, t.norm(), cut), phase);
  }
  return acc;
}

Field x_profile(int j, const CounterexampleParams& prm, const Grid<double>& grid,
                const WindowSet& windows, Truncation cut) {
  if (grid.dim() != prm.n) throw ConfigError("grid dimension differs from n");
  const double s = prm.dilation(j);
  const auto ks = lattice_ball(prm.n, s);
  if (ks.empty()) throw ConfigError("x-profile has an empty k-range (2^{j delta} < 1)");
  require_band_limit(grid, s * std::floor(s + 1e-12), "x-profile oscillation");
  ComplexVector v = ComplexVector::Zero(grid.size());
  if (prm.n == 1) {
    for (const Point& k : ks) {
      const double k0 = k[0];
      for (Index i = 0; i < grid.size(); ++i) {
        const double t = s * grid.coordinate(i) - k0;
        v[i] += std::polar(profile_kernel(windows, std::abs(t), cut), -k0 * t);
      }
    }
  } else {
    for (Index i = 0; i < grid.size(); ++i) {
      const Point y = s * grid.point(i);
      Complex acc(0.0, 0.0);
      for (const Point& k : ks) {
        const Point t = y - k;
        acc += std::polar(profile_kernel(windows, t.norm(), cut), -k.dot(t));
      }
      v[i] = acc;
    }
  }
  return Field(grid, std::move(v));
}

// ---------------------------------------------------------------------------

double SymbolTerm::cutoff(const Point& xi) const {
  return custom_cutoff ? custom_cutoff(xi) : DyadicSeparableSymbol::cutoff(j, xi);
}

DyadicSeparableSymbol::DyadicSeparableSymbol(Grid<double> grid, std::vector<SymbolTerm> terms,
                                             double m, double delta)
    : grid_(std::move(grid)), terms_(std::move(terms)), m_(m), delta_(delta) {
  for (const auto& t : terms_) require_same_grid(t.profile.grid(), grid_, "symbol term");
}

Complex DyadicSeparableSymbol::at(Index i, const Point& xi) const {
  Complex acc(0.0, 0.0);
  for (const auto& t : terms_) {
    const double c = t.cutoff(xi);
    if (c != 0.0) acc += t.scale * c * t.profile[i];
  }
  return acc;
}

DyadicSeparableSymbol DyadicSeparableSymbol::band_limited() const {
  const double limit = kNyquistMargin * kPi / grid_.spacing();
  std::vector<SymbolTerm> kept;
  for (const auto& t : terms_) {
    if (std::exp2(t.j + 0.5) <= limit) kept.push_back(t);
  }
  return DyadicSeparableSymbol(grid_, std::move(kept), m_, delta_);
}

DyadicSeparableSymbol tau_symbol(const CounterexampleParams& prm, const Grid<double>& grid,
                                 const WindowSet& windows, Truncation cut) {
  const double limit = kNyquistMargin * kPi / grid.spacing();
  std::vector<SymbolTerm> terms;
  for (int j = prm.j_lo; j <= prm.j_hi; ++j) {
    if (std::exp2(j + 0.5) > limit) continue;
    terms.push_back({j, std::exp2(j * prm.m), x_profile(j, prm, grid, windows, cut)});
  }
  return DyadicSeparableSymbol(grid, std::move(terms), prm.m, prm.delta);
}

DyadicSeparableSymbol control_symbol(const CounterexampleParams& prm, const Grid<double>& grid) {
  std::vector<SymbolTerm> terms;
  const Field ones(grid, ComplexVector::Ones(grid.size()));
  for (int j = prm.j_lo; j <= prm.j_hi; ++j) terms.push_back({j, 1.0, ones});
  return DyadicSeparableSymbol(grid, std::move(terms), 0.0, prm.delta).band_limited();
}

Complex tau_value(const CounterexampleParams& prm, const WindowSet& windows, const Point& x,
                  const Point& xi) {
  const double r = xi.norm();
  if (r <= 0.0) return {0.0, 0.0};
  const int centre = static_cast<int>(std::lround(std::log2(r)));
  Complex acc(0.0, 0.0);
  for (int j = std::max(prm.j_lo, centre - 1); j <= std::min(prm.j_hi, centre + 1); ++j) {
    const double c = WindowSet::eta_radial(std::ldexp(r, -j));
    if (c != 0.0) acc += std::exp2(j * prm.m) * c * x_profile_at(j, prm, windows, x);
  }
  return acc;
}

// ---------------------------------------------------------------------------

SeminormEstimate symbol_class_seminorm(const SymbolEvaluator& sigma, const MultiIndex& alpha,
                                       const MultiIndex& beta, double m, double rho, double delta,
                                       const std::vector<SeminormSample>& samples, double h_x,
                                       double h_xi) {
  if (samples.empty()) throw ConfigError("no seminorm samples");
  const int n = static_cast<int>(samples.front().x.size());
  if (static_cast<int>(alpha.size()) != n || static_cast<int>(beta.size()) != n) {
    throw ConfigError("multi-index dimension differs from the sample dimension");
  }
  // Tensor stencil over the 2n coordinates (x first, then xi).
  struct Tap {
    std::vector<int> offsets;
    double weight;
  };
  std::vector<Tap> taps{{{}, 1.0}};
  for (int axis = 0; axis < 2 * n; ++axis) {
    const auto st = axis < n ? stencil(beta[axis], h_x) : stencil(alpha[axis - n], h_xi);
    std::vector<Tap> next;
    for (const auto& t : taps) {
      for (const auto& [off, w] : st) {
        Tap u = t;
        u.offsets.push_back(off);
        u.weight *= w;
        next.push_back(std::move(u));
      }
    }
    taps = std::move(next);
  }
  const double exponent = m - rho * total(alpha) + delta * total(beta);
  SeminormEstimate best;
  best.sup_ratio = -1.0;
  for (const auto& smp : samples) {
    Complex d(0.0, 0.0);
    for (const auto& t : taps) {
      Point x = smp.x, xi = smp.xi;
      for (int a = 0; a < n; ++a) {
        x[a] += t.offsets[a] * h_x;
        xi[a] += t.offsets[n + a] * h_xi;
      }
      d += t.weight * sigma(x, xi);
    }
    const double ratio = std::abs(d) / std::pow(1.0 + smp.xi.norm(), exponent);
    if (ratio > best.sup_ratio) best = {ratio, smp.x, smp.xi};
  }
  return best;
}

std::vector<SeminormSample> shell_samples(int j, const CounterexampleParams& prm) {
  constexpr int kRadii = 64, kPositions = 128;
  const double h_xi = std::ldexp(1.0, j) / 1024.0;
  const double lo = std::log(std::exp2(j - 0.5) + 2.0 * h_xi);
  const double hi = std::log(std::exp2(j + 0.5) - 2.0 * h_xi);
  const double s = prm.dilation(j);
  const double period = 2.0 * kPi / (s * s);
  std::vector<SeminormSample> out;
  out.reserve(kRadii * kPositions);
  for (int a = 0; a < kRadii; ++a) {
    Point xi = Point::Zero(prm.n);
    xi[0] = std::exp(lo + (hi - lo) * a / (kRadii - 1));
    for (int b = 0; b < kPositions; ++b) {
      Point x = Point::Zero(prm.n);
      x[0] = period * b / kPositions;
      out.push_back({x, xi});
    }
  }
  return out;
}

std::vector<MultiIndex> multi_indices(int n, int max_order) {
  std::vector<MultiIndex> out;
  MultiIndex cur(n, 0);
  const auto rec = [&](auto&& self, int axis, int left) -> void {
    if (axis == n) {
      out.push_back(cur);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      cur[axis] = v;
      self(self, axis + 1, left - v);
    }
    cur[axis] = 0;
  };
  rec(rec, 0, max_order);
  std::sort(out.begin(), out.end(), [](const MultiIndex& a, const MultiIndex& b) {
    return total(a) != total(b) ? total(a) < total(b) : a > b;
  });
  return out;
}

std::string format_multi_index(const MultiIndex& a) {
  std::string s;
  for (std::size_t i = 0; i < a.size(); ++i) s += (i ? "-" : "") + std::to_string(a[i]);
  return s;
}

std::vector<SymbolClassRow> symbol_class_table(const CounterexampleParams& prm,
                                               const WindowSet& windows) {
  if (windows.dim() != prm.n) throw ConfigError("window set dimension differs from n");
  // a_j(x) is reused across every xi sample and stencil tap.
  std::map<std::pair<int, std::vector<double>>, Complex> memo;
  const auto profile = [&](int j, const Point& x) {
    auto key = std::make_pair(j, std::vector<double>(x.data(), x.data() + x.size()));
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    const Complex v = x_profile_at(j, prm, windows, x);
    memo.emplace(std::move(key), v);
    return v;
  };
  const SymbolEvaluator sigma = [&](const Point& x, const Point& xi) {
    const double r = xi.norm();
    Complex acc(0.0, 0.0);
    if (r <= 0.0) return acc;
    const int centre = static_cast<int>(std::lround(std::log2(r)));
    for (int j = std::max(prm.j_lo, centre - 1); j <= std::min(prm.j_hi, centre + 1); ++j) {
      const double c = WindowSet::eta_radial(std::ldexp(r, -j));
      if (c != 0.0) acc += std::exp2(j * prm.m) * c * profile(j, x);
    }
    return acc;
  };
  const auto idx = multi_indices(prm.n, 2);
  std::vector<SymbolClassRow> rows;
  for (int j = prm.j_lo; j <= prm.j_hi; ++j) {
    const auto samples = shell_samples(j, prm);
    const double h_x = std::exp2(-j * prm.delta) / 64.0;
    const double h_xi = std::ldexp(1.0, j) / 1024.0;
    for (const auto& alpha : idx) {
      for (const auto& beta : idx) {
        rows.push_back({j, alpha, beta,
                        symbol_class_seminorm(sigma, alpha, beta, prm.m, 1.0, 2.0 * prm.delta,
                                              samples, h_x, h_xi)});
      }
    }
    memo.clear();
  }
  return rows;
}

}  // namespace modlab

#include "modlab/counterexample.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "modlab/error.hpp"

namespace modlab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr Index kBlock = 4096;

struct PsiTerms {
  std::vector<Point> ks;
  std::vector<double> coeff;
  std::vector<PeriodicKernel> kernels;  // empty when truncated
  double period = 0.0;
  Point omega_twist;  // modulation entering the periodic twist
};

double variable_scale(int j, const CounterexampleParams& prm, Variable var) {
  return var == Variable::dilated ? prm.dilation(j) : 1.0;
}

void require_family(int j, const CounterexampleParams& prm, const Grid<double>& grid,
                    const WindowSet& windows) {
  if (grid.dim() != prm.n || windows.dim() != prm.n) {
    throw ConfigError("family grid and window dimensions must equal n");
  }
  if (prm.dilation(j) < 1.0) throw ConfigError("family has an empty k'-range");
}

PsiTerms psi_terms(int j, const CounterexampleParams& prm, const Grid<double>& grid,
                   const WindowSet& windows, double scale, double omega, const Truncation& cut) {
  PsiTerms t;
  t.ks = lattice_ball(prm.n, prm.dilation(j));
  t.period = 2.0 * grid.half_extent() * scale;
  t.omega_twist = Point::Zero(prm.n);
  t.omega_twist[0] = omega;
  for (const Point& k : t.ks) {
    t.coeff.push_back(family_coefficient(k, prm));
    if (!cut) {
      t.kernels.emplace_back(windows, Profile::Psi, t.period, Point((t.omega_twist + k) * t.period));
    }
  }
  return t;
}

// Sum over periodic images m with |t + P m| <= R of exp(i theta.m) Psi(t + P m).
Complex truncated_images(const WindowSet& w, const Point& t, double P, const Point& theta,
                         double R) {
  const int n = static_cast<int>(t.size());
  std::vector<long> lo(n), hi(n), m(n);
  for (int a = 0; a < n; ++a) {
    lo[a] = static_cast<long>(std::ceil((-R - t[a]) / P));
    hi[a] = static_cast<long>(std::floor((R - t[a]) / P));
    if (lo[a] > hi[a]) return {0.0, 0.0};
    m[a] = lo[a];
  }
  Complex acc(0.0);
  while (true) {
    Point u = t;
    double phase = 0.0;
    for (int a = 0; a < n; ++a) {
      u[a] += P * m[a];
      phase += theta[a] * m[a];
    }
    const double r = u.norm();
    if (r <= R) acc += std::polar(w.Psi(r), phase);
    int a = 0;
    while (a < n && ++m[a] > hi[a]) {
      m[a] = lo[a];
      ++a;
    }
    if (a == n) break;
  }
  return acc;
}

// coeff * exp(i (omega e1 + k').y - i |k'|^2) * periodized Psi(y - k'), added
// over grid indices [begin, end) into out[0 .. end-begin). One dimension.
void add_psi_term_1d(const PsiTerms& T, std::size_t idx, const Grid<double>& grid, double scale,
                     double omega, const WindowSet& w, const Truncation& cut, Index begin,
                     Index end, std::span<Complex> out) {
  const double k = T.ks[idx][0];
  const double dy = scale * grid.spacing();
  const double y0 = scale * grid.coordinate(begin);
  const Index count = end - begin;
  std::vector<Complex> ker(count, Complex(0.0));
  if (cut) {
    Point t(1), theta(1);
    theta[0] = (omega + k) * T.period;
    for (Index i = 0; i < count; ++i) {
      t[0] = y0 + i * dy - k;
      ker[i] = truncated_images(w, t, T.period, theta, *cut);
    }
  } else {
    T.kernels[idx].accumulate_1d(y0 - k, dy, 1.0, ker);
  }
  const double c = T.coeff[idx];
  for (Index i = 0; i < count; ++i) {
    const double y = scale * grid.coordinate(begin + i);
    out[i] += c * std::polar(1.0, (omega + k) * y - k * k) * ker[i];
  }
}

Complex psi_term_at(const PsiTerms& T, std::size_t idx, const Point& y, const Point& omega_vec,
                    const WindowSet& w, const Truncation& cut) {
  const Point& k = T.ks[idx];
  const Point t = y - k;
  Complex ker;
  if (cut) {
    ker = truncated_images(w, t, T.period, Point((omega_vec + k) * T.period), *cut);
  } else {
    ker = T.kernels[idx](t);
  }
  return T.coeff[idx] * std::polar(1.0, (omega_vec + k).dot(y) - k.squaredNorm()) * ker;
}

Field family_field(int j, const CounterexampleParams& prm, const Grid<double>& grid,
                   const WindowSet& windows, double scale, double omega, const Truncation& cut) {
  require_family(j, prm, grid, windows);
  const PsiTerms T = psi_terms(j, prm, grid, windows, scale, omega, cut);
  ComplexVector v = ComplexVector::Zero(grid.size());
  if (prm.n == 1) {
    for (std::size_t idx = 0; idx < T.ks.size(); ++idx) {
      add_psi_term_1d(T, idx, grid, scale, omega, windows, cut, 0, grid.size(),
                      std::span<Complex>(v.data(), v.size()));
    }
  } else {
    for (Index i = 0; i < grid.size(); ++i) {
      const Point y = scale * grid.point(i);
      for (std::size_t idx = 0; idx < T.ks.size(); ++idx) {
        v[i] += psi_term_at(T, idx, y, T.omega_twist, windows, cut);
      }
    }
  }
  return Field(grid, std::move(v));
}

void require_aligned(int j, const Grid<double>& grid) {
  const double turns = std::ldexp(grid.half_extent(), j) / kPi;
  if (std::abs(turns - std::round(turns)) > 1e-9 * std::max(1.0, turns)) {
    throw GateError("modulation 2^" + std::to_string(j) + " is not aligned with the frequency lattice of " +
                    grid.describe());
  }
}

ComplexVector modulation_e1(const Grid<double>& grid, double omega) {
  ComplexVector v(grid.size());
  for (Index i = 0; i < grid.size(); ++i) {
    v[i] = std::polar(1.0, omega * grid.coordinate(grid.axis_index(i, 0)));
  }
  return v;
}

double sinc(double u) { return u == 0.0 ? 1.0 : std::sin(u) / u; }

}  // namespace

double family_coefficient(const Point& k, const CounterexampleParams& prm) {
  return std::pow(k.norm(), -prm.decay_exponent());
}

Field build_f(int j, const CounterexampleParams& prm, const Grid<double>& grid,
              const WindowSet& windows, Variable var, Truncation cut) {
  const double scale = variable_scale(j, prm, var);
  require_band_limit(grid, scale * (prm.dilation(j) + WindowSet::kPsiRadius), "f_j");
  return family_field(j, prm, grid, windows, scale, 0.0, cut);
}

Field build_modulated_f(int j, const CounterexampleParams& prm, const Grid<double>& grid,
                        const WindowSet& windows) {
  const double omega = family_modulation(j, prm);
  require_band_limit(grid, omega + prm.dilation(j) + WindowSet::kPsiRadius, "modulated f_j");
  return family_field(j, prm, grid, windows, 1.0, omega, std::nullopt);
}

Spectrum_d fhat_closed_form(int j, const CounterexampleParams& prm, const FreqGrid& fgrid,
                            const WindowSet& windows) {
  const double omega = family_modulation(j, prm);
  const auto ks = lattice_ball(prm.n, prm.dilation(j));
  std::vector<double> coeff;
  for (const Point& k : ks) coeff.push_back(family_coefficient(k, prm));
  ComplexVector v = ComplexVector::Zero(fgrid.size());
  for (Index m = 0; m < fgrid.size(); ++m) {
    Point eta = fgrid.point(m);
    eta[0] -= omega;
    if (prm.n == 1) {
      // only the nearest k' can reach: bumps have radius 1/2 and unit spacing
      const double k = std::round(eta[0]);
      if (k == 0.0 || std::abs(k) > ks.back()[0]) continue;
      const double r = std::abs(eta[0] - k);
      if (r >= WindowSet::kPsiRadius) continue;
      v[m] = std::pow(std::abs(k), -prm.decay_exponent()) *
             std::polar(windows.psi_radial(r), -k * eta[0]);
      continue;
    }
    for (std::size_t idx = 0; idx < ks.size(); ++idx) {
      const double r = (eta - ks[idx]).norm();
      if (r < WindowSet::kPsiRadius) {
        v[m] += coeff[idx] * std::polar(windows.psi_radial(r), -ks[idx].dot(eta));
      }
    }
  }
  return Spectrum_d(fgrid, std::move(v));
}

Field build_input(int j, const CounterexampleParams& prm, const Grid<double>& grid,
                  const WindowSet& windows, Truncation cut) {
  require_aligned(j, grid);
  const double s = prm.dilation(j);
  require_band_limit(grid, std::ldexp(1.0, j) + s * (s + WindowSet::kPsiRadius), "input u_j");
  const Field f = family_field(j, prm, grid, windows, s, 0.0, cut);
  return Field(grid, f.values().cwiseProduct(modulation_e1(grid, std::ldexp(1.0, j))));
}

Field build_g(int j, const CounterexampleParams& prm, const Grid<double>& grid,
              const WindowSet& windows, Variable var) {
  require_family(j, prm, grid, windows);
  const double scale = variable_scale(j, prm, var);
  const double s = prm.dilation(j);
  require_band_limit(grid, scale * (s + WindowSet::kPsiRadius + s + WindowSet::kPhiRadius), "g_j");
  const PsiTerms T = psi_terms(j, prm, grid, windows, scale, 0.0, std::nullopt);
  const auto& ks = T.ks;
  const std::size_t K = ks.size();
  ComplexVector out = ComplexVector::Zero(grid.size());

  if (prm.n == 1) {
    for (Index b = 0; b < grid.size(); b += kBlock) {
      const Index e = std::min(grid.size(), b + kBlock);
      const Index c = e - b;
      Eigen::MatrixXcd A(c, K), F = Eigen::MatrixXcd::Zero(c, K);
      for (std::size_t idx = 0; idx < K; ++idx) {
        const double k = ks[idx][0];
        for (Index i = 0; i < c; ++i) {
          const double t = scale * grid.coordinate(b + i) - k;
          A(i, idx) = std::polar(windows.Phi(std::abs(t)), -k * t);
        }
        add_psi_term_1d(T, idx, grid, scale, 0.0, windows, std::nullopt, b, e,
                        std::span<Complex>(F.col(idx).data(), c));
      }
      // literal double sum over (k, k')
      for (std::size_t ka = 0; ka < K; ++ka) {
        for (std::size_t kb = 0; kb < K; ++kb) {
          out.segment(b, c).array() += A.col(ka).array() * F.col(kb).array();
        }
      }
    }
  } else {
    const Point zero = Point::Zero(prm.n);
    for (Index i = 0; i < grid.size(); ++i) {
      const Point y = scale * grid.point(i);
      std::vector<Complex> fa(K);
      for (std::size_t idx = 0; idx < K; ++idx) fa[idx] = psi_term_at(T, idx, y, zero, windows, std::nullopt);
      Complex acc(0.0);
      for (std::size_t ka = 0; ka < K; ++ka) {
        const Point t = y - ks[ka];
        const Complex a = std::polar(windows.Phi(t.norm()), -ks[ka].dot(t));
        for (std::size_t kb = 0; kb < K; ++kb) acc += a * fa[kb];
      }
      out[i] = acc;
    }
  }
  return Field(grid, std::move(out));
}

Field closed_form_action(int j, const CounterexampleParams& prm, const Grid<double>& grid,
                         const WindowSet& windows) {
  require_aligned(j, grid);
  const Field g = build_g(j, prm, grid, windows, Variable::dilated);
  const ComplexVector mod = modulation_e1(grid, std::ldexp(1.0, j));
  return Field(grid, std::exp2(j * prm.m) * g.values().cwiseProduct(mod));
}

double shell_energy_fraction(const Field& f, int j) {
  const Spectrum_d fh = fourier(f);
  const double lo = std::exp2(j - 0.25), hi = std::exp2(j + 0.25);
  double inside = 0.0, total = 0.0;
  for (Index m = 0; m < fh.size(); ++m) {
    const double e = std::norm(fh.values()[m]);
    const double r = fh.fgrid().point(m).norm();
    total += e;
    if (r >= lo && r <= hi) inside += e;
  }
  return total > 0.0 ? inside / total : 0.0;
}

double pairing_constant(int n) { return std::pow(2.0 * kPi, -2.0 * n); }

PairingTerms pairing_terms(int j, const CounterexampleParams& prm, const WindowSet& windows,
                           std::uint64_t seed) {
  if (prm.n != 1 || windows.dim() != 1) {
    throw ConfigError("pairing quadrature is implemented in one dimension");
  }
  constexpr double kReach = 1500.0;  // |argument| kept in the Phi/Psi quadratures
  const double s = prm.dilation(j);
  const auto ks = lattice_ball(1, s);
  PairingTerms out;

  double sum = 0.0;
  for (const Point& k : ks) {
    sum += family_coefficient(k, prm) * std::pow(sinc(k[0] / (2.0 * s)), 2);
  }
  out.I = pairing_constant(1) / s * sum;

  // diagonal: s^{-1} int Phi(t) Psi(t) F^{-1}B((t + k)/s) dt, band below 1
  const double h = 0.25;
  const long half = static_cast<long>(kReach / h);
  std::vector<double> pp(2 * half + 1);
  for (long i = -half; i <= half; ++i) {
    const double t = i * h;
    pp[i + half] = windows.Phi(std::abs(t)) * windows.Psi(std::abs(t));
  }
  Point arg(1);
  for (const Point& k : ks) {
    std::vector<double> terms(pp.size());
    for (long i = -half; i <= half; ++i) {
      arg[0] = (i * h + k[0]) / s;
      terms[i + half] = pp[i + half] * inv_fourier_B(arg);
    }
    const Eigen::Map<const Eigen::VectorXd> tv(terms.data(), static_cast<Index>(terms.size()));
    out.I_quadrature += family_coefficient(k, prm) * h / s * pairwise_sum(tv);
  }

  // cross pairs
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t a = 0; a < ks.size(); ++a)
    for (std::size_t b = 0; b < ks.size(); ++b)
      if (a != b) pairs.emplace_back(a, b);
  out.pairs_total = pairs.size();
  if (pairs.size() > 256) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < 50; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, pairs.size() - 1);
      std::swap(pairs[i], pairs[pick(rng)]);
    }
    pairs.resize(50);
  }
  for (const auto& [a, b] : pairs) {
    const double k = ks[a][0], kp = ks[b][0];
    // integrand band <= |k' - k| + 1/8 + 1/2 + 1/s
    const double step = kPi / (std::abs(kp - k) + 1.0);
    const double lo = std::min(k, kp) - kReach, hi = std::max(k, kp) + kReach;
    const long count = static_cast<long>(std::ceil((hi - lo) / step));
    ComplexVector vals(count + 1);
    for (long i = 0; i <= count; ++i) {
      const double y = lo + i * step;
      arg[0] = y / s;
      const double tk = y - k, tkp = y - kp;
      const double amp = std::abs(tk) <= kReach && std::abs(tkp) <= kReach
                             ? windows.Phi(std::abs(tk)) * windows.Psi(std::abs(tkp)) * inv_fourier_B(arg)
                             : 0.0;
      vals[i] = std::polar(amp, -k * tk + kp * tkp);
    }
    const Complex pair = family_coefficient(ks[b], prm) * step / s * pairwise_sum(vals);
    out.II += pair;
    out.II_max_pair = std::max(out.II_max_pair, std::abs(pair));
  }
  out.pairs_evaluated = pairs.size();
  return out;
}

}  // namespace modlab

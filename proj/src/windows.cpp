#include "modlab/windows.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace modlab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kGaussNodes = 16;
constexpr int kCellsPerUnit = 64;

struct GaussLegendre {
  std::array<double, kGaussNodes> x{}, w{};

  GaussLegendre() {
    const int n = kGaussNodes;
    for (int i = 0; i < n; ++i) {
      double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = 0.0;
        for (int k = 1; k <= n; ++k) {
          const double p2 = p1;
          p1 = p0;
          p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
        }
        dp = n * (z * p0 - p1) / (z * z - 1.0);
        const double dz = p0 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      x[i] = z;
      w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
  }
};

const GaussLegendre& gauss() {
  static const GaussLegendre rule;
  return rule;
}

template <typename Fn>
double gauss_segment(Fn&& f, double a, double b) {
  const auto& g = gauss();
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double acc = 0.0;
  for (int i = 0; i < kGaussNodes; ++i) acc += g.w[i] * f(mid + half * g.x[i]);
  return acc * half;
}

template <typename Fn>
double gauss_composite(Fn&& f, double a, double b, int cells) {
  double acc = 0.0;
  const double h = (b - a) / cells;
  for (int c = 0; c < cells; ++c) acc += gauss_segment(f, a + c * h, a + (c + 1) * h);
  return acc;
}

// Cumulative integrals of the bump over [-1, -1 + c/64], c = 0..64.
const std::array<double, kCellsPerUnit + 1>& bump_cumulative() {
  static const auto table = [] {
    std::array<double, kCellsPerUnit + 1> cum{};
    const double h = 1.0 / kCellsPerUnit;
    for (int c = 0; c < kCellsPerUnit; ++c) {
      cum[c + 1] = cum[c] + gauss_segment(mollifier::bump, -1.0 + c * h, -1.0 + (c + 1) * h);
    }
    return cum;
  }();
  return table;
}

// Antiderivative on the left half, v in [-1, 0].
double left_antiderivative(double v) {
  const auto& cum = bump_cumulative();
  if (v <= -1.0) return 0.0;
  const double pos = (v + 1.0) * kCellsPerUnit;
  const int c = std::min(static_cast<int>(pos), kCellsPerUnit - 1);
  const double start = -1.0 + static_cast<double>(c) / kCellsPerUnit;
  return cum[c] + (v > start ? gauss_segment(mollifier::bump, start, v) : 0.0);
}

}  // namespace

namespace mollifier {

double bump(double s) {
  const double d = 1.0 - s * s;
  return d > 0.0 ? std::exp(-1.0 / d) : 0.0;
}

double bump_mass() { return 2.0 * bump_cumulative()[kCellsPerUnit]; }

double bump_antiderivative(double v) {
  if (v <= -1.0) return 0.0;
  if (v >= 1.0) return bump_mass();
  if (v <= 0.0) return left_antiderivative(v);
  return bump_mass() - left_antiderivative(-v);
}

double smooth_step(double u) {
  if (u <= 0.0) return 1.0;
  if (u >= 1.0) return 0.0;
  const double v = 2.0 * u - 1.0;
  // Evaluate from the nearer end so both halves share one antiderivative.
  if (v <= 0.0) return 1.0 - left_antiderivative(v) / bump_mass();
  return left_antiderivative(-v) / bump_mass();
}

double plateau(double t) { return smooth_step((std::abs(t) - 0.25) * 4.0); }

double radial_moment(int n) {
  if (n == 1) return 0.5 * bump_mass();
  return gauss_composite([n](double r) { return std::pow(r, n - 1) * bump(r); }, 0.0, 1.0,
                         kCellsPerUnit);
}

double sphere_area(int n) {
  return 2.0 * std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n);
}

}  // namespace mollifier

namespace {

// Nodes on [0, rho] for the uniform rule: at least kQuadratureNodes/2 and
// dense enough that the alias image 2 pi / h - r sits beyond 4096 + 4 r.
int half_nodes(double rho, double r) {
  const double need = rho * (4096.0 + 5.0 * r) / (2.0 * kPi);
  return std::max(WindowSet::kQuadratureNodes / 2, static_cast<int>(std::ceil(need)));
}

}  // namespace

// ---------------------------------------------------------------------------

WindowSet::WindowSet(int n) : n_(n) {
  if (n < 1 || n > kMaxDim) throw ConfigError("window dimension out of range");
  phi_norm_ = std::pow(8.0, n) / (mollifier::sphere_area(n) * mollifier::radial_moment(n));
}

double WindowSet::phi_radial(double r) const { return phi_norm_ * mollifier::bump(8.0 * r); }

double WindowSet::psi_radial(double r) const { return mollifier::smooth_step((r - 0.25) * 4.0); }

double WindowSet::eta_radial(double r) {
  if (!(r > 0.0)) return 0.0;
  return mollifier::plateau(std::log2(r));
}

double WindowSet::psi_mass() const {
  auto integrand = [this](double r) { return std::pow(r, n_ - 1) * psi_radial(r); };
  const double inner = std::pow(0.25, n_) / n_;
  return mollifier::sphere_area(n_) *
         (inner + gauss_composite(integrand, 0.25, 0.5, kCellsPerUnit));
}

double WindowSet::direct_kernel(Profile which, double r) const {
  r = std::abs(r);
  const double rho = profile_radius(which);
  if (n_ == 1) {
    // Even integrand: trapezoid over symmetric nodes reduces to a cosine sum.
    // The node density keeps the first alias image beyond five times r.
    const int m = half_nodes(rho, r);
    const double h = rho / m;
    double acc = profile_radial(which, 0.0);
    for (int l = 1; l < m; ++l) acc += 2.0 * std::cos(r * l * h) * profile_radial(which, l * h);
    return acc * h / (2.0 * kPi);
  }
  const double nu = 0.5 * n_ - 1.0;
  const double front = std::pow(2.0 * kPi, -0.5 * n_);
  if (r == 0.0) {
    auto integrand = [&](double s) { return std::pow(s, n_ - 1) * profile_radial(which, s); };
    return std::pow(2.0 * kPi, -n_) * mollifier::sphere_area(n_) *
           gauss_composite(integrand, 0.0, rho, 4 * kCellsPerUnit);
  }
  auto integrand = [&](double s) {
    return profile_radial(which, s) * std::cyl_bessel_j(nu, r * s) * std::pow(s, 0.5 * n_);
  };
  const int cells = kCellsPerUnit + static_cast<int>(r * rho / 4.0);
  return front * std::pow(r, 1.0 - 0.5 * n_) * gauss_composite(integrand, 0.0, rho, cells);
}

std::vector<double> WindowSet::eval_kernel(Profile which, std::span<const Point> points) const {
  const double rho = profile_radius(which);
  std::vector<double> out;
  out.reserve(points.size());
  if (n_ == 1) {
    double reach = 0.0;
    for (const Point& t : points) reach = std::max(reach, std::abs(t[0]));
    const int m = 2 * half_nodes(rho, reach);
    const double h = 2.0 * rho / m;
    std::vector<double> weights(m + 1);
    for (int l = 0; l <= m; ++l) weights[l] = profile_radial(which, std::abs(-rho + l * h));
    const double at_zero = direct_kernel(which, 0.0);
    for (const Point& t : points) {
      Complex acc(0.0);
      for (int l = 0; l <= m; ++l) acc += weights[l] * std::polar(1.0, t[0] * (-rho + l * h));
      acc *= h / (2.0 * kPi);
      if (std::abs(acc.imag()) > 1e-12 * std::abs(at_zero)) {
        throw ConsistencyError("kernel quadrature left an imaginary residue at t = " +
                               std::to_string(t[0]));
      }
      out.push_back(acc.real());
    }
    return out;
  }
  if (n_ == 2) {
    // Tensorized uniform rule; the radial path in direct_kernel is independent.
    const int m = 512;
    const double h = 2.0 * rho / m;
    Eigen::MatrixXd weights(m + 1, m + 1);
    for (int a = 0; a <= m; ++a) {
      for (int b = 0; b <= m; ++b) {
        weights(a, b) = profile_radial(which, std::hypot(-rho + a * h, -rho + b * h));
      }
    }
    const double at_zero = direct_kernel(which, 0.0);
    Eigen::VectorXcd p0(m + 1), p1(m + 1);
    for (const Point& t : points) {
      for (int l = 0; l <= m; ++l) {
        p0[l] = std::polar(1.0, t[0] * (-rho + l * h));
        p1[l] = std::polar(1.0, t[1] * (-rho + l * h));
      }
      Complex acc = p0.transpose() * weights.cast<Complex>() * p1;
      acc *= h * h / (4.0 * kPi * kPi);
      if (std::abs(acc.imag()) > 1e-12 * std::abs(at_zero)) {
        throw ConsistencyError("kernel quadrature left an imaginary residue");
      }
      out.push_back(acc.real());
    }
    return out;
  }
  for (const Point& t : points) out.push_back(direct_kernel(which, t.norm()));
  return out;
}

std::vector<double> WindowSet::eval_Phi(std::span<const Point> points) const {
  return eval_kernel(Profile::Phi, points);
}

std::vector<double> WindowSet::eval_Psi(std::span<const Point> points) const {
  return eval_kernel(Profile::Psi, points);
}

namespace {

constexpr double kTableStep = 0.125;
constexpr double kTableExtent = 4096.0;
// Radial Hankel entries are costly; higher dimensions tabulate a shorter range.
constexpr double kTableExtentRadial = 512.0;
constexpr int kStencil = 10;

const std::array<double, kStencil>& stencil_weights() {
  static const auto w = [] {
    std::array<double, kStencil> out{};
    double binom = 1.0;
    for (int j = 0; j < kStencil; ++j) {
      out[j] = (j % 2 ? -1.0 : 1.0) * binom;
      binom = binom * (kStencil - 1 - j) / (j + 1);
    }
    return out;
  }();
  return w;
}

}  // namespace

WindowSet::RadialTable::RadialTable(const WindowSet& owner, Profile which)
    : owner_(&owner), which_(which) {
  extent_ = owner.n_ == 1 ? kTableExtent : kTableExtentRadial;
  const int count = static_cast<int>(extent_ / kTableStep) + kStencil + 1;
  values_.assign(count, 0.0);
  if (owner.n_ == 1) {
    // Cosine sum per table entry with a phase recurrence along the nodes.
    const int m = half_nodes(profile_radius(which), extent_);
    const double rho = profile_radius(which);
    const double h = rho / m;
    std::vector<double> prof(m);
    for (int l = 0; l < m; ++l) prof[l] = owner.profile_radial(which, l * h);
    for (int i = 0; i < count; ++i) {
      const double r = i * kTableStep;
      const Complex step = std::polar(1.0, r * h);
      Complex z(1.0);
      double acc = prof[0];
      for (int l = 1; l < m; ++l) {
        if (l % 64 == 0) z = std::polar(1.0, r * l * h); else z *= step;
        acc += 2.0 * z.real() * prof[l];
      }
      values_[i] = acc * h / (2.0 * kPi);
    }
  } else {
    for (int i = 0; i < count; ++i) values_[i] = owner.direct_kernel(which, i * kTableStep);
  }
}

double WindowSet::RadialTable::value(double r) const {
  r = std::abs(r);
  if (r > extent_) return owner_->direct_kernel(which_, r);
  const double pos = r / kTableStep;
  const int base = static_cast<int>(std::floor(pos)) - kStencil / 2 + 1;
  const auto& w = stencil_weights();
  double num = 0.0, den = 0.0;
  for (int j = 0; j < kStencil; ++j) {
    const int idx = base + j;
    const double d = pos - idx;
    const double v = values_[std::abs(idx)];  // even extension for negative radii
    if (d == 0.0) return v;
    const double c = w[j] / d;
    num += c * v;
    den += c;
  }
  return num / den;
}

const WindowSet::RadialTable& WindowSet::table(Profile which) const {
  if (which == Profile::Phi) {
    std::call_once(phi_once_, [this] { phi_table_ = RadialTable(*this, Profile::Phi); });
    return phi_table_;
  }
  std::call_once(psi_once_, [this] { psi_table_ = RadialTable(*this, Profile::Psi); });
  return psi_table_;
}

double WindowSet::psi_decay_constant() const {
  double c = 0.0;
  for (double t = 0.0; t <= 512.0; t += kTableStep) {
    c = std::max(c, std::abs(Psi(t)) * std::pow(1.0 + t, 8));
  }
  return c;
}

// ---------------------------------------------------------------------------

PeriodicKernel::PeriodicKernel(const WindowSet& windows, Profile which, double period,
                               const Point& twist)
    : n_(windows.dim()) {
  if (!(period > 0.0)) throw std::invalid_argument("kernel period must be positive");
  if (twist.size() != n_) throw std::invalid_argument("kernel twist has wrong dimension");
  const double rho = WindowSet::profile_radius(which);
  const double volume = std::pow(period, n_);
  // Per-axis candidate indices l with |2 pi l - theta| <= rho P.
  std::vector<std::vector<double>> axis_nodes(n_);
  for (int a = 0; a < n_; ++a) {
    const long lo = static_cast<long>(std::floor((twist[a] - rho * period) / (2.0 * kPi)));
    const long hi = static_cast<long>(std::ceil((twist[a] + rho * period) / (2.0 * kPi)));
    for (long l = lo; l <= hi; ++l) {
      const double nu = (2.0 * kPi * l - twist[a]) / period;
      if (std::abs(nu) < rho) axis_nodes[a].push_back(nu);
    }
  }
  std::vector<int> idx(n_, 0);
  while (true) {
    Point nu(n_);
    bool empty = false;
    for (int a = 0; a < n_; ++a) {
      if (axis_nodes[a].empty()) { empty = true; break; }
      nu[a] = axis_nodes[a][idx[a]];
    }
    if (empty) break;
    const double w = windows.profile_radial(which, nu.norm());
    if (w != 0.0) {
      weights_.push_back(w / volume);
      nodes_.push_back(nu);
    }
    int a = n_ - 1;
    while (a >= 0 && ++idx[a] == static_cast<int>(axis_nodes[a].size())) idx[a--] = 0;
    if (a < 0) break;
  }
}

Complex PeriodicKernel::operator()(const Point& t) const {
  Complex acc(0.0);
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    acc += weights_[l] * std::polar(1.0, nodes_[l].dot(t));
  }
  return acc;
}

void PeriodicKernel::accumulate_1d(double t0, double dt, Complex scale,
                                   std::span<Complex> out) const {
  if (n_ != 1) throw std::invalid_argument("accumulate_1d needs a one-dimensional kernel");
  constexpr std::size_t kReseed = 256;
  const std::size_t count = out.size();
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    const double nu = nodes_[l][0];
    const Complex step = std::polar(1.0, nu * dt);
    const Complex amp = scale * weights_[l];
    for (std::size_t b = 0; b < count; b += kReseed) {
      Complex z = amp * std::polar(1.0, nu * (t0 + static_cast<double>(b) * dt));
      const std::size_t end = std::min(count, b + kReseed);
      for (std::size_t i = b; i < end; ++i) {
        out[i] += z;
        z *= step;
      }
    }
  }
}

// ---------------------------------------------------------------------------

double bspline_B(const Point& t) {
  double v = 1.0;
  for (Index a = 0; a < t.size(); ++a) v *= std::max(0.0, 1.0 - std::abs(t[a]));
  return v;
}

double inv_fourier_B(const Point& t) {
  double v = std::pow(2.0 * kPi, -static_cast<double>(t.size()));
  for (Index a = 0; a < t.size(); ++a) {
    const double h = 0.5 * t[a];
    const double s = h == 0.0 ? 1.0 : std::sin(h) / h;
    v *= s * s;
  }
  return v;
}

double GaussianWindow::energy(int n) const { return std::pow(kPi / (2.0 * alpha), 0.5 * n); }

double GaussianWindow::radius() const { return std::sqrt(std::log(1e12) / alpha); }

SampledWindow gauss_window(const Grid<double>& grid, GaussianWindow window) {
  if (kPi / grid.spacing() < 16.0) {
    throw GateError("grid under-resolves the Gaussian window: " + grid.describe());
  }
  SampledWindow out;
  out.samples = sample(grid, [&](const Point& t) { return window(t); });
  const double norm = norm_l2(out.samples);
  out.energy = norm * norm;
  const double exact = window.energy(grid.dim());
  if (std::abs(out.energy - exact) > 1e-12 * exact) {
    throw GateError("box too small for the Gaussian window: energy " + std::to_string(out.energy) +
                    " on " + grid.describe());
  }
  return out;
}

}  // namespace modlab

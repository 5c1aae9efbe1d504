#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "modlab/spectral.hpp"

using namespace modlab;

namespace {

constexpr double kPi = std::numbers::pi;

double gaussian(const Point& x) { return std::exp(-0.5 * x.squaredNorm()); }

// Smooth random field: a few random Gaussian wave packets.
Field random_smooth(const Grid<double>& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  struct Packet { Point c; Point w; Complex amp; };
  std::vector<Packet> packets;
  for (int k = 0; k < 4; ++k) {
    Point c(g.dim()), w(g.dim());
    for (int a = 0; a < g.dim(); ++a) { c[a] = 2.0 * u(rng); w[a] = 3.0 * u(rng); }
    packets.push_back({c, w, Complex(u(rng), u(rng))});
  }
  return sample(g, [&](const Point& x) {
    Complex acc(0.0);
    for (const auto& p : packets) acc += p.amp * std::exp(-(x - p.c).squaredNorm()) * std::polar(1.0, p.w.dot(x));
    return acc;
  });
}

}  // namespace

TEST_CASE("frequency grid") {
  const FreqGrid fg(make_grid(1, 8.0, 10));
  CHECK(fg.spacing() == kPi / 8.0);
  CHECK(fg.wavenumber(0) == -512);
  CHECK(fg.frequency(512) == 0.0);
  CHECK(std::abs(fg.source().spacing() * fg.spacing() * 1024 - 2 * kPi) < 1e-15);
  CHECK(fg.nyquist() == kPi / fg.source().spacing());
}

TEST_CASE("Gaussian transform pair") {
  const Grid<double> g = make_grid(1, 16.0, 14);
  const Spectrum_d s = fourier(sample(g, gaussian));
  // Relative to the peak: pointwise relative error at |xi| = 8 is below the
  // double-precision floor of the exact value e^{-32}.
  const double peak = std::sqrt(2 * kPi);
  double worst = 0.0;
  for (Index k = 0; k < s.size(); ++k) {
    const double xi = s.fgrid().frequency(k);
    if (std::abs(xi) > 8.0) continue;
    const double exact = peak * std::exp(-0.5 * xi * xi);
    worst = std::max(worst, std::abs(s.values()[k] - exact) / peak);
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("Gaussian transform pair in two dimensions") {
  const Grid<double> g = make_grid(2, 12.0, 7);
  const Spectrum_d s = fourier(sample(g, gaussian));
  double worst = 0.0;
  for (Index k = 0; k < s.size(); ++k) {
    const Point xi = s.fgrid().point(k);
    if (xi.norm() > 4.0) continue;
    const double exact = 2 * kPi * std::exp(-0.5 * xi.squaredNorm());
    worst = std::max(worst, std::abs(s.values()[k] - exact) / (2 * kPi));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("round trip") {
  for (int n : {1, 2}) {
    const Grid<double> g = make_grid(n, 8.0, n == 1 ? 12 : 6);
    const Field f = random_smooth(g, 11 + n);
    CHECK(relative_l2(inverse_fourier(fourier(f)), f) <= 1e-12);
  }
}

TEST_CASE("unit spectrum inverts to a scaled delta") {
  // Brute-force inverse with the continuous convention at N = 8, L = 2.
  const Grid<double> g = make_grid(1, 2.0, 3);
  const FreqGrid fg(g);
  const Field f = inverse_fourier(Spectrum_d(fg, ComplexVector::Ones(8)));
  for (Index i = 0; i < 8; ++i) {
    Complex direct(0.0);
    for (Index k = 0; k < 8; ++k) direct += std::polar(1.0, g.coordinate(i) * fg.frequency(k));
    direct *= fg.spacing() / (2 * kPi);
    CHECK(std::abs(f[i] - direct) < 1e-14);
  }
  CHECK(std::abs(f[4] - Complex(8.0 / 4.0)) < 1e-14);
  for (Index i = 0; i < 8; ++i) {
    if (i != 4) CHECK(std::abs(f[i]) < 1e-14);
  }
}

TEST_CASE("forward transform matches a brute-force sum") {
  const Grid<double> g = make_grid(2, 1.5, 3);
  const Field f = random_smooth(g, 3);
  const Spectrum_d s = fourier(f);
  for (Index k = 0; k < s.size(); ++k) {
    Complex direct(0.0);
    const Point xi = s.fgrid().point(k);
    for (Index i = 0; i < g.size(); ++i) direct += f[i] * std::polar(1.0, -xi.dot(g.point(i)));
    direct *= g.cell_volume();
    CHECK(std::abs(s.values()[k] - direct) < 1e-12);
  }
}

TEST_CASE("translation and modulation laws") {
  const Grid<double> g = make_grid(1, 16.0, 12);
  const Field f = random_smooth(g, 5);
  const Spectrum_d fh = fourier(f);

  const double a = 37 * g.spacing();
  // Cyclic lattice translation by 37 samples.
  ComplexVector sv(g.size());
  for (Index i = 0; i < g.size(); ++i) sv[i] = f[(i - 37 + g.size()) % g.size()];
  const Spectrum_d sh = fourier(Field(g, sv));
  double worst = 0.0;
  for (Index k = 0; k < g.size(); ++k) {
    const Complex expect = fh.values()[k] * std::polar(1.0, -a * fh.fgrid().frequency(k));
    worst = std::max(worst, std::abs(sh.values()[k] - expect));
  }
  CHECK(worst <= 1e-10 * fh.values().cwiseAbs().maxCoeff());

  const Index shift = 24;
  const double omega = shift * fh.fgrid().spacing();
  const Field mod = sample(g, [&](const Point& x) { return std::polar(1.0, omega * x[0]); });
  const Spectrum_d mh = fourier(multiply(mod, f));
  worst = 0.0;
  for (Index k = shift; k < g.size(); ++k) {
    worst = std::max(worst, std::abs(mh.values()[k] - fh.values()[k - shift]));
  }
  CHECK(worst <= 1e-10 * fh.values().cwiseAbs().maxCoeff());
}

TEST_CASE("Parseval") {
  for (int n : {1, 2}) {
    const Grid<double> g = make_grid(n, 8.0, n == 1 ? 11 : 6);
    const Field f = random_smooth(g, 21), h = random_smooth(g, 22);
    const Complex lhs = inner_product(fourier(f), fourier(h)) / std::pow(2 * kPi, n);
    const Complex rhs = inner_product(f, h);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(rhs));
  }
}

TEST_CASE("multipliers") {
  const Grid<double> g = make_grid(1, 8.0, 10);
  const Field f = random_smooth(g, 9);
  CHECK(relative_l2(apply_multiplier(f, [](const Point&) { return 1.0; }), f) <= 1e-13);

  const double a = 12 * g.spacing();
  const Field moved = apply_multiplier(f, [&](const Point& xi) { return std::polar(1.0, -a * xi[0]); });
  ComplexVector sv(g.size());
  for (Index i = 0; i < g.size(); ++i) sv[i] = f[(i - 12 + g.size()) % g.size()];
  CHECK(relative_l2(moved, Field(g, sv)) <= 1e-12);

  auto indicator = [](const Point& xi) { return xi.norm() <= 3.0 ? 1.0 : 0.0; };
  const Field once = apply_multiplier(f, indicator);
  CHECK(relative_l2(apply_multiplier(once, indicator), once) <= 1e-13);

  const Field even = sample(g, [](const Point& x) { return std::exp(-x.squaredNorm()) * std::cos(2 * x[0]); });
  const Field out = apply_multiplier(even, [](const Point& xi) { return 1.0 / (1.0 + xi.squaredNorm()); });
  CHECK(out.values().imag().cwiseAbs().maxCoeff() <= 1e-13 * norm_l2(out));
  for (Index i = 1; i < g.size(); ++i) {
    CHECK(std::abs(out[i] - out[g.size() - i]) <= 1e-13 * norm_l2(out));
  }
}

TEST_CASE("band limit gate") {
  const Grid<double> g = make_grid(1, 8.0, 10);
  CHECK_NOTHROW(require_band_limit(g, 100.0, "test"));
  CHECK_THROWS_AS(require_band_limit(g, 170.0, "test"), GateError);
}

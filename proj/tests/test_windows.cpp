#include "doctest.h"

#include <cmath>
#include <functional>
#include <numbers>

#include "modlab/spectral.hpp"
#include "modlab/windows.hpp"

using namespace modlab;

namespace {

constexpr double kPi = std::numbers::pi;

Point pt(double a) {
  Point p(1);
  p[0] = a;
  return p;
}

Point pt(double a, double b) {
  Point p(2);
  p[0] = a;
  p[1] = b;
  return p;
}

}  // namespace

TEST_CASE("bump mass against independent quadrature") {
  // mpmath quad of exp(-1/(1-s^2)) over (-1, 1).
  CHECK(std::abs(mollifier::bump_mass() - 0.4439938161680794) < 1e-15);
  // (exp(-1) + Ei(-1)) / 2 from the closed form of the radial moment in 2D.
  CHECK(std::abs(mollifier::radial_moment(2) - 0.07424775338796102) < 1e-15);
}

TEST_CASE("smooth step") {
  CHECK(mollifier::smooth_step(-0.1) == 1.0);
  CHECK(mollifier::smooth_step(1.2) == 0.0);
  CHECK(mollifier::smooth_step(0.5) == 0.5);
  for (double u = 0.01; u < 1.0; u += 0.01) {
    CHECK(std::abs(mollifier::smooth_step(u) + mollifier::smooth_step(1.0 - u) - 1.0) < 1e-15);
    CHECK(mollifier::smooth_step(u) >= mollifier::smooth_step(u + 0.01));
  }
}

TEST_CASE("phi") {
  for (int n : {1, 2}) {
    const WindowSet w(n);
    CHECK(w.phi(Point::Zero(n)) == doctest::Approx(w.phi_normalization() * std::exp(-1.0)));
    Point far = Point::Zero(n);
    far[0] = 0.2;
    CHECK(w.phi(far) == 0.0);
  }
  const WindowSet w1(1);
  const Grid<double> g1 = make_grid(1, 1.0, 14);
  CHECK(std::abs(integrate(sample(g1, [&](const Point& x) { return w1.phi(x); })).real() - 1.0) < 1e-10);
  const WindowSet w2(2);
  const Grid<double> g2 = make_grid(2, 1.0, 10);
  CHECK(std::abs(integrate(sample(g2, [&](const Point& x) { return w2.phi(x); })).real() - 1.0) < 1e-10);
}

TEST_CASE("psi and eta plateaus") {
  const WindowSet w(1);
  CHECK(w.psi(pt(0.2)) == 1.0);
  CHECK(w.psi(pt(0.6)) == 0.0);
  CHECK(w.psi(pt(0.375)) == 0.5);
  CHECK(w.eta(pt(1.0)) == 1.0);
  CHECK(w.eta(pt(2.0)) == 0.0);
  CHECK(w.eta(pt(std::pow(2.0, 0.25))) == 1.0);
  CHECK(w.eta(pt(std::sqrt(2.0))) == 0.0);
  CHECK(w.eta(pt(0.0)) == 0.0);

  const WindowSet w2(2);
  CHECK(w2.psi(pt(0.15, 0.15)) == 1.0);
  CHECK(w2.eta(pt(0.6, 0.8)) == 1.0);

  for (double r = 0.0; r < 3.0; r += 1e-3) {
    const double p = w.psi_radial(r), e = WindowSet::eta_radial(r);
    CHECK((p >= 0.0 && p <= 1.0));
    CHECK((e >= 0.0 && e <= 1.0));
    if (r >= 0.125) CHECK(w.phi_radial(r) == 0.0);
  }
}

TEST_CASE("cutoffs have bounded derivatives up to order four") {
  // Fourth differences at two step sizes agree when the function is smooth.
  const WindowSet w(1);
  auto fourth = [](auto f, double h) {
    double worst = 0.0;
    for (double x = -2.0; x <= 2.0; x += 1e-3) {
      const double d = f(x - 2 * h) - 4 * f(x - h) + 6 * f(x) - 4 * f(x + h) + f(x + 2 * h);
      worst = std::max(worst, std::abs(d) / std::pow(h, 4));
    }
    return worst;
  };
  auto psi = [&](double x) { return w.psi_radial(std::abs(x)); };
  auto eta = [&](double x) { return WindowSet::eta_radial(std::abs(x)); };
  auto phi = [&](double x) { return w.phi_radial(std::abs(x)); };
  for (auto f : {std::function<double(double)>(psi), std::function<double(double)>(eta),
                 std::function<double(double)>(phi)}) {
    const double a = fourth(f, 2e-3), b = fourth(f, 1e-3);
    CHECK(std::isfinite(a));
    CHECK(b < 2.0 * a + 1.0);
  }
}

TEST_CASE("phi * psi = 1 near the origin") {
  const WindowSet w(1);
  // Composite Gauss rule on the support of phi through a dense midpoint sum.
  const int m = 8192;
  const double h = 0.25 / m;
  for (int s = 0; s < 64; ++s) {
    const double xi = -0.125 + 0.25 * s / 63.0;
    double acc = 0.0;
    for (int l = 0; l < m; ++l) {
      const double eta = -0.125 + (l + 0.5) * h;
      acc += w.phi_radial(std::abs(eta)) * w.psi_radial(std::abs(xi - eta));
    }
    CHECK(std::abs(acc * h - 1.0) <= 1e-8);
  }
}

TEST_CASE("dyadic annuli are disjoint") {
  for (double r = 1e-3; r < 4096.0; r *= 1.0007) {
    for (int j = -10; j < 12; ++j) {
      const double a = WindowSet::eta_radial(std::ldexp(r, -j));
      const double b = WindowSet::eta_radial(std::ldexp(r, -j - 1));
      CHECK(a * b == 0.0);
    }
  }
}

TEST_CASE("Phi and Psi at the origin and symmetry") {
  const WindowSet w(1);
  const std::vector<Point> pts{pt(0.0), pt(3.7), pt(-3.7), pt(41.0), pt(-41.0)};
  const auto phi = w.eval_Phi(pts);
  const auto psi = w.eval_Psi(pts);
  CHECK(std::abs(phi[0] - 1.0 / (2 * kPi)) < 1e-14);
  CHECK(std::abs(psi[0] - 0.75 / (2 * kPi)) < 1e-14);
  CHECK(std::abs(w.psi_mass() - 0.75) < 1e-14);
  CHECK(std::abs(phi[1] - phi[2]) < 1e-13);
  CHECK(std::abs(psi[3] - psi[4]) < 1e-13);
}

TEST_CASE("Psi origin value in two dimensions") {
  const WindowSet w(2);
  const std::vector<Point> pts{pt(0.0, 0.0), pt(2.0, -1.5), pt(-1.5, 2.0)};
  const auto phi = w.eval_Phi(pts);
  const auto psi = w.eval_Psi(pts);
  CHECK(std::abs(phi[0] - 1.0 / std::pow(2 * kPi, 2)) < 1e-12);
  CHECK(std::abs(psi[0] - w.psi_mass() / std::pow(2 * kPi, 2)) < 1e-12);
  CHECK(std::abs(phi[1] - phi[2]) < 1e-13);
  // Tensor quadrature against the independent radial Hankel path.
  CHECK(std::abs(phi[1] - w.Phi(2.5)) < 1e-12);
  CHECK(std::abs(psi[1] - w.Psi(2.5)) < 1e-12);
}

TEST_CASE("interpolation tables match direct quadrature") {
  const WindowSet w(1);
  double worst_phi = 0.0, worst_psi = 0.0;
  std::vector<Point> pts;
  for (double t = 0.0; t < 600.0; t += 0.7331) pts.push_back(pt(t));
  const auto phi = w.eval_Phi(pts);
  const auto psi = w.eval_Psi(pts);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    worst_phi = std::max(worst_phi, std::abs(w.Phi(pts[i][0]) - phi[i]));
    worst_psi = std::max(worst_psi, std::abs(w.Psi(pts[i][0]) - psi[i]));
  }
  CHECK(worst_phi < 1e-14);
  CHECK(worst_psi < 1e-14);
}

TEST_CASE("Psi decay constant") {
  const WindowSet w(1);
  const double c = w.psi_decay_constant();
  CHECK(std::isfinite(c));
  for (double t = 0.0; t < 512.0; t += 0.37) {
    CHECK(std::abs(w.Psi(t)) <= c * std::pow(1.0 + t, -8) * (1.0 + 1e-6) + 1e-16);
  }
}

TEST_CASE("periodic kernel equals the twisted periodization") {
  const WindowSet w(1);
  const double period = 30.0;
  for (double theta : {0.0, 1.3, -2.9}) {
    const PeriodicKernel k(w, Profile::Psi, period, pt(theta));
    for (double t = -15.0; t < 15.0; t += 0.913) {
      Complex direct(0.0);
      for (int m = -120; m <= 120; ++m) direct += std::polar(1.0, theta * m) * w.Psi(t + period * m);
      CHECK(std::abs(k(pt(t)) - direct) < 1e-10);
    }
    std::vector<Complex> row(50, Complex(0.0));
    k.accumulate_1d(-3.0, 0.11, Complex(2.0, -1.0), row);
    for (int i = 0; i < 50; ++i) {
      CHECK(std::abs(row[i] - Complex(2.0, -1.0) * k(pt(-3.0 + 0.11 * i))) < 1e-13);
    }
  }
}

TEST_CASE("B-spline pair") {
  CHECK(bspline_B(pt(0.0)) == 1.0);
  CHECK(bspline_B(pt(1.0)) == 0.0);
  CHECK(bspline_B(pt(0.5, -1.2)) == 0.0);
  CHECK(bspline_B(pt(0.5, 0.5)) == 0.25);
  CHECK(inv_fourier_B(pt(0.0)) == 1.0 / (2 * kPi));
  CHECK(inv_fourier_B(pt(0.0, 0.0)) == doctest::Approx(1.0 / (4 * kPi * kPi)).epsilon(1e-15));

  // Plain box sampling: the discrepancy is the dropped tail of a 1/t^2
  // function, bounded by 4/(pi L).
  const Grid<double> g = make_grid(1, 512.0, 16);
  const Spectrum_d s = fourier(sample(g, [](const Point& t) { return inv_fourier_B(t); }));
  double worst = 0.0;
  for (Index k = 0; k < s.size(); ++k) {
    worst = std::max(worst, std::abs(s.values()[k] - bspline_B(s.fgrid().point(k))));
  }
  CHECK(worst <= 4.0 / (kPi * 512.0));

  // The 2L-periodization is a Fejer kernel when L is a multiple of pi; its
  // samples transform to B exactly on the lattice.
  const double L = 163 * kPi;
  const Grid<double> gp = make_grid(1, L, 16);
  const Field periodized = sample(gp, [&](const Point& t) {
    const double d = std::sin(kPi * t[0] / (2 * L));
    if (std::abs(d) < 1e-300) return 1.0 / (2 * kPi);
    const double ratio = std::sin(0.5 * t[0]) * kPi / (L * d);
    return ratio * ratio / (2 * kPi);
  });
  const Spectrum_d sp = fourier(periodized);
  worst = 0.0;
  for (Index k = 0; k < sp.size(); ++k) {
    worst = std::max(worst, std::abs(sp.values()[k] - bspline_B(sp.fgrid().point(k))));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("Gaussian window") {
  const GaussianWindow gw;
  CHECK(gw(pt(0.0)) == 1.0);
  const SampledWindow sw = gauss_window(make_grid(1, 16.0, 12));
  CHECK(std::abs(sw.energy - std::sqrt(kPi)) < 1e-12 * std::sqrt(kPi));
  const SampledWindow sw2 = gauss_window(make_grid(2, 16.0, 8));
  CHECK(std::abs(sw2.energy - kPi) < 1e-12 * kPi);
  CHECK_THROWS_AS(gauss_window(make_grid(1, 16.0, 6)), GateError);

  const Spectrum_d s = fourier(sw.samples);
  for (Index k = 0; k < s.size(); ++k) {
    const double xi = s.fgrid().frequency(k);
    CHECK(std::abs(s.values()[k] - std::sqrt(2 * kPi) * std::exp(-0.5 * xi * xi)) < 1e-12);
  }
  CHECK(gw.radius() == doctest::Approx(7.43).epsilon(1e-3));
}

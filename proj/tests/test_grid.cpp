#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "modlab/grid.hpp"

using namespace modlab;

TEST_CASE("make_grid spacing and lattice") {
  const Grid<double> g = make_grid(1, 8.0, 18);
  CHECK(g.spacing() == 6.103515625e-5);
  CHECK(g.samples_per_axis() == (1 << 18));

  const Grid<double> tiny = make_grid(1, 1.0, 1);
  CHECK(tiny.point(0)[0] == -1.0);
  CHECK(tiny.point(1)[0] == 0.0);

  const Grid<double> g2 = make_grid(2, 8.0, 8);
  CHECK(g2.size() == 256 * 256);
  CHECK(g2.spacing() == 0.0625);
  CHECK(g2.spacing() * g2.samples_per_axis() == 16.0);
}

TEST_CASE("make_grid rejects bad parameters") {
  CHECK_THROWS_AS(make_grid(1, 0.0, 4), ConfigError);
  CHECK_THROWS_AS(make_grid(1, -2.0, 4), ConfigError);
  CHECK_THROWS_AS(make_grid(1, 1.0, 0), ConfigError);
  CHECK_THROWS_AS(make_grid(1, 1.0, 25), ConfigError);
  CHECK_THROWS_AS(make_grid(0, 1.0, 4), ConfigError);
}

TEST_CASE("row-major layout puts the first axis slowest") {
  const Grid<double> g = make_grid(2, 1.0, 2);
  const Point x = g.point(1);
  CHECK(x[0] == -1.0);
  CHECK(x[1] == -0.5);
  CHECK(g.point(4)[0] == -0.5);
}

TEST_CASE("sample evaluates on the lattice") {
  const Grid<double> g = make_grid(1, 1.0, 2);
  const Field f = sample(g, [](const Point& x) { return x[0]; });
  CHECK(f[0].real() == -1.0);
  CHECK(f[1].real() == -0.5);
  CHECK(f[2].real() == 0.0);
  CHECK(f[3].real() == 0.5);

  const Field one = sample(make_grid(2, 3.0, 3), [](const Point&) { return 1.0; });
  CHECK(one.values().isApproxToConstant(Complex(1.0)));

  const Field gauss =
      sample(make_grid(1, 8.0, 10), [](const Point& x) { return std::exp(-0.5 * x.squaredNorm()); });
  CHECK(max_abs(gauss) == 1.0);
}

TEST_CASE("sample names the non-finite point") {
  const Grid<double> g = make_grid(1, 1.0, 2);
  try {
    sample(g, [](const Point& x) { return 1.0 / x[0]; });
    FAIL("expected a domain error");
  } catch (const std::domain_error& e) {
    CHECK(std::string(e.what()).find("x = (0)") != std::string::npos);
  }
}

TEST_CASE("integrate") {
  CHECK(integrate(sample(make_grid(1, 8.0, 10), [](const Point&) { return 1.0; })).real() == 16.0);

  const Grid<double> g = make_grid(1, 16.0, 14);
  const Field gauss = sample(g, [](const Point& x) { return std::exp(-0.5 * x.squaredNorm()); });
  CHECK(std::abs(integrate(gauss).real() - std::sqrt(2.0 * std::numbers::pi)) < 1e-12);

  const Field odd = sample(g, [](const Point& x) { return x[0] * std::exp(-x[0] * x[0]); });
  CHECK(std::abs(integrate(odd)) < 1e-12);
}

TEST_CASE("integrate is linear and converges under refinement") {
  const Grid<double> g = make_grid(1, 16.0, 12);
  const Field a = sample(g, [](const Point& x) { return std::exp(-x.squaredNorm()); });
  const Field b = sample(g, [](const Point& x) { return std::cos(x[0]) * std::exp(-0.3 * x.squaredNorm()); });
  const Complex s(0.3, -1.2), t(2.5, 0.25);
  const Complex lhs = integrate(s * a + t * b);
  const Complex rhs = s * integrate(a) + t * integrate(b);
  CHECK(std::abs(lhs - rhs) <= 1e-14 * std::abs(rhs));

  auto fn = [](const Point& x) { return std::exp(-0.5 * x.squaredNorm()) * (1.0 + x[0] * x[0]); };
  const Complex coarse = integrate(sample(make_grid(1, 16.0, 10), fn));
  const Complex fine = integrate(sample(make_grid(1, 16.0, 11), fn));
  CHECK(std::abs(coarse - fine) < 1e-10 * std::abs(fine));
}

TEST_CASE("inner product") {
  const Grid<double> g = make_grid(1, 16.0, 14);
  const Field f = sample(g, [](const Point& x) { return std::exp(-0.5 * x.squaredNorm()); });
  CHECK(std::abs(inner_product(f, f).real() - std::sqrt(std::numbers::pi)) < 1e-12);

  const Field left = sample(g, [](const Point& x) { return x[0] < -2 ? 1.0 : 0.0; });
  const Field right = sample(g, [](const Point& x) { return x[0] > 2 ? 1.0 : 0.0; });
  CHECK(inner_product(left, right) == Complex(0.0));

  const Complex ii = inner_product(Complex(0, 1) * f, f);
  CHECK(std::abs(ii - Complex(0, 1) * std::pow(norm_l2(f), 2)) < 1e-14);

  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  ComplexVector va(g.size()), vb(g.size());
  for (Index i = 0; i < g.size(); ++i) {
    va[i] = Complex(nd(rng), nd(rng));
    vb[i] = Complex(nd(rng), nd(rng));
  }
  const Field ra(g, va), rb(g, vb);
  const Complex ab = inner_product(ra, rb), ba = inner_product(rb, ra);
  CHECK(std::abs(ab - std::conj(ba)) <= 1e-14 * std::abs(ab));

  CHECK_THROWS(inner_product(f, sample(make_grid(1, 16.0, 13), [](const Point&) { return 1.0; })));
}

TEST_CASE("fields reject non-finite values") {
  ComplexVector v = ComplexVector::Zero(4);
  v[2] = Complex(std::nan(""), 0.0);
  CHECK_THROWS(Field(make_grid(1, 1.0, 2), v));
  CHECK_THROWS(Field(make_grid(1, 1.0, 2), ComplexVector::Zero(3)));
}

TEST_CASE("pairwise sum is exact on integers") {
  Eigen::VectorXd v(1000);
  for (int i = 0; i < 1000; ++i) v[i] = i;
  CHECK(pairwise_sum(v) == 499500.0);
}

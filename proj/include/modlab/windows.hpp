#pragma once

#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "modlab/grid.hpp"

namespace modlab {

/// The mollifier family. Every smooth cutoff in the library is built from the
/// single bump exp(-1/(1-s^2)) and its normalized antiderivative.
namespace mollifier {

/// exp(-1/(1-s^2)) for |s| < 1, else 0.
double bump(double s);

/// Integral of bump over [-1, v].
double bump_antiderivative(double v);

/// Integral of bump over (-1, 1).
double bump_mass();

/// C-infinity step: 1 for u <= 0, 0 for u >= 1, 1 - G(2u-1)/G(1) in between.
/// Symmetric about u = 1/2 where it equals 1/2 exactly.
double smooth_step(double u);

/// 1 on |t| <= 1/4, 0 on |t| >= 1/2.
double plateau(double t);

/// Integral of r^(n-1) bump(r) over [0, 1].
double radial_moment(int n);

/// Surface measure of the unit sphere in R^n.
double sphere_area(int n);

}  // namespace mollifier

/// Which frequency-side bump a kernel is built from.
enum class Profile { Phi, Psi };

/// Radial functions phi, psi, eta of the counterexample construction, their
/// inverse transforms Phi = F^{-1} phi and Psi = F^{-1} psi, and the
/// supporting B-spline pair.
///
/// Support and plateau constants:
///   supp phi in |xi| <= 1/8, integral of phi = 1;
///   psi = 1 on |xi| <= 1/4, supp psi in |xi| <= 1/2;
///   eta = 1 on 2^{-1/4} <= |xi| <= 2^{1/4}, supp eta in 2^{-1/2} <= |xi| <= 2^{1/2}.
class WindowSet {
 public:
  static constexpr double kPhiRadius = 0.125;
  static constexpr double kPsiRadius = 0.5;
  /// Minimum nodes per axis for the direct quadrature of Phi and Psi; the 1D
  /// rule adds nodes so aliasing never reaches the evaluated radii.
  static constexpr int kQuadratureNodes = 1024;

  explicit WindowSet(int n);

  int dim() const { return n_; }
  double phi_normalization() const { return phi_norm_; }

  double phi(const Point& xi) const { return phi_radial(xi.norm()); }
  double psi(const Point& xi) const { return psi_radial(xi.norm()); }
  double eta(const Point& xi) const { return eta_radial(xi.norm()); }

  double phi_radial(double r) const;
  double psi_radial(double r) const;
  static double eta_radial(double r);
  double profile_radial(Profile which, double r) const {
    return which == Profile::Phi ? phi_radial(r) : psi_radial(r);
  }
  static double profile_radius(Profile which) {
    return which == Profile::Phi ? kPhiRadius : kPsiRadius;
  }

  /// Phi and Psi at arbitrary points by direct quadrature over the compact
  /// frequency support. Throws ConsistencyError if the imaginary residue
  /// exceeds 1e-12 |Phi(0)|.
  std::vector<double> eval_Phi(std::span<const Point> points) const;
  std::vector<double> eval_Psi(std::span<const Point> points) const;

  /// Same values as eval_Phi / eval_Psi at radius |t|, served from a
  /// quadrature-built table with local interpolation.
  double Phi(double r) const { return table(Profile::Phi).value(r); }
  double Psi(double r) const { return table(Profile::Psi).value(r); }
  double kernel(Profile which, double r) const { return table(which).value(r); }

  /// Integral of psi (by the same quadrature as the normalization of phi).
  double psi_mass() const;

  /// Fitted constant C of |Psi(t)| <= C (1+|t|)^{-8} over |t| <= 512.
  double psi_decay_constant() const;

  /// Direct quadrature of a single radial kernel value; the reference path.
  double direct_kernel(Profile which, double r) const;

 private:
  class RadialTable {
   public:
    RadialTable() = default;
    RadialTable(const WindowSet& owner, Profile which);
    double value(double r) const;

   private:
    const WindowSet* owner_ = nullptr;
    Profile which_ = Profile::Phi;
    double extent_ = 0.0;
    std::vector<double> values_;
  };

  const RadialTable& table(Profile which) const;
  std::vector<double> eval_kernel(Profile which, std::span<const Point> points) const;

  int n_;
  double phi_norm_;
  mutable std::once_flag phi_once_, psi_once_;
  mutable RadialTable phi_table_, psi_table_;
};

/// Twisted periodization of Phi or Psi with period P on every axis:
///   K(t) = sum_m exp(i theta.m) Kernel(t + P m)
///        = P^{-n} sum_l profile(nu_l) exp(i nu_l.t),  nu_l = (2 pi l - theta)/P.
/// Band-limited fields built from K are exact on the periodic box, so their
/// DFT reproduces closed-form spectra at the lattice frequencies.
class PeriodicKernel {
 public:
  PeriodicKernel(const WindowSet& windows, Profile which, double period, const Point& twist);

  Complex operator()(const Point& t) const;

  /// out[i] += scale * K(t0 + i*dt) in one dimension.
  void accumulate_1d(double t0, double dt, Complex scale, std::span<Complex> out) const;

  std::size_t node_count() const { return weights_.size(); }

 private:
  int n_;
  std::vector<double> weights_;
  std::vector<Point> nodes_;
};

/// Tensor B-spline of degree 2: product of triangle functions supported on [-1, 1].
double bspline_B(const Point& t);

/// (2 pi)^{-n} prod (sin(t_i/2)/(t_i/2))^2.
double inv_fourier_B(const Point& t);

/// Gaussian window exp(-alpha |t|^2); alpha = 1/2 is the default.
struct GaussianWindow {
  double alpha = 0.5;

  double operator()(const Point& t) const { return std::exp(-alpha * t.squaredNorm()); }
  double value_1d(double t) const { return std::exp(-alpha * t * t); }
  /// Exact ||gamma||^2_{L^2} = (pi / (2 alpha))^{n/2}.
  double energy(int n) const;
  /// Radius beyond which the window is below 1e-12.
  double radius() const;
};

/// The sampled default window with its quadrature energy.
struct SampledWindow {
  Field samples;
  double energy = 0.0;
};

/// Rejects grids with pi/dx < 16; energy is checked against pi^{n/2}.
SampledWindow gauss_window(const Grid<double>& grid, GaussianWindow window = {});

}  // namespace modlab

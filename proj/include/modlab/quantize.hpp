#pragma once

#include <functional>

#include "modlab/spectral.hpp"
#include "modlab/symbols.hpp"

namespace modlab {

/// sigma(X, D) f = sum_j scale_j a_j (eta(2^{-j} D) f). Every term must sit
/// inside the Nyquist margin of the grid.
Field apply_separable(const DyadicSeparableSymbol& S, const Field& f);

/// Discrete adjoint of apply_separable with respect to inner_product:
/// g -> sum_j conj(scale_j) eta(2^{-j} D) (conj(a_j) g).
Field discrete_adjoint(const DyadicSeparableSymbol& S, const Field& g);

/// Largest grid the dense oracle accepts.
inline constexpr Index kDenseMaxPoints = 4096;

/// K(i, k) = (2 pi)^{-n} exp(i x_i.xi_k) sigma(x_i, xi_k) dxi^n, acting on
/// spectra: sigma(X, D) f = K * fourier(f).
class DenseSymbolMatrix {
 public:
  DenseSymbolMatrix(const Grid<double>& grid, const SymbolEvaluator& sigma);

  const Grid<double>& grid() const { return grid_; }
  const Eigen::MatrixXcd& entries() const { return K_; }

  Field apply(const Field& f) const;
  /// Conjugate transpose of f -> K F f under inner_product.
  Field adjoint(const Field& g) const;

 private:
  Grid<double> grid_;
  Eigen::MatrixXcd K_;
};

Field apply_dense(const SymbolEvaluator& sigma, const Field& f);
Field discrete_adjoint(const SymbolEvaluator& sigma, const Field& g);

/// Pointwise evaluator of a separable symbol on its own grid; x must be a
/// grid point.
SymbolEvaluator pointwise(const DyadicSeparableSymbol& S);

}  // namespace modlab

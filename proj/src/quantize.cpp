#include "modlab/quantize.hpp"

#include <cmath>
#include <numbers>

#include "modlab/error.hpp"

namespace modlab {

namespace {

constexpr double kPi = std::numbers::pi;

void require_terms_resolved(const DyadicSeparableSymbol& S) {
  for (const auto& t : S.terms()) {
    if (t.custom_cutoff) continue;
    require_band_limit(S.grid(), std::exp2(t.j + 0.5), "symbol term j=" + std::to_string(t.j));
  }
}

ComplexVector cutoff_samples(const FreqGrid& fg, const SymbolTerm& t) {
  return sample_frequencies(fg, [&t](const Point& xi) { return t.cutoff(xi); });
}

}  // namespace

Field apply_separable(const DyadicSeparableSymbol& S, const Field& f) {
  require_same_grid(S.grid(), f.grid(), "apply_separable");
  require_terms_resolved(S);
  const Spectrum_d fhat = fourier(f);
  ComplexVector out = ComplexVector::Zero(f.size());
  for (const auto& t : S.terms()) {
    const Field part = apply_multiplier_samples(fhat, cutoff_samples(fhat.fgrid(), t));
    out += t.scale * t.profile.values().cwiseProduct(part.values());
  }
  return Field(f.grid(), std::move(out));
}

Field discrete_adjoint(const DyadicSeparableSymbol& S, const Field& g) {
  require_same_grid(S.grid(), g.grid(), "discrete_adjoint");
  require_terms_resolved(S);
  const FreqGrid fg(g.grid());
  ComplexVector out = ComplexVector::Zero(g.size());
  for (const auto& t : S.terms()) {
    const Field weighted(g.grid(), t.profile.values().conjugate().cwiseProduct(g.values()));
    const ComplexVector mult = cutoff_samples(fg, t).conjugate();
    out += std::conj(Complex(t.scale)) * apply_multiplier_samples(fourier(weighted), mult).values();
  }
  return Field(g.grid(), std::move(out));
}

// ---------------------------------------------------------------------------

DenseSymbolMatrix::DenseSymbolMatrix(const Grid<double>& grid, const SymbolEvaluator& sigma)
    : grid_(grid) {
  if (grid.size() > kDenseMaxPoints) {
    throw GateError("dense quantization refuses " + std::to_string(grid.size()) +
                    " points (cap " + std::to_string(kDenseMaxPoints) + ")");
  }
  const FreqGrid fg(grid);
  const double c = fg.cell_volume() / std::pow(2.0 * kPi, grid.dim());
  const Index P = grid.size();
  std::vector<Point> xi(P);
  for (Index k = 0; k < P; ++k) xi[k] = fg.point(k);
  K_.resize(P, P);
  for (Index i = 0; i < P; ++i) {
    const Point x = grid.point(i);
    for (Index k = 0; k < P; ++k) {
      const Complex s = sigma(x, xi[k]);
      if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) {
        throw std::domain_error("symbol is not finite at dense entry (" + std::to_string(i) + ", " +
                                std::to_string(k) + ")");
      }
      K_(i, k) = c * std::polar(1.0, x.dot(xi[k])) * s;
    }
  }
}

Field DenseSymbolMatrix::apply(const Field& f) const {
  require_same_grid(grid_, f.grid(), "dense apply");
  return Field(grid_, K_ * fourier(f).values());
}

Field DenseSymbolMatrix::adjoint(const Field& g) const {
  require_same_grid(grid_, g.grid(), "dense adjoint");
  // <K F f, g> = dx^n g^H K F f, so T* g = F^H K^H g with F^H v = dx^n sum_k e^{i x xi_k} v_k.
  const FreqGrid fg(grid_);
  const ComplexVector v = K_.adjoint() * g.values();
  const double to_inverse = grid_.cell_volume() * std::pow(2.0 * kPi, grid_.dim()) / fg.cell_volume();
  return Field(grid_, to_inverse * inverse_fourier(Spectrum_d(fg, v)).values());
}

Field apply_dense(const SymbolEvaluator& sigma, const Field& f) {
  return DenseSymbolMatrix(f.grid(), sigma).apply(f);
}

Field discrete_adjoint(const SymbolEvaluator& sigma, const Field& g) {
  return DenseSymbolMatrix(g.grid(), sigma).adjoint(g);
}

SymbolEvaluator pointwise(const DyadicSeparableSymbol& S) {
  return [&S](const Point& x, const Point& xi) {
    const Grid<double>& g = S.grid();
    Index flat = 0;
    for (int a = 0; a < g.dim(); ++a) {
      const double u = (x[a] + g.half_extent()) / g.spacing();
      const Index i = static_cast<Index>(std::llround(u));
      if (std::abs(u - static_cast<double>(i)) > 1e-9 || i < 0 || i >= g.samples_per_axis()) {
        throw std::invalid_argument("separable symbol evaluated off its grid");
      }
      flat += i * g.stride(a);
    }
    return S.at(flat, xi);
  };
}

}  // namespace modlab

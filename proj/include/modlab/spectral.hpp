#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "modlab/fft.hpp"
#include "modlab/grid.hpp"

namespace modlab {

/// Frequencies xi_k = pi*k/L, k = -N/2..N/2-1 per axis, stored in the same
/// row-major layout as the source field (index m holds k = m - N/2).
template <typename Real>
class FrequencyGrid {
 public:
  using Point = PointT<Real>;

  FrequencyGrid() = default;
  explicit FrequencyGrid(Grid<Real> source) : source_(std::move(source)) {}

  const Grid<Real>& source() const { return source_; }
  int dim() const { return source_.dim(); }
  Index size() const { return source_.size(); }
  Index samples_per_axis() const { return source_.samples_per_axis(); }

  Real spacing() const { return std::numbers::pi_v<Real> / source_.half_extent(); }
  Real cell_volume() const { return std::pow(spacing(), static_cast<Real>(dim())); }
  Real nyquist() const { return std::numbers::pi_v<Real> / source_.spacing(); }

  Index wavenumber(Index m) const { return m - samples_per_axis() / 2; }
  Real frequency(Index m) const { return static_cast<Real>(wavenumber(m)) * spacing(); }

  Point point(Index flat) const {
    Point xi(dim());
    for (int a = 0; a < dim(); ++a) xi[a] = frequency(source_.axis_index(flat, a));
    return xi;
  }

  friend bool operator==(const FrequencyGrid& a, const FrequencyGrid& b) {
    return a.source_ == b.source_;
  }

 private:
  Grid<Real> source_;
};

template <typename Real>
class Spectrum {
 public:
  using Vector = ComplexVectorT<Real>;

  Spectrum() = default;
  Spectrum(FrequencyGrid<Real> fgrid, Vector values)
      : fgrid_(std::move(fgrid)), values_(std::move(values)) {
    if (values_.size() != fgrid_.size()) {
      throw std::invalid_argument("spectrum value count does not match grid size");
    }
  }

  const FrequencyGrid<Real>& fgrid() const { return fgrid_; }
  const Vector& values() const { return values_; }
  Index size() const { return values_.size(); }

 private:
  FrequencyGrid<Real> fgrid_;
  Vector values_;
};

using Spectrum_d = Spectrum<double>;
using FreqGrid = FrequencyGrid<double>;

namespace detail {

// Sign (-1)^(sum of k_a) over the centred wavenumbers k_a = m_a - N/2.
template <typename Real>
void apply_wavenumber_parity(ComplexVectorT<Real>& data, const Grid<Real>& grid) {
  const Index half = grid.samples_per_axis() / 2;
  const bool flip_all = (half * grid.dim()) & 1;
  apply_checkerboard(data, grid);
  if (flip_all) data = -data;
}

}  // namespace detail

/// Continuous-convention transform F f(xi) = int exp(-i xi.x) f(x) dx sampled
/// at xi_k: dx^n times the DFT with the -L grid offset folded into the phase.
template <typename Real>
Spectrum<Real> fourier(const SampledField<Real>& f) {
  const Grid<Real>& grid = f.grid();
  ComplexVectorT<Real> data = f.values();
  detail::apply_checkerboard(data, grid);
  detail::dft_all_axes(data, grid, /*inverse=*/false);
  detail::apply_wavenumber_parity(data, grid);
  data *= grid.cell_volume();
  return Spectrum<Real>(FrequencyGrid<Real>(grid), std::move(data));
}

/// F^{-1} s(x) = (2 pi)^{-n} int exp(i x.xi) s(xi) dxi on the lattice; exact
/// inverse of fourier().
template <typename Real>
SampledField<Real> inverse_fourier(const Spectrum<Real>& s) {
  const Grid<Real>& grid = s.fgrid().source();
  ComplexVectorT<Real> data = s.values();
  detail::apply_wavenumber_parity(data, grid);
  detail::dft_all_axes(data, grid, /*inverse=*/true);
  detail::apply_checkerboard(data, grid);
  const Real volume = static_cast<Real>(grid.size()) * grid.cell_volume();
  data /= volume;
  return SampledField<Real>(grid, std::move(data));
}

/// Frequency-domain inner product weighted by dxi^n.
template <typename Real>
std::complex<Real> inner_product(const Spectrum<Real>& a, const Spectrum<Real>& b) {
  if (!(a.fgrid() == b.fgrid())) throw std::invalid_argument("spectrum grid mismatch");
  const ComplexVectorT<Real> prod = a.values().cwiseProduct(b.values().conjugate());
  return a.fgrid().cell_volume() * pairwise_sum(prod);
}

/// Evaluate a pointwise function of xi on the frequency lattice.
template <typename Real, typename Fn>
ComplexVectorT<Real> sample_frequencies(const FrequencyGrid<Real>& fgrid, Fn&& m) {
  ComplexVectorT<Real> out(fgrid.size());
  for (Index k = 0; k < fgrid.size(); ++k) {
    out[k] = std::complex<Real>(m(fgrid.point(k)));
    if (!std::isfinite(out[k].real()) || !std::isfinite(out[k].imag())) {
      throw std::domain_error("multiplier is not finite at frequency index " + std::to_string(k));
    }
  }
  return out;
}

/// Multiply an already-transformed spectrum by precomputed multiplier samples
/// and return to x-space.
template <typename Real>
SampledField<Real> apply_multiplier_samples(const Spectrum<Real>& fhat,
                                            const ComplexVectorT<Real>& multiplier) {
  return inverse_fourier(Spectrum<Real>(fhat.fgrid(), fhat.values().cwiseProduct(multiplier)));
}

/// F^{-1}[ m(xi) * F f ].
template <typename Real, typename Fn>
SampledField<Real> apply_multiplier(const SampledField<Real>& f, Fn&& m) {
  const Spectrum<Real> fhat = fourier(f);
  return apply_multiplier_samples(fhat, sample_frequencies(fhat.fgrid(), std::forward<Fn>(m)));
}

/// Fraction of the per-axis Nyquist frequency any band-limited construction
/// may occupy.
inline constexpr double kNyquistMargin = 0.8;

/// Throws GateError when content up to |xi| = max_frequency would come within
/// the Nyquist margin of the grid.
template <typename Real>
void require_band_limit(const Grid<Real>& grid, Real max_frequency, const std::string& what) {
  const Real limit = Real(kNyquistMargin) * std::numbers::pi_v<Real> / grid.spacing();
  if (!(max_frequency <= limit)) {
    throw GateError("Nyquist margin violated by " + what + ": content up to " +
                    std::to_string(static_cast<double>(max_frequency)) + " exceeds " +
                    std::to_string(static_cast<double>(limit)) + " on grid " + grid.describe());
  }
}

}  // namespace modlab

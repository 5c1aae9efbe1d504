#pragma once

#include <vector>

#include <unsupported/Eigen/FFT>

#include "modlab/grid.hpp"

namespace modlab::detail {

/// Makes the FFTW planner safe for concurrent use; idempotent.
void init_fft_threading();

/// Unscaled in-place DFT along every axis of a row-major n-D array.
/// Forward uses exp(-2 pi i r s / N), inverse exp(+2 pi i r s / N).
template <typename Real>
void dft_all_axes(ComplexVectorT<Real>& data, const Grid<Real>& grid, bool inverse) {
  init_fft_threading();
  thread_local Eigen::FFT<Real> engine = [] {
    Eigen::FFT<Real> e;
    e.SetFlag(Eigen::FFT<Real>::Unscaled);
    return e;
  }();
  using Complex = std::complex<Real>;
  const Index n = grid.samples_per_axis();
  if (grid.dim() == 1) {
    std::vector<Complex> in(data.data(), data.data() + n);
    std::vector<Complex> out(n);
    if (inverse) engine.inv(out, in); else engine.fwd(out, in);
    std::copy(out.begin(), out.end(), data.data());
    return;
  }
  std::vector<Complex> in(n), out(n);
  for (int axis = 0; axis < grid.dim(); ++axis) {
    const Index stride = grid.stride(axis);
    const Index lines = grid.size() / n;
    for (Index line = 0; line < lines; ++line) {
      // Decompose the line number into (outer, inner) around the axis.
      const Index inner = line % stride;
      const Index outer = line / stride;
      const Index base = outer * stride * n + inner;
      for (Index r = 0; r < n; ++r) in[r] = data[base + r * stride];
      if (inverse) engine.inv(out, in); else engine.fwd(out, in);
      for (Index r = 0; r < n; ++r) data[base + r * stride] = out[r];
    }
  }
}

/// (-1)^(sum of axis indices), the checkerboard that recenters a DFT.
template <typename Real>
void apply_checkerboard(ComplexVectorT<Real>& data, const Grid<Real>& grid) {
  for (Index i = 0; i < data.size(); ++i) {
    Index parity = 0;
    for (int a = 0; a < grid.dim(); ++a) parity += grid.axis_index(i, a);
    if (parity & 1) data[i] = -data[i];
  }
}

}  // namespace modlab::detail

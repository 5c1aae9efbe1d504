#pragma once

#include <cstdint>

#include "modlab/spectral.hpp"
#include "modlab/symbols.hpp"

namespace modlab {

/// |k'|^{-n/q - epsilon}
double family_coefficient(const Point& k, const CounterexampleParams& prm);

/// 2^{j(1 - delta)}, the modulation of f before dilation.
inline double family_modulation(int j, const CounterexampleParams& prm) {
  return std::exp2(j * (1.0 - prm.delta));
}

/// Sampling variable of the family builders.
enum class Variable {
  /// f(x) itself on the grid.
  plain,
  /// f(2^{j delta} x): the grid is the x-side of the dilation.
  dilated,
};

/// f_j(x) = sum_{0<|k'|<=2^{j delta}} |k'|^{-n/q-eps} exp(i k'.(x-k')) Psi(x-k').
///
/// Without a cut the sum is periodized over the grid box (twisted periodic
/// kernels), so the samples are exactly band-limited and their DFT is the
/// closed-form transform. With a cut, Psi is hard-truncated at that radius
/// and the periodic images are summed directly.
Field build_f(int j, const CounterexampleParams& prm, const Grid<double>& grid,
              const WindowSet& windows, Variable var = Variable::plain,
              Truncation cut = std::nullopt);

/// M_{2^{j(1-delta)} e1} f_j on the grid (plain variable).
Field build_modulated_f(int j, const CounterexampleParams& prm, const Grid<double>& grid,
                        const WindowSet& windows);

/// F[M_{2^{j(1-delta)} e1} f_j](xi) at the lattice frequencies.
Spectrum_d fhat_closed_form(int j, const CounterexampleParams& prm, const FreqGrid& fgrid,
                            const WindowSet& windows);

/// u_j(x) = exp(i 2^j x1) f_j(2^{j delta} x). Requires 2^j lattice-aligned
/// (2^j L / pi integral), else GateError.
Field build_input(int j, const CounterexampleParams& prm, const Grid<double>& grid,
                  const WindowSet& windows, Truncation cut = std::nullopt);

/// g_j = sum_{k, k'} |k'|^{-n/q-eps} exp(-i k.(x-k)) exp(i k'.(x-k')) Phi(x-k) Psi(x-k')
/// as a literal blocked double sum, Psi terms periodized like build_f and Phi
/// terms taken on the line (as in x_profile).
Field build_g(int j, const CounterexampleParams& prm, const Grid<double>& grid,
              const WindowSet& windows, Variable var = Variable::plain);

/// 2^{jm} exp(i 2^j x1) g_j(2^{j delta} x).
Field closed_form_action(int j, const CounterexampleParams& prm, const Grid<double>& grid,
                         const WindowSet& windows);

/// Fraction of the spectral energy of f inside 2^{j-1/4} <= |xi| <= 2^{j+1/4}.
double shell_energy_fraction(const Field& f, int j);

struct PairingTerms {
  /// Diagonal term by its closed-form sum, C_n 2^{-j delta n} sum |k|^{-n/q-eps} prod sinc^2.
  double I = 0.0;
  /// The same diagonal term by quadrature of its defining integrals.
  double I_quadrature = 0.0;
  /// Cross terms k != k' summed over the evaluated pairs.
  Complex II{0.0, 0.0};
  /// Largest single cross-pair integral (weighted by its coefficient).
  double II_max_pair = 0.0;
  std::size_t pairs_evaluated = 0;
  std::size_t pairs_total = 0;
};

/// (2 pi)^{-2n}
double pairing_constant(int n);

/// Diagonal and cross terms of the B-spline pairing of g_j(2^{j delta} .).
/// Cross pairs are all evaluated when there are at most 256, else 50 pairs
/// are drawn with the given seed. Quadrature is one-dimensional.
PairingTerms pairing_terms(int j, const CounterexampleParams& prm, const WindowSet& windows,
                           std::uint64_t seed = 0x5EED);

}  // namespace modlab

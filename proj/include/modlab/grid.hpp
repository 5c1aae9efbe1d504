#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>

#include <Eigen/Core>

#include "modlab/error.hpp"

namespace modlab {

using Index = Eigen::Index;

/// Dimensions beyond this are rejected; points live on the stack.
inline constexpr int kMaxDim = 8;

template <typename Real>
using PointT = Eigen::Matrix<Real, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;

template <typename Real>
using ComplexVectorT = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

namespace detail {

template <typename Derived>
typename Derived::Scalar pairwise_range(const Derived& v, Index begin, Index end) {
  constexpr Index kBlock = 64;
  if (end - begin <= kBlock) {
    typename Derived::Scalar acc(0);
    for (Index i = begin; i < end; ++i) acc += v.coeff(i);
    return acc;
  }
  const Index mid = begin + (end - begin) / 2;
  return pairwise_range(v, begin, mid) + pairwise_range(v, mid, end);
}

}  // namespace detail

/// Deterministic pairwise (tree) summation; the split points depend only on
/// the length, so the result never depends on scheduling.
template <typename Derived>
typename Derived::Scalar pairwise_sum(const Eigen::DenseBase<Derived>& v) {
  return detail::pairwise_range(v.derived(), 0, v.size());
}

/// Uniform lattice x_i = -L + i*dx, i = 0..N-1 per axis, on the centered box
/// [-L, L)^n. N is a power of two and dx = 2L/N.
template <typename Real>
class Grid {
 public:
  using Point = PointT<Real>;

  Grid() = default;

  Grid(int dim, Real half_extent, int log2_samples) {
    if (dim < 1 || dim > kMaxDim) {
      throw ConfigError("grid dimension must lie in [1, " + std::to_string(kMaxDim) + "]");
    }
    if (!(half_extent > Real(0)) || !std::isfinite(static_cast<double>(half_extent))) {
      throw ConfigError("grid half-extent L must be positive and finite");
    }
    if (log2_samples < 1 || log2_samples > 24) {
      throw ConfigError("log2 of samples per axis must lie in [1, 24]");
    }
    if (static_cast<std::int64_t>(log2_samples) * dim > 30) {
      throw ConfigError("grid has more than 2^30 points");
    }
    dim_ = dim;
    half_extent_ = half_extent;
    log2_samples_ = log2_samples;
    samples_ = Index(1) << log2_samples;
    spacing_ = Real(2) * half_extent / static_cast<Real>(samples_);
    size_ = Index(1) << (log2_samples * dim);
  }

  int dim() const { return dim_; }
  Real half_extent() const { return half_extent_; }
  int log2_samples() const { return log2_samples_; }
  Index samples_per_axis() const { return samples_; }
  Real spacing() const { return spacing_; }
  Index size() const { return size_; }
  Real cell_volume() const { return std::pow(spacing_, static_cast<Real>(dim_)); }

  Real coordinate(Index i) const { return -half_extent_ + static_cast<Real>(i) * spacing_; }

  /// Per-axis index of a flat row-major index; axis 0 is the slowest.
  Index axis_index(Index flat, int axis) const {
    const int shift = log2_samples_ * (dim_ - 1 - axis);
    return (flat >> shift) & (samples_ - 1);
  }

  Point point(Index flat) const {
    Point x(dim_);
    for (int a = 0; a < dim_; ++a) x[a] = coordinate(axis_index(flat, a));
    return x;
  }

  /// Stride between consecutive samples along an axis in the flat layout.
  Index stride(int axis) const { return Index(1) << (log2_samples_ * (dim_ - 1 - axis)); }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.dim_ == b.dim_ && a.half_extent_ == b.half_extent_ &&
           a.log2_samples_ == b.log2_samples_;
  }

  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    os << "n=" << dim_ << ",L=" << half_extent_ << ",log2_N=" << log2_samples_;
    return os.str();
  }

 private:
  int dim_ = 1;
  Real half_extent_ = Real(1);
  int log2_samples_ = 1;
  Index samples_ = 2;
  Real spacing_ = Real(1);
  Index size_ = 2;
};

/// Complex samples on a grid, row-major with axis 0 slowest. Immutable.
template <typename Real>
class SampledField {
 public:
  using Complex = std::complex<Real>;
  using Vector = ComplexVectorT<Real>;

  SampledField() = default;

  SampledField(Grid<Real> grid, Vector values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
      throw std::invalid_argument("field value count does not match grid size");
    }
    for (Index i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i].real()) || !std::isfinite(values_[i].imag())) {
        throw std::invalid_argument("field sample " + std::to_string(i) + " is not finite");
      }
    }
  }

  static SampledField zeros(const Grid<Real>& grid) {
    return SampledField(grid, Vector::Zero(grid.size()));
  }

  const Grid<Real>& grid() const { return grid_; }
  const Vector& values() const { return values_; }
  Complex operator[](Index i) const { return values_[i]; }
  Index size() const { return values_.size(); }

 private:
  Grid<Real> grid_;
  Vector values_;
};

using Field = SampledField<double>;
using Point = PointT<double>;
using Complex = std::complex<double>;
using ComplexVector = ComplexVectorT<double>;

inline Grid<double> make_grid(int n, double half_extent, int log2_samples) {
  return Grid<double>(n, half_extent, log2_samples);
}

template <typename Real>
void require_same_grid(const Grid<Real>& a, const Grid<Real>& b, const char* what) {
  if (!(a == b)) {
    throw std::invalid_argument(std::string(what) + ": grid mismatch (" + a.describe() + " vs " +
                                b.describe() + ")");
  }
}

/// values[i] = f(x_i). f may return a real or complex value.
template <typename Real, typename Fn>
SampledField<Real> sample(const Grid<Real>& grid, Fn&& f) {
  using Complex = std::complex<Real>;
  ComplexVectorT<Real> values(grid.size());
  for (Index i = 0; i < grid.size(); ++i) {
    const auto x = grid.point(i);
    const Complex v = Complex(f(x));
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      std::ostringstream os;
      os.precision(17);
      os << "sampled function is not finite at x = (";
      for (int a = 0; a < grid.dim(); ++a) os << (a ? ", " : "") << x[a];
      os << ")";
      throw std::domain_error(os.str());
    }
    values[i] = v;
  }
  return SampledField<Real>(grid, std::move(values));
}

/// Left-endpoint Riemann sum dx^n * sum(values).
template <typename Real>
std::complex<Real> integrate(const SampledField<Real>& field) {
  return field.grid().cell_volume() * pairwise_sum(field.values());
}

/// (f, g) = integral of f * conj(g).
template <typename Real>
std::complex<Real> inner_product(const SampledField<Real>& f, const SampledField<Real>& g) {
  require_same_grid(f.grid(), g.grid(), "inner_product");
  const ComplexVectorT<Real> prod = f.values().cwiseProduct(g.values().conjugate());
  return f.grid().cell_volume() * pairwise_sum(prod);
}

template <typename Real>
Real norm_l2(const SampledField<Real>& f) {
  const Eigen::Matrix<Real, Eigen::Dynamic, 1> sq = f.values().cwiseAbs2();
  return std::sqrt(f.grid().cell_volume() * pairwise_sum(sq));
}

template <typename Real>
Real max_abs(const SampledField<Real>& f) {
  return f.size() ? f.values().cwiseAbs().maxCoeff() : Real(0);
}

template <typename Real>
SampledField<Real> operator+(const SampledField<Real>& a, const SampledField<Real>& b) {
  require_same_grid(a.grid(), b.grid(), "field sum");
  return SampledField<Real>(a.grid(), a.values() + b.values());
}

template <typename Real>
SampledField<Real> operator-(const SampledField<Real>& a, const SampledField<Real>& b) {
  require_same_grid(a.grid(), b.grid(), "field difference");
  return SampledField<Real>(a.grid(), a.values() - b.values());
}

template <typename Real>
SampledField<Real> operator*(std::complex<Real> s, const SampledField<Real>& a) {
  return SampledField<Real>(a.grid(), s * a.values());
}

/// Pointwise product.
template <typename Real>
SampledField<Real> multiply(const SampledField<Real>& a, const SampledField<Real>& b) {
  require_same_grid(a.grid(), b.grid(), "field product");
  return SampledField<Real>(a.grid(), a.values().cwiseProduct(b.values()));
}

template <typename Real>
SampledField<Real> conj(const SampledField<Real>& a) {
  return SampledField<Real>(a.grid(), a.values().conjugate());
}

/// Relative L2 distance ||a - b|| / ||b||.
template <typename Real>
Real relative_l2(const SampledField<Real>& a, const SampledField<Real>& b) {
  const Real denom = norm_l2(b);
  return norm_l2(a - b) / (denom > Real(0) ? denom : Real(1));
}

}  // namespace modlab

#include "modlab/tfa.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace modlab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr Index kMaxSpectrogramEntries = Index(1) << 26;

std::vector<Index> all_centers(const StftPlan& plan) {
  std::vector<Index> out(plan.center_count());
  for (Index a = 0; a < plan.center_count(); ++a) out[a] = a;
  return out;
}

// Centers of `big` that are not centers of `small` (both share the step and
// their lattices are nested).
std::vector<Index> extra_centers(const StftPlan& big, const StftPlan& small) {
  std::vector<Index> out;
  for (Index a = 0; a < big.center_count(); ++a) {
    const Point c = big.center(a);
    bool inside = true;
    for (int d = 0; d < c.size(); ++d) inside = inside && std::abs(c[d]) <= small.extent() + 1e-12;
    if (!inside) out.push_back(a);
  }
  return out;
}

}  // namespace

MixedNormParams::MixedNormParams(double p_, double q_) : p(p_), q(q_) {
  if (!(p > 1.0) || !std::isfinite(p) || !(q > 1.0) || !std::isfinite(q)) {
    throw ConfigError("mixed-norm exponents must satisfy 1 < p, q < inf");
  }
}

// ---------------------------------------------------------------------------

StftPlan::StftPlan(const Grid<double>& grid, double step, GaussianWindow window,
                   std::optional<double> extent)
    : grid_(grid), window_(window), step_(step) {
  if (!(step > 0.0)) throw ConfigError("STFT step must be positive");
  if (step > 0.5 * window.radius()) {
    throw ConfigError("STFT step exceeds half the window radius");
  }
  extent_ = extent.value_or(grid.half_extent() + window.radius());
  if (!(extent_ > 0.0)) throw ConfigError("STFT lattice extent must be positive");
  const long half = static_cast<long>(std::floor(extent_ / step + 1e-9));
  for (long a = -half; a <= half; ++a) axis_centers_.push_back(static_cast<double>(a) * step);
}

Index StftPlan::center_count() const {
  Index count = 1;
  for (int d = 0; d < grid_.dim(); ++d) count *= static_cast<Index>(axis_centers_.size());
  return count;
}

Point StftPlan::center(Index flat) const {
  const Index m = static_cast<Index>(axis_centers_.size());
  Point c(grid_.dim());
  for (int d = grid_.dim() - 1; d >= 0; --d) {
    c[d] = axis_centers_[flat % m];
    flat /= m;
  }
  return c;
}

StftPlan StftPlan::extended(double factor) const {
  return StftPlan(grid_, step_, window_, extent_ * factor);
}

StftPlan StftPlan::refined() const { return StftPlan(grid_, 0.5 * step_, window_, extent_); }

std::string StftPlan::fingerprint() const {
  std::ostringstream os;
  os.precision(17);
  os << grid_.describe() << ",s_x=" << step_ << ",extent=" << extent_
     << ",alpha=" << window_.alpha;
  return os.str();
}

Spectrogram::Spectrogram(StftPlan plan, Eigen::MatrixXcd values)
    : plan_(std::move(plan)), values_(std::move(values)) {
  if (values_.rows() != plan_.center_count() || values_.cols() != plan_.grid().size()) {
    throw std::invalid_argument("spectrogram shape does not match its plan");
  }
}

// ---------------------------------------------------------------------------

void stft_rows(const Field& f, const StftPlan& plan, std::span<const Index> centers,
               const std::function<void(Index, const ComplexVector&)>& emit) {
  require_same_grid(f.grid(), plan.grid(), "stft");
  const Grid<double>& grid = plan.grid();
  const int n = grid.dim();
  const double alpha = plan.window().alpha;
  // Window factors per axis are separable: gamma(t - c) = prod_d exp(-alpha (t_d - c_d)^2).
  // Samples beyond the cut radius are below 1e-17 and set to zero.
  const double cut = std::sqrt(std::log(1e17) / alpha);
  const Index samples = grid.samples_per_axis();
  const double dx = grid.spacing();
  std::vector<Eigen::ArrayXd> factors(n, Eigen::ArrayXd::Zero(samples));
  for (Index a : centers) {
    const Point c = plan.center(a);
    for (int d = 0; d < n; ++d) {
      factors[d].setZero();
      const Index lo = std::clamp<Index>(
          static_cast<Index>(std::ceil((c[d] - cut - grid.coordinate(0)) / dx)), 0, samples);
      const Index hi = std::clamp<Index>(
          static_cast<Index>(std::floor((c[d] + cut - grid.coordinate(0)) / dx)) + 1, lo, samples);
      if (hi > lo) {
        const Eigen::ArrayXd t = Eigen::ArrayXd::LinSpaced(hi - lo, grid.coordinate(lo), grid.coordinate(hi - 1));
        factors[d].segment(lo, hi - lo) = (-alpha * (t - c[d]).square()).exp();
      }
    }
    ComplexVector product(grid.size());
    if (n == 1) {
      product = f.values().array() * factors[0].cast<Complex>();
    } else {
      for (Index i = 0; i < grid.size(); ++i) {
        double w = 1.0;
        for (int d = 0; d < n; ++d) w *= factors[d][grid.axis_index(i, d)];
        product[i] = f[i] * w;
      }
    }
    emit(a, fourier(Field(grid, std::move(product))).values());
  }
}

Spectrogram stft(const Field& f, const StftPlan& plan) {
  const Index rows = plan.center_count(), cols = plan.grid().size();
  if (rows * cols > kMaxSpectrogramEntries) {
    throw GateError("spectrogram too large to materialize: " + plan.fingerprint());
  }
  Eigen::MatrixXcd values(rows, cols);
  const auto centers = all_centers(plan);
  stft_rows(f, plan, centers, [&](Index a, const ComplexVector& row) { values.row(a) = row.transpose(); });
  return Spectrogram(plan, std::move(values));
}

MixedNormAccumulator::MixedNormAccumulator(const StftPlan& plan, double p)
    : p_(p),
      weight_(std::pow(plan.step(), plan.grid().dim())),
      dxi_volume_(FreqGrid(plan.grid()).cell_volume()),
      inner_(Eigen::ArrayXd::Zero(plan.grid().size())) {}

void MixedNormAccumulator::add(const ComplexVector& row) {
  if (p_ == 2.0) {
    inner_ += weight_ * row.array().abs2();
  } else {
    const Eigen::ArrayXd a2 = row.array().abs2();
    inner_ += weight_ * (a2 > 0.0).select((a2.log() * (0.5 * p_)).exp(), 0.0);
  }
}

void MixedNormAccumulator::merge(const MixedNormAccumulator& other, double scale) {
  inner_ += scale * other.inner_;
}

double MixedNormAccumulator::finish(double q) const {
  const Eigen::ArrayXd outer = (inner_ > 0.0).select((inner_.log() * (q / p_)).exp(), 0.0);
  return std::pow(dxi_volume_ * pairwise_sum(outer.matrix()), 1.0 / q);
}

double mixed_norm(const Spectrogram& s, const MixedNormParams& prm) {
  MixedNormAccumulator acc(s.plan(), prm.p);
  for (Index a = 0; a < s.rows(); ++a) acc.add(s.values().row(a).transpose());
  return acc.finish(prm.q);
}

double mpq_norm_unchecked(const Field& f, const MixedNormParams& prm, const StftPlan& plan) {
  MixedNormAccumulator acc(plan, prm.p);
  const auto centers = all_centers(plan);
  stft_rows(f, plan, centers, [&](Index, const ComplexVector& row) { acc.add(row); });
  return acc.finish(prm.q);
}

NormEstimate mpq_norm_checked(const Field& f, const MixedNormParams& prm, const StftPlan& plan) {
  NormEstimate out;
  MixedNormAccumulator base(plan, prm.p);
  const auto centers = all_centers(plan);
  stft_rows(f, plan, centers, [&](Index, const ComplexVector& row) { base.add(row); });
  out.value = base.finish(prm.q);
  if (out.value == 0.0) return out;

  // Extension reuses every base row; only the new outer centers are computed.
  const StftPlan wide = plan.extended(1.25);
  MixedNormAccumulator ext(wide, prm.p);
  const auto outer = extra_centers(wide, plan);
  stft_rows(f, wide, outer, [&](Index, const ComplexVector& row) { ext.add(row); });
  ext.merge(base);
  out.extension_delta = std::abs(ext.finish(prm.q) - out.value) / out.value;

  // Halved step: base centers are every other fine center, so only the new
  // ones are transformed and the base sums are rescaled to the finer weight.
  const StftPlan fine = plan.refined();
  MixedNormAccumulator refined(fine, prm.p);
  std::vector<Index> midpoints;
  for (Index a = 0; a < fine.center_count(); ++a) {
    const Point c = fine.center(a);
    bool on_base = true;
    for (int d = 0; d < c.size(); ++d) {
      on_base = on_base && std::abs(std::remainder(c[d], plan.step())) < 1e-12;
    }
    if (!on_base) midpoints.push_back(a);
  }
  stft_rows(f, fine, midpoints, [&](Index, const ComplexVector& row) { refined.add(row); });
  refined.merge(base, std::pow(0.5, f.grid().dim()));
  out.refinement_delta = std::abs(refined.finish(prm.q) - out.value) / out.value;

  if (out.extension_delta > kExtensionTolerance) {
    throw GateError("truncation gate: extending the STFT lattice by 25% changed the norm by " +
                    std::to_string(100.0 * out.extension_delta) + "% on " + plan.fingerprint());
  }
  if (out.refinement_delta > kRefinementTolerance) {
    throw GateError("refinement gate: halving the STFT step changed the norm by " +
                    std::to_string(100.0 * out.refinement_delta) + "% on " + plan.fingerprint());
  }
  return out;
}

double mpq_norm(const Field& f, const MixedNormParams& prm, const StftPlan& plan) {
  return mpq_norm_checked(f, prm, plan).value;
}

// ---------------------------------------------------------------------------

double moyal_constant(int n) { return std::pow(2.0 * kPi, n); }

double moyal_constant_oracle(int n) {
  if (n < 1 || n > 2) throw ConfigError("the Moyal oracle runs in one or two dimensions");
  const int log2_N = n == 1 ? 8 : 4;
  const double L = n == 1 ? 16.0 : 4.0;
  const Grid<double> grid = make_grid(n, L, log2_N);
  const GaussianWindow gamma;
  // A smooth off-center test function with a nontrivial phase.
  const Field f = sample(grid, [](const Point& x) {
    return std::exp(-0.7 * (x.array() - 0.3).square().sum()) * std::polar(1.0, 1.1 * x.sum());
  });
  const FreqGrid fg(grid);
  const StftPlan plan(grid, 0.25, gamma);
  const Index m = grid.samples_per_axis();
  const auto& centers = plan.axis_centers();
  const Index mc = static_cast<Index>(centers.size());
  double total = 0.0;
  if (n == 1) {
    for (Index a = 0; a < mc; ++a) {
      for (Index k = 0; k < m; ++k) {
        Complex v(0.0);
        for (Index i = 0; i < m; ++i) {
          const double t = grid.coordinate(i);
          v += f[i] * gamma.value_1d(t - centers[a]) * std::polar(1.0, -fg.frequency(k) * t);
        }
        total += std::norm(v * grid.spacing());
      }
    }
  } else {
    // Direct double sum with the inner axis summed first.
    Eigen::MatrixXcd inner(m, mc * m);
    for (Index i0 = 0; i0 < m; ++i0) {
      for (Index c1 = 0; c1 < mc; ++c1) {
        for (Index k1 = 0; k1 < m; ++k1) {
          Complex v(0.0);
          for (Index i1 = 0; i1 < m; ++i1) {
            const double t = grid.coordinate(i1);
            v += f[i0 * m + i1] * gamma.value_1d(t - centers[c1]) * std::polar(1.0, -fg.frequency(k1) * t);
          }
          inner(i0, c1 * m + k1) = v;
        }
      }
    }
    for (Index c0 = 0; c0 < mc; ++c0) {
      for (Index k0 = 0; k0 < m; ++k0) {
        for (Index j = 0; j < mc * m; ++j) {
          Complex v(0.0);
          for (Index i0 = 0; i0 < m; ++i0) {
            const double t = grid.coordinate(i0);
            v += inner(i0, j) * gamma.value_1d(t - centers[c0]) * std::polar(1.0, -fg.frequency(k0) * t);
          }
          total += std::norm(v * grid.cell_volume());
        }
      }
    }
  }
  total *= std::pow(plan.step(), n) * fg.cell_volume();
  const double f2 = std::pow(norm_l2(f), 2);
  return total / (gamma.energy(n) * f2) / moyal_constant(n);
}

Complex moyal_pairing(const Field& f, const Field& g, const StftPlan& plan) {
  require_same_grid(f.grid(), g.grid(), "moyal_pairing");
  const auto centers = all_centers(plan);
  std::vector<ComplexVector> rows_f;
  rows_f.reserve(centers.size());
  stft_rows(f, plan, centers, [&](Index, const ComplexVector& row) { rows_f.push_back(row); });
  Eigen::VectorXcd per_center(plan.center_count());
  stft_rows(g, plan, centers, [&](Index a, const ComplexVector& row) {
    per_center[a] = pairwise_sum(rows_f[a].cwiseProduct(row.conjugate()));
  });
  const double weight = std::pow(plan.step(), plan.grid().dim()) * FreqGrid(plan.grid()).cell_volume();
  return weight * pairwise_sum(per_center) / (moyal_constant(plan.grid().dim()) * plan.window_energy());
}

// ---------------------------------------------------------------------------

BsplineNormCache::BsplineNormCache(std::optional<std::filesystem::path> file, BsplinePlanSpec spec)
    : file_(std::move(file)), spec_(spec) {}

double BsplineNormCache::compute_1d(const MixedNormParams& prm, const BsplinePlanSpec& spec) {
  const Grid<double> grid = make_grid(1, spec.L, spec.log2_N);
  const Field g = sample(grid, [](const Point& t) { return inv_fourier_B(t); });
  return mpq_norm(g, prm.conjugate(), StftPlan(grid, spec.step));
}

double BsplineNormCache::dual_norm(const MixedNormParams& prm, int n) {
  const std::lock_guard<std::mutex> lock(mutex_);
  const auto key = std::make_pair(prm.p, prm.q);
  auto it = memo_.find(key);
  if (it == memo_.end()) it = memo_.emplace(key, lookup_1d(prm)).first;
  return std::pow(it->second, n);
}

double BsplineNormCache::lookup_1d(const MixedNormParams& prm) {
  using nlohmann::json;
  auto matches = [&](const json& j) {
    return j.at("p").get<double>() == prm.p && j.at("q").get<double>() == prm.q;
  };
  if (file_ && std::filesystem::exists(*file_)) {
    std::ifstream in(*file_);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw ConsistencyError("unreadable B-spline norm cache " + file_->string() + ": " + e.what());
    }
    if (j.at("L").get<double>() != spec_.L || j.at("log2_N").get<int>() != spec_.log2_N ||
        j.at("s_x").get<double>() != spec_.step) {
      throw ConsistencyError("B-spline norm cache " + file_->string() +
                             " was computed on a different plan");
    }
    if (matches(j)) return j.at("value").get<double>();
  }
  const double value = compute_1d(prm, spec_);
  if (file_) {
    json j{{"p", prm.p}, {"q", prm.q}, {"L", spec_.L}, {"log2_N", spec_.log2_N},
           {"s_x", spec_.step}, {"value", value}};
    const auto tmp = std::filesystem::path(file_->string() + ".tmp");
    {
      std::ofstream out(tmp);
      out << std::setprecision(17) << j.dump(2) << "\n";
    }
    std::filesystem::rename(tmp, *file_);
  }
  return value;
}

double bspline_lower_bound(const Field& f, const MixedNormParams& prm, const StftPlan& plan,
                           BsplineNormCache& cache, double omega) {
  const Grid<double>& grid = f.grid();
  const Field test = sample(grid, [&](const Point& t) {
    return inv_fourier_B(t) * std::polar(1.0, omega * t[0]);
  });
  const double pairing = std::abs(inner_product(f, test));
  const double kappa = moyal_constant(grid.dim()) * plan.window_energy();
  return kappa * pairing / cache.dual_norm(prm, grid.dim());
}

}  // namespace modlab

#pragma once

// Periodic-grid approximation of functions on R^d.
//
// The domain is the box [-L, L)^d with L = pi*M for an integer M, sampled on
// n points per axis. The frequency lattice is {-n/2, ..., n/2-1} * (1/M), so a
// unit frequency cube holds exactly M lattice points per axis.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "modnls/error.hpp"
#include "modnls/fft.hpp"

namespace modnls {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct GridSpec {
  int d = 1;   ///< spatial dimension
  int M = 4;   ///< L = pi * M
  int n = 64;  ///< points per axis

  double L() const { return std::numbers::pi * M; }
  double h() const { return 2.0 * L() / n; }
  double cell_volume() const { return std::pow(h(), d); }
  /// Frequency spacing pi/L.
  double dxi() const { return 1.0 / M; }
  std::size_t size() const {
    std::size_t s = 1;
    for (int i = 0; i < d; ++i) s *= static_cast<std::size_t>(n);
    return s;
  }
  /// Largest |xi_i| represented on the lattice (the Nyquist frequency).
  double nyquist() const { return 0.5 * n * dxi(); }

  /// DFT index -> signed lattice index in [-n/2, n/2).
  int signed_index(int j) const { return j < n / 2 ? j : j - n; }
  int wrap_index(int s) const { return ((s % n) + n) % n; }

  /// Row-major unravel; axis 0 varies slowest.
  void unravel(std::size_t flat, std::span<int> idx) const {
    for (int a = d - 1; a >= 0; --a) {
      idx[static_cast<std::size_t>(a)] = static_cast<int>(flat % static_cast<std::size_t>(n));
      flat /= static_cast<std::size_t>(n);
    }
  }
  std::size_t ravel(std::span<const int> idx) const {
    std::size_t flat = 0;
    for (int a = 0; a < d; ++a) flat = flat * static_cast<std::size_t>(n) + static_cast<std::size_t>(idx[static_cast<std::size_t>(a)]);
    return flat;
  }

  double coordinate(int j) const { return -L() + j * h(); }
  double frequency(int j) const { return signed_index(j) * dxi(); }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

inline bool is_power_of_two(long long n) { return n >= 1 && (n & (n - 1)) == 0; }

/// Validates and builds a grid. L must be an integer multiple M >= 4 of pi.
inline GridSpec make_grid(int d, double L, int n) {
  if (d < 1) throw Error("grid dimension must be >= 1");
  if (!is_power_of_two(n)) throw Error("grid size n=" + std::to_string(n) + " is not a power of two");
  if (!(L > 0) || !std::isfinite(L)) throw Error("half-period L must be positive and finite");
  const double ratio = L / std::numbers::pi;
  const double M = std::round(ratio);
  if (std::abs(ratio - M) > 1e-12 * std::max(1.0, ratio))
    throw Error("half-period L=" + std::to_string(L) + " is not an integer multiple of pi");
  if (M < 4) throw Error("half-period must be at least 4*pi");
  return GridSpec{d, static_cast<int>(M), n};
}

inline GridSpec make_grid_m(int d, int M, int n) { return make_grid(d, std::numbers::pi * M, n); }

/// Complex field sampled on a grid, with a lazily computed and cached DFT.
/// Immutable after construction; copies share storage.
class SpectralField {
public:
  SpectralField() = default;

  static SpectralField zeros(const GridSpec& grid) { return from_values(grid, CVector(grid.size())); }

  static SpectralField from_values(const GridSpec& grid, CVector values) {
    if (values.size() != grid.size()) throw GridMismatch("value count does not match grid");
    SpectralField f;
    f.grid_ = grid;
    f.values_ = std::make_shared<const CVector>(std::move(values));
    f.cache_ = std::make_shared<Cache>();
    return f;
  }

  /// Builds from DFT coefficients (the convention of fft_forward).
  static SpectralField from_spectrum(const GridSpec& grid, CVector spectrum) {
    if (spectrum.size() != grid.size()) throw GridMismatch("coefficient count does not match grid");
    CVector values = spectrum;
    fft_inverse(values, grid.d, grid.n);
    SpectralField f = from_values(grid, std::move(values));
    std::call_once(f.cache_->once, [&] { f.cache_->spectrum = std::move(spectrum); });
    return f;
  }

  /// Samples fn(x) at the grid points x_j = -L + j*h.
  static SpectralField from_function(const GridSpec& grid,
                                     const std::function<cplx(std::span<const double>)>& fn) {
    CVector values(grid.size());
    std::vector<int> idx(static_cast<std::size_t>(grid.d));
    std::vector<double> x(static_cast<std::size_t>(grid.d));
    for (std::size_t i = 0; i < values.size(); ++i) {
      grid.unravel(i, idx);
      for (int a = 0; a < grid.d; ++a) x[static_cast<std::size_t>(a)] = grid.coordinate(idx[static_cast<std::size_t>(a)]);
      values[i] = fn(x);
    }
    return from_values(grid, std::move(values));
  }

  const GridSpec& grid() const { return grid_; }
  const CVector& values() const { return *values_; }
  std::size_t size() const { return values_->size(); }

  /// DFT coefficients, computed on first use.
  const CVector& spectrum() const {
    std::call_once(cache_->once, [this] {
      cache_->spectrum = *values_;
      fft_forward(cache_->spectrum, grid_.d, grid_.n);
    });
    return cache_->spectrum;
  }

  /// DFT computed into a fresh buffer without touching the cache.
  CVector spectrum_copy() const {
    CVector out = *values_;
    fft_forward(out, grid_.d, grid_.n);
    return out;
  }

  /// L^2 norm evaluated on the frequency side (discrete Parseval).
  double l2_norm_spectral() const {
    double acc = 0.0;
    for (const auto& c : spectrum()) acc += std::norm(c);
    return std::sqrt(acc * grid_.cell_volume() / static_cast<double>(size()));
  }

private:
  struct Cache {
    std::once_flag once;
    CVector spectrum;
  };

  GridSpec grid_{};
  std::shared_ptr<const CVector> values_ = std::make_shared<const CVector>();
  std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

inline void require_same_grid(const SpectralField& a, const SpectralField& b) {
  if (!(a.grid() == b.grid())) throw GridMismatch("fields live on different grids");
}

/// Riemann-sum L^p norm (sum |f|^p h^d)^(1/p); p = inf gives max |f|.
inline double lp_norm_values(std::span<const cplx> values, double cell_volume, double p) {
  if (!(p >= 1.0)) throw Error("Lebesgue exponent must be >= 1");
  double acc = 0.0;
  if (std::isinf(p)) {
    for (const auto& v : values) {
      const double a = std::abs(v);
      if (std::isnan(a)) throw Error("NaN in field");
      acc = std::max(acc, a);
    }
    return acc;
  }
  if (p == 2.0) {
    for (const auto& v : values) acc += std::norm(v);
  } else if (p == std::floor(p) && static_cast<long>(p) % 2 == 0 && p <= 16.0) {
    const int half = static_cast<int>(p) / 2;
    for (const auto& v : values) {
      const double m2 = std::norm(v);
      double t = m2;
      for (int i = 1; i < half; ++i) t *= m2;
      acc += t;
    }
  } else {
    const double e = 0.5 * p;
    for (const auto& v : values) acc += std::pow(std::norm(v), e);
  }
  if (std::isnan(acc)) throw Error("NaN in field");
  return std::pow(acc * cell_volume, 1.0 / p);
}

inline double lp_norm(const SpectralField& f, double p) {
  return lp_norm_values(f.values(), f.grid().cell_volume(), p);
}

/// a*x + y.
inline SpectralField axpy(cplx a, const SpectralField& x, const SpectralField& y) {
  require_same_grid(x, y);
  CVector out(x.size());
  const auto& xv = x.values();
  const auto& yv = y.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * xv[i] + yv[i];
  return SpectralField::from_values(x.grid(), std::move(out));
}

inline SpectralField scale(cplx a, const SpectralField& x) {
  CVector out = x.values();
  for (auto& v : out) v *= a;
  return SpectralField::from_values(x.grid(), std::move(out));
}

inline SpectralField subtract(const SpectralField& x, const SpectralField& y) { return axpy(-1.0, y, x); }

inline SpectralField pointwise_mul(const SpectralField& f, const SpectralField& g) {
  require_same_grid(f, g);
  CVector out(f.size());
  const auto& fv = f.values();
  const auto& gv = g.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fv[i] * gv[i];
  return SpectralField::from_values(f.grid(), std::move(out));
}

inline SpectralField conj(const SpectralField& f) {
  CVector out = f.values();
  for (auto& v : out) v = std::conj(v);
  return SpectralField::from_values(f.grid(), std::move(out));
}

/// Multiplies the DFT by m(xi) and transforms back.
inline SpectralField apply_multiplier(const SpectralField& f,
                                      const std::function<cplx(std::span<const double>)>& symbol) {
  const GridSpec& g = f.grid();
  CVector spec = f.spectrum();
  std::vector<int> idx(static_cast<std::size_t>(g.d));
  std::vector<double> xi(static_cast<std::size_t>(g.d));
  for (std::size_t i = 0; i < spec.size(); ++i) {
    g.unravel(i, idx);
    for (int a = 0; a < g.d; ++a) xi[static_cast<std::size_t>(a)] = g.frequency(idx[static_cast<std::size_t>(a)]);
    spec[i] *= symbol(xi);
  }
  return SpectralField::from_spectrum(g, std::move(spec));
}

enum class TimeQuadrature { Trapezoid };

/// Time-sampled sequence of fields on one grid.
class Trajectory {
public:
  Trajectory() = default;
  Trajectory(std::vector<double> times, std::vector<SpectralField> fields)
      : times_(std::move(times)), fields_(std::move(fields)) {
    if (times_.empty()) throw Error("trajectory needs at least one sample");
    if (times_.size() != fields_.size()) throw Error("trajectory times and fields differ in length");
    for (std::size_t j = 1; j < times_.size(); ++j)
      if (!(times_[j] > times_[j - 1])) throw Error("trajectory times must be strictly increasing");
    for (const auto& f : fields_)
      if (!(f.grid() == fields_.front().grid())) throw GridMismatch("trajectory fields on different grids");
  }

  /// Same field at every sample.
  static Trajectory stationary(std::vector<double> times, const SpectralField& f) {
    std::vector<SpectralField> fields(times.size(), f);
    return Trajectory(std::move(times), std::move(fields));
  }

  const std::vector<double>& times() const { return times_; }
  const std::vector<SpectralField>& fields() const { return fields_; }
  const SpectralField& operator[](std::size_t j) const { return fields_[j]; }
  std::size_t size() const { return times_.size(); }
  const GridSpec& grid() const { return fields_.front().grid(); }
  TimeQuadrature quadrature() const { return TimeQuadrature::Trapezoid; }

private:
  std::vector<double> times_;
  std::vector<SpectralField> fields_;
};

/// N+1 uniformly spaced samples on [t0, t1].
inline std::vector<double> uniform_times(double t0, double t1, std::size_t intervals) {
  if (intervals == 0) return {t0};
  std::vector<double> t(intervals + 1);
  for (std::size_t j = 0; j <= intervals; ++j)
    t[j] = t0 + (t1 - t0) * static_cast<double>(j) / static_cast<double>(intervals);
  t.back() = t1;
  return t;
}

/// Trapezoid L^r norm over [t_0, t_N] of nonnegative samples; r = inf gives max.
inline double time_lp_norm(std::span<const double> values, std::span<const double> times, double r) {
  if (values.empty()) throw Error("time norm of an empty trajectory");
  if (values.size() != times.size()) throw Error("time norm: values and times differ in length");
  if (!(r >= 1.0)) throw Error("time exponent must be >= 1");
  if (std::isinf(r)) return *std::max_element(values.begin(), values.end());
  double acc = 0.0;
  for (std::size_t j = 1; j < values.size(); ++j) {
    const double dt = times[j] - times[j - 1];
    acc += 0.5 * dt * (std::pow(values[j - 1], r) + std::pow(values[j], r));
  }
  return std::pow(acc, 1.0 / r);
}

}  // namespace modnls

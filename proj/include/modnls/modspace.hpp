#pragma once

// Frequency-uniform decomposition into unit boxes Q_k = k + (-1/2, 1/2]^d,
// modulation norms M^s_{p,q} and Planchon-type norms l^{s,q}_box(L^r L^p).
//
// Both shipped partitions are tensor products sigma_k(xi) = prod_a psi(xi_a - k_a)
// of a 1D profile psi supported in (-1, 1) whose integer translates sum to 1.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "modnls/error.hpp"
#include "modnls/fft.hpp"
#include "modnls/parallel.hpp"
#include "modnls/spectral.hpp"

namespace modnls {

enum class PartitionKind { PolynomialBump, TrigonometricWindow };

inline std::string to_string(PartitionKind k) {
  return k == PartitionKind::PolynomialBump ? "piecewise-smooth-bump" : "trigonometric-window";
}

inline PartitionKind parse_partition_kind(const std::string& s) {
  if (s == "piecewise-smooth-bump" || s == "bump" || s == "polynomial-bump") return PartitionKind::PolynomialBump;
  if (s == "trigonometric-window" || s == "trig" || s == "cos2") return PartitionKind::TrigonometricWindow;
  throw Error("unknown partition kind '" + s + "'");
}

struct PartitionSpec {
  PartitionKind kind = PartitionKind::TrigonometricWindow;
  int K_max = 3;  ///< boxes with |k|_inf <= K_max are retained
};

/// One-dimensional profile psi(t); psi(t) = 0 for |t| >= 1.
inline double partition_profile(PartitionKind kind, double t) {
  const double a = std::abs(t);
  if (a >= 1.0) return 0.0;
  if (kind == PartitionKind::TrigonometricWindow) {
    const double c = std::cos(0.5 * std::numbers::pi * a);
    return c * c;
  }
  // (1 - t^2)^3 normalised by the sum over its integer translates.
  auto bump = [](double x) {
    const double y = 1.0 - x * x;
    return y > 0.0 ? y * y * y : 0.0;
  };
  double total = 0.0;
  for (int j = -2; j <= 2; ++j) total += bump(t - j);
  return bump(t) / total;
}

struct ModNormSpec {
  double p = 2.0;
  double q = 1.0;
  double s = 0.0;
};

struct PlanchonNormSpec {
  double s = 0.0;
  double q = 1.0;
  double r = kInf;
  double p = 2.0;
};

/// l^q aggregation; q = inf gives the max.
inline double lq_aggregate(std::span<const double> a, double q) {
  if (!(q >= 1.0)) throw Error("sequence exponent must be >= 1");
  double acc = 0.0;
  if (std::isinf(q)) {
    for (double v : a) acc = std::max(acc, v);
    return acc;
  }
  for (double v : a) acc += std::pow(v, q);
  return std::pow(acc, 1.0 / q);
}

inline double japanese_bracket(std::span<const int> k) {
  double s = 1.0;
  for (int v : k) s += static_cast<double>(v) * v;
  return std::sqrt(s);
}

/// Smallest size >= x of the form 2^a 3^b 5^c.
inline int nice_fft_size(int x) {
  for (int n = std::max(x, 1);; ++n) {
    int m = n;
    for (int f : {2, 3, 5})
      while (m % f == 0) m /= f;
    if (m == 1) return n;
  }
}

/// A partition of unity realised on the frequency lattice of one grid.
class Partition {
public:
  static constexpr double kUnityTolerance = 1e-12;

  Partition(const PartitionSpec& spec, const GridSpec& grid) : spec_(spec), grid_(grid) {
    if (spec.K_max < 2) throw Error("K_max must be >= 2");
    if (grid.nyquist() < 2.0 * spec.K_max + 2.0)
      throw Error("partition with K_max=" + std::to_string(spec.K_max) + " needs Nyquist frequency >= " +
                  std::to_string(2 * spec.K_max + 2) + ", grid has " + std::to_string(grid.nyquist()));
    const int M = grid.M;
    half_width_ = M - 1;
    const int w = 2 * M - 1;

    // Profile samples at the lattice offsets o/M, o in [-(M-1), M-1].
    profile_.resize(static_cast<std::size_t>(w));
    for (int o = -half_width_; o <= half_width_; ++o)
      profile_[static_cast<std::size_t>(o + half_width_)] = partition_profile(spec.kind, static_cast<double>(o) / M);

    verify_unity();
    lower_bound_ = compute_lower_bound();

    // Multi-index offsets shared by all boxes, and per-box flat indices.
    const std::size_t support = ipow(static_cast<std::size_t>(w), grid.d);
    offsets_.resize(support * static_cast<std::size_t>(grid.d));
    weights_.resize(support);
    std::vector<int> o(static_cast<std::size_t>(grid.d));
    for (std::size_t e = 0; e < support; ++e) {
      std::size_t rest = e;
      double weight = 1.0;
      for (int a = grid.d - 1; a >= 0; --a) {
        const int oa = static_cast<int>(rest % static_cast<std::size_t>(w)) - half_width_;
        rest /= static_cast<std::size_t>(w);
        offsets_[e * static_cast<std::size_t>(grid.d) + static_cast<std::size_t>(a)] = oa;
        weight *= profile_[static_cast<std::size_t>(oa + half_width_)];
      }
      weights_[e] = weight;
    }

    const int side = 2 * spec.K_max + 1;
    const std::size_t nboxes = ipow(static_cast<std::size_t>(side), grid.d);
    boxes_.resize(nboxes * static_cast<std::size_t>(grid.d));
    flat_.resize(nboxes * support);
    std::vector<int> idx(static_cast<std::size_t>(grid.d));
    for (std::size_t b = 0; b < nboxes; ++b) {
      std::size_t rest = b;
      for (int a = grid.d - 1; a >= 0; --a) {
        boxes_[b * static_cast<std::size_t>(grid.d) + static_cast<std::size_t>(a)] =
            static_cast<int>(rest % static_cast<std::size_t>(side)) - spec.K_max;
        rest /= static_cast<std::size_t>(side);
      }
      const auto k = box_index(b);
      for (std::size_t e = 0; e < support; ++e) {
        for (int a = 0; a < grid.d; ++a) {
          const auto ua = static_cast<std::size_t>(a);
          idx[ua] = grid.wrap_index(M * k[ua] + offsets_[e * static_cast<std::size_t>(grid.d) + ua]);
        }
        flat_[b * support + e] = grid.ravel(idx);
      }
    }
  }

  const PartitionSpec& spec() const { return spec_; }
  const GridSpec& grid() const { return grid_; }
  std::size_t box_count() const { return boxes_.size() / static_cast<std::size_t>(grid_.d); }
  std::size_t support_size() const { return weights_.size(); }

  std::span<const int> box_index(std::size_t b) const {
    return {boxes_.data() + b * static_cast<std::size_t>(grid_.d), static_cast<std::size_t>(grid_.d)};
  }

  std::size_t find_box(std::span<const int> k) const {
    if (k.size() != static_cast<std::size_t>(grid_.d)) throw Error("box multi-index has wrong dimension");
    std::size_t b = 0;
    const int side = 2 * spec_.K_max + 1;
    for (int v : k) {
      if (std::abs(v) > spec_.K_max) throw Error("box index out of range |k|_inf <= K_max");
      b = b * static_cast<std::size_t>(side) + static_cast<std::size_t>(v + spec_.K_max);
    }
    return b;
  }

  /// sigma_k(xi) at an arbitrary frequency (not necessarily on the lattice).
  double sigma(std::span<const int> k, std::span<const double> xi) const {
    double v = 1.0;
    for (std::size_t a = 0; a < k.size(); ++a) v *= partition_profile(spec_.kind, xi[a] - k[a]);
    return v;
  }

  /// Sum over retained boxes of sigma_k at a lattice frequency, one axis at a time.
  double retained_sum(std::span<const double> xi) const {
    double v = 1.0;
    for (double x : xi) {
      double s = 0.0;
      for (int k = -spec_.K_max; k <= spec_.K_max; ++k) s += partition_profile(spec_.kind, x - k);
      v *= s;
    }
    return v;
  }

  /// The achieved C in sigma_k >= C on Q_k (lattice points of the box).
  double lower_bound() const { return lower_bound_; }
  /// Largest |sum_k sigma_k - 1| over lattice frequencies with |xi|_inf <= K_max.
  double unity_residual() const { return unity_residual_; }

  /// Shared support offsets and multiplier weights; flat DFT indices per box.
  std::span<const double> weights() const { return weights_; }
  std::span<const int> offset(std::size_t e) const {
    return {offsets_.data() + e * static_cast<std::size_t>(grid_.d), static_cast<std::size_t>(grid_.d)};
  }
  std::span<const std::size_t> flat_indices(std::size_t b) const {
    return {flat_.data() + b * support_size(), support_size()};
  }
  int half_width() const { return half_width_; }

  /// Spectrum of box_k f given the spectrum of f.
  CVector box_spectrum(std::size_t b, const CVector& spectrum) const {
    CVector out(spectrum.size());
    const auto flat = flat_indices(b);
    for (std::size_t e = 0; e < flat.size(); ++e) out[flat[e]] = weights_[e] * spectrum[flat[e]];
    return out;
  }

private:
  static std::size_t ipow(std::size_t b, int e) {
    std::size_t r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
  }

  void verify_unity() {
    double worst = 0.0;
    const int M = grid_.M;
    for (int s = -spec_.K_max * M; s <= spec_.K_max * M; ++s) {
      const double x = static_cast<double>(s) / M;
      double sum = 0.0;
      for (int k = -spec_.K_max; k <= spec_.K_max; ++k) sum += partition_profile(spec_.kind, x - k);
      worst = std::max(worst, std::abs(sum - 1.0));
    }
    // d-fold product of 1D sums each within `worst` of one.
    unity_residual_ = std::pow(1.0 + worst, grid_.d) - 1.0;
    if (unity_residual_ > kUnityTolerance)
      throw Error("partition-of-unity residual " + std::to_string(unity_residual_) + " above tolerance");
    for (std::size_t i = 0; i < profile_.size(); ++i)
      if (profile_[i] < 0.0) throw Error("partition profile is negative");
  }

  double compute_lower_bound() const {
    // Q_0 lattice offsets: o/M in (-1/2, 1/2].
    double lo = 1.0;
    const int M = grid_.M;
    for (int o = -half_width_; o <= half_width_; ++o) {
      const double t = static_cast<double>(o) / M;
      if (t > -0.5 && t <= 0.5) lo = std::min(lo, profile_[static_cast<std::size_t>(o + half_width_)]);
    }
    return std::pow(lo, grid_.d);
  }

  PartitionSpec spec_;
  GridSpec grid_;
  int half_width_ = 0;
  std::vector<double> profile_;
  std::vector<int> offsets_;
  std::vector<double> weights_;
  std::vector<int> boxes_;
  std::vector<std::size_t> flat_;
  double lower_bound_ = 0.0;
  double unity_residual_ = 0.0;
};

inline Partition build_partition(const PartitionSpec& spec, const GridSpec& grid) { return Partition(spec, grid); }

/// box_k f.
inline SpectralField box(const Partition& part, std::span<const int> k, const SpectralField& f) {
  if (!(f.grid() == part.grid())) throw GridMismatch("field and partition live on different grids");
  const std::size_t b = part.find_box(k);
  return SpectralField::from_spectrum(f.grid(), part.box_spectrum(b, f.spectrum()));
}

/// Sum over all retained boxes of box_k f.
inline SpectralField reconstruct(const Partition& part, const SpectralField& f) {
  const auto& spec = f.spectrum();
  CVector out(spec.size());
  for (std::size_t b = 0; b < part.box_count(); ++b) {
    const auto flat = part.flat_indices(b);
    const auto w = part.weights();
    for (std::size_t e = 0; e < flat.size(); ++e) out[flat[e]] += w[e] * spec[flat[e]];
  }
  return SpectralField::from_spectrum(f.grid(), std::move(out));
}

/// ||f - sum_{|k| <= K_max} box_k f||_{L^2}, evaluated on the frequency side.
inline double truncation_residual(const Partition& part, const CVector& spectrum) {
  const GridSpec& g = part.grid();
  std::vector<int> idx(static_cast<std::size_t>(g.d));
  std::vector<double> xi(static_cast<std::size_t>(g.d));
  double acc = 0.0;
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    if (spectrum[i] == cplx{}) continue;
    g.unravel(i, idx);
    for (int a = 0; a < g.d; ++a) xi[static_cast<std::size_t>(a)] = g.frequency(idx[static_cast<std::size_t>(a)]);
    const double miss = 1.0 - part.retained_sum(xi);
    acc += std::norm(spectrum[i]) * miss * miss;
  }
  return std::sqrt(acc * g.cell_volume() / static_cast<double>(g.size()));
}

/// How a per-box L^p norm is evaluated.
enum class BoxNormPath {
  Auto,  ///< Parseval for p = 2, reduced exact grid for other even p, full grid otherwise
  Full,  ///< always inverse-transform on the full grid
};

/// Evaluates ||box_k f||_{L^p} for every retained box.
///
/// For even integer p, |box_k f|^p is a trigonometric polynomial whose
/// frequencies lie within p*(M-1) lattice steps of the origin once the box
/// centre is shifted away, so the Riemann sum over any grid with more than
/// p*(M-1) points per axis equals the full-grid sum. The Auto path uses the
/// smallest such grid when it is smaller than the field's own.
class BoxNormEvaluator {
public:
  explicit BoxNormEvaluator(const Partition& part) : part_(&part) {}

  const Partition& partition() const { return *part_; }

  std::vector<double> norms(const CVector& spectrum, double p, BoxNormPath path = BoxNormPath::Auto) const {
    const Partition& part = *part_;
    const GridSpec& g = part.grid();
    std::vector<double> out(part.box_count());
    if (path == BoxNormPath::Auto && p == 2.0) {
      const double scale = g.cell_volume() / static_cast<double>(g.size());
      const auto w = part.weights();
      for (std::size_t b = 0; b < out.size(); ++b) {
        const auto flat = part.flat_indices(b);
        double acc = 0.0;
        for (std::size_t e = 0; e < flat.size(); ++e) acc += w[e] * w[e] * std::norm(spectrum[flat[e]]);
        out[b] = std::sqrt(acc * scale);
      }
      return out;
    }
    const int nc = reduced_size(p);
    if (path == BoxNormPath::Auto && nc > 0 && nc < g.n) {
      reduced_norms(spectrum, p, nc, out);
      return out;
    }
    for (std::size_t b = 0; b < out.size(); ++b) {
      CVector piece = part.box_spectrum(b, spectrum);
      fft_inverse(piece, g.d, g.n);
      out[b] = lp_norm_values(piece, g.cell_volume(), p);
    }
    return out;
  }

  /// Reduced grid size usable for exponent p, or 0 if none applies.
  int reduced_size(double p) const {
    if (std::isinf(p) || p < 2.0 || p != std::floor(p) || static_cast<long>(p) % 2 != 0) return 0;
    return nice_fft_size(static_cast<int>(p) * part_->half_width() + 1);
  }

private:
  void reduced_norms(const CVector& spectrum, double p, int nc, std::vector<double>& out) const {
    const Partition& part = *part_;
    const GridSpec& g = part.grid();
    const int d = g.d;
    std::size_t total = 1;
    for (int a = 0; a < d; ++a) total *= static_cast<std::size_t>(nc);
    const double value_scale = static_cast<double>(total) / static_cast<double>(g.size());
    const double cell = std::pow(2.0 * g.L() / nc, d);
    const auto w = part.weights();

    std::vector<std::size_t> reduced_flat(part.support_size());
    for (std::size_t e = 0; e < reduced_flat.size(); ++e) {
      const auto o = part.offset(e);
      std::size_t flat = 0;
      for (int a = 0; a < d; ++a)
        flat = flat * static_cast<std::size_t>(nc) + static_cast<std::size_t>(((o[static_cast<std::size_t>(a)] % nc) + nc) % nc);
      reduced_flat[e] = flat;
    }

    CVector buf(total);
    const int half = static_cast<int>(p) / 2;
    for (std::size_t b = 0; b < out.size(); ++b) {
      std::fill(buf.begin(), buf.end(), cplx{});
      const auto flat = part.flat_indices(b);
      bool any = false;
      for (std::size_t e = 0; e < flat.size(); ++e) {
        const cplx c = w[e] * spectrum[flat[e]];
        if (c != cplx{}) any = true;
        buf[reduced_flat[e]] = c;
      }
      if (!any) {
        out[b] = 0.0;
        continue;
      }
      fft_inverse(buf, d, nc);
      double acc = 0.0;
      for (const auto& v : buf) {
        const double m2 = std::norm(v * value_scale);
        double t = m2;
        for (int i = 1; i < half; ++i) t *= m2;
        acc += t;
      }
      out[b] = std::pow(acc * cell, 1.0 / p);
    }
  }

  const Partition* part_;
};

/// Weighted l^q aggregation of per-box values with weight <k>^s.
inline double weighted_aggregate(const Partition& part, std::span<const double> per_box, double q, double s) {
  std::vector<double> a(per_box.size());
  for (std::size_t b = 0; b < a.size(); ++b) a[b] = std::pow(japanese_bracket(part.box_index(b)), s) * per_box[b];
  return lq_aggregate(a, q);
}

struct NormReport {
  double value = 0.0;
  double truncation_residual = 0.0;
};

/// ||f||_{M^s_{p,q}} on the retained boxes, with the truncation residual.
inline NormReport mod_norm_report(const Partition& part, const SpectralField& f, const ModNormSpec& spec,
                                  BoxNormPath path = BoxNormPath::Auto) {
  if (!(f.grid() == part.grid())) throw GridMismatch("field and partition live on different grids");
  const auto& spectrum = f.spectrum();
  const auto per_box = BoxNormEvaluator(part).norms(spectrum, spec.p, path);
  return {weighted_aggregate(part, per_box, spec.q, spec.s), truncation_residual(part, spectrum)};
}

inline double mod_norm(const Partition& part, const SpectralField& f, const ModNormSpec& spec,
                       BoxNormPath path = BoxNormPath::Auto) {
  if (!(f.grid() == part.grid())) throw GridMismatch("field and partition live on different grids");
  const auto per_box = BoxNormEvaluator(part).norms(f.spectrum(), spec.p, path);
  return weighted_aggregate(part, per_box, spec.q, spec.s);
}

/// Per-box, per-time table of spatial L^p norms for a set of exponents p,
/// filled one time sample at a time so that trajectories never need to be
/// held in memory.
class BoxNormTable {
public:
  BoxNormTable(const Partition& part, std::vector<double> exponents, std::size_t samples)
      : eval_(part), exponents_(std::move(exponents)), times_(samples),
        table_(exponents_.size(), std::vector<double>(samples * part.box_count())) {}

  void set(std::size_t j, double t, const CVector& spectrum) {
    times_[j] = t;
    const std::size_t nb = eval_.partition().box_count();
    for (std::size_t i = 0; i < exponents_.size(); ++i) {
      const auto per_box = eval_.norms(spectrum, exponents_[i]);
      for (std::size_t b = 0; b < nb; ++b) table_[i][b * times_.size() + j] = per_box[b];
    }
  }

  /// l^{s,q}_box(L^r L^p) for exponent slot i.
  double planchon(std::size_t i, double s, double q, double r) const {
    const std::size_t nb = eval_.partition().box_count();
    std::vector<double> per_box(nb);
    for (std::size_t b = 0; b < nb; ++b)
      per_box[b] = time_lp_norm(std::span<const double>(table_[i]).subspan(b * times_.size(), times_.size()), times_, r);
    return weighted_aggregate(eval_.partition(), per_box, q, s);
  }

  /// t -> ||u(t)||_{M^s_{p,q}} for exponent slot i.
  std::vector<double> mod_norm_series(std::size_t i, double q, double s) const {
    const std::size_t nb = eval_.partition().box_count();
    std::vector<double> out(times_.size());
    std::vector<double> per_box(nb);
    for (std::size_t j = 0; j < times_.size(); ++j) {
      for (std::size_t b = 0; b < nb; ++b) per_box[b] = table_[i][b * times_.size() + j];
      out[j] = weighted_aggregate(eval_.partition(), per_box, q, s);
    }
    return out;
  }

  const std::vector<double>& times() const { return times_; }

private:
  BoxNormEvaluator eval_;
  std::vector<double> exponents_;
  std::vector<double> times_;
  std::vector<std::vector<double>> table_;
};

/// Fills a BoxNormTable from a trajectory; spectra are computed per sample.
inline BoxNormTable tabulate(const Partition& part, const Trajectory& u, std::vector<double> exponents) {
  if (!(u.grid() == part.grid())) throw GridMismatch("trajectory and partition live on different grids");
  BoxNormTable table(part, std::move(exponents), u.size());
  parallel_for(u.size(), [&](std::size_t j) { table.set(j, u.times()[j], u[j].spectrum_copy()); });
  return table;
}

inline double planchon_norm(const Partition& part, const Trajectory& u, const PlanchonNormSpec& spec) {
  return tabulate(part, u, {spec.p}).planchon(0, spec.s, spec.q, spec.r);
}

/// ||u||_X = l^{s,q}(L^inf L^2) + l^{s,q}(L^r L^p).
inline double x_norm(const Partition& part, const Trajectory& u, double s, double q, double r, double p) {
  const auto table = tabulate(part, u, {2.0, p});
  return table.planchon(0, s, q, kInf) + table.planchon(1, s, q, r);
}

}  // namespace modnls

#pragma once

// Monte-Carlo ratio statistics for the linear and multilinear estimates:
// Strichartz (homogeneous, inhomogeneous), Hoelder-like products, the power
// Lipschitz bound and the Minkowski/Bernstein embeddings.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "modnls/dispersion.hpp"
#include "modnls/error.hpp"
#include "modnls/modspace.hpp"
#include "modnls/nonlinear.hpp"
#include "modnls/rational.hpp"
#include "modnls/solver.hpp"
#include "modnls/spectral.hpp"

namespace modnls {

enum class FieldLaw { GaussianSpectrum, SingleBox, MultiBoxSparse };

inline std::string to_string(FieldLaw law) {
  switch (law) {
    case FieldLaw::GaussianSpectrum: return "gaussian-spectrum";
    case FieldLaw::SingleBox: return "single-box";
    case FieldLaw::MultiBoxSparse: return "multi-box";
  }
  return "?";
}

inline FieldLaw parse_field_law(const std::string& s) {
  if (s == "gaussian-spectrum" || s == "gaussian") return FieldLaw::GaussianSpectrum;
  if (s == "single-box") return FieldLaw::SingleBox;
  if (s == "multi-box" || s == "multi-box-sparse") return FieldLaw::MultiBoxSparse;
  throw Error("unknown field law '" + s + "'");
}

struct EnsembleSpec {
  std::size_t count = 100;
  std::uint64_t seed = 7;
  FieldLaw law = FieldLaw::GaussianSpectrum;
  double decay = 1.0;      ///< spectral decay <xi>^-a of the gaussian-spectrum law
  double amplitude = 1.0;  ///< L^2 norm of each sample
  double band = 1.0;       ///< support in |xi|_inf
  int boxes = 3;           ///< boxes per multi-box sample

  void validate() const {
    if (count < 1) throw Error("ensemble needs at least one sample");
    if (law == FieldLaw::GaussianSpectrum && !(decay > 0.0)) throw Error("spectral decay exponent must be positive");
    if (!(band > 0.0)) throw Error("ensemble band must be positive");
  }
};

/// Grid, window and norm indices shared by the checks.
struct HarnessConfig {
  GridSpec grid{2, 4, 64};
  PartitionSpec partition{PartitionKind::TrigonometricWindow, 3};
  EquationCoeffs coeffs{1.0, 0.0, 1.0};
  double t_min = 0.0;
  double t_max = 8.0;
  std::size_t intervals = 64;
  double s = 0.0;
  double q = 1.0;

  std::vector<double> times() const { return uniform_times(t_min, t_max, intervals); }

  /// Twice the spatial resolution and twice the time samples.
  HarnessConfig refined() const {
    HarnessConfig r = *this;
    r.grid.n *= 2;
    r.intervals *= 2;
    return r;
  }
};

struct RatioSample {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  bool excluded = false;  ///< 0/0
};

struct RatioReport {
  std::string name;
  std::vector<RatioSample> samples;
  double max_ratio = 0.0;
  double median_ratio = 0.0;
  int failures = 0;  ///< rhs = 0 with lhs > 0
  int flagged = 0;   ///< ratio > bound * median
  double bound = 10.0;
  bool probe = false;

  void add(double lhs, double rhs) {
    RatioSample s{lhs, rhs, 0.0, false};
    if (rhs == 0.0) {
      s.excluded = true;
      if (lhs > 0.0) ++failures;
    } else {
      s.ratio = lhs / rhs;
    }
    samples.push_back(s);
  }

  void finalize() {
    std::vector<double> r;
    for (const auto& s : samples)
      if (!s.excluded) r.push_back(s.ratio);
    flagged = 0;
    if (r.empty()) {
      max_ratio = median_ratio = 0.0;
      return;
    }
    std::sort(r.begin(), r.end());
    max_ratio = r.back();
    median_ratio = r.size() % 2 ? r[r.size() / 2] : 0.5 * (r[r.size() / 2 - 1] + r[r.size() / 2]);
    for (double x : r)
      if (x > bound * median_ratio) ++flagged;
  }

  std::size_t used() const {
    std::size_t c = 0;
    for (const auto& s : samples) c += s.excluded ? 0 : 1;
    return c;
  }

  bool passed() const { return probe || (failures == 0 && flagged == 0 && std::isfinite(max_ratio)); }
};

/// |max_b - max_a| / max_a.
inline double doubling_drift(const RatioReport& a, const RatioReport& b) {
  if (a.max_ratio == 0.0) return b.max_ratio == 0.0 ? 0.0 : kInf;
  return std::abs(b.max_ratio - a.max_ratio) / a.max_ratio;
}

// ---------------------------------------------------------------------------
// Random band-limited fields.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Independent stream for sample `index` (and sub-stream `tag`).
inline std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t index, std::uint64_t tag = 0) {
  return std::mt19937_64(splitmix64(splitmix64(seed ^ splitmix64(tag)) + index));
}

namespace detail {

/// Lattice points xi = s / M, |s_a| <= radius, in a fixed order.
inline void for_lattice(int d, int radius, const std::function<void(std::span<const int>)>& fn) {
  std::vector<int> s(static_cast<std::size_t>(d), -radius);
  while (true) {
    fn(s);
    int a = d - 1;
    while (a >= 0 && s[static_cast<std::size_t>(a)] == radius) s[static_cast<std::size_t>(a--)] = -radius;
    if (a < 0) return;
    ++s[static_cast<std::size_t>(a)];
  }
}

inline cplx complex_normal(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  const double re = n(rng);
  const double im = n(rng);
  return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
}

}  // namespace detail

/// Sample `index` of the ensemble. Depends on the grid only through d and M,
/// so refining n reproduces the same function.
inline SpectralField random_field(const GridSpec& grid, const EnsembleSpec& ens, std::uint64_t index) {
  ens.validate();
  auto rng = sample_rng(ens.seed, index);
  const int radius = static_cast<int>(std::floor(ens.band * grid.M + 1e-9));
  if (radius >= grid.n / 2) throw Error("ensemble band exceeds the grid Nyquist frequency");
  const int d = grid.d;
  std::vector<int> lattice;  // flattened lattice points
  std::vector<cplx> coeff;

  auto in_box = [&](std::span<const int> s, std::span<const int> k) {
    for (int a = 0; a < d; ++a) {
      const double x = static_cast<double>(s[static_cast<std::size_t>(a)]) / grid.M - k[static_cast<std::size_t>(a)];
      if (!(x > -0.5 && x <= 0.5)) return false;
    }
    return true;
  };

  if (ens.law == FieldLaw::GaussianSpectrum) {
    detail::for_lattice(d, radius, [&](std::span<const int> s) {
      double xi2 = 0.0;
      for (int v : s) xi2 += (static_cast<double>(v) / grid.M) * (static_cast<double>(v) / grid.M);
      lattice.insert(lattice.end(), s.begin(), s.end());
      coeff.push_back(detail::complex_normal(rng) * std::pow(1.0 + xi2, -0.5 * ens.decay));
    });
  } else {
    const int kmax = static_cast<int>(std::floor(ens.band - 0.5 + 1e-9));
    if (kmax < 0) throw Error("band too small to contain a whole box");
    std::vector<std::vector<int>> centres;
    detail::for_lattice(d, kmax, [&](std::span<const int> k) { centres.emplace_back(k.begin(), k.end()); });
    std::shuffle(centres.begin(), centres.end(), rng);
    const std::size_t take = ens.law == FieldLaw::SingleBox ? 1 : std::min<std::size_t>(centres.size(), static_cast<std::size_t>(std::max(ens.boxes, 1)));
    for (std::size_t c = 0; c < take; ++c) {
      detail::for_lattice(d, radius + grid.M, [&](std::span<const int> s) {
        if (!in_box(s, centres[c])) return;
        lattice.insert(lattice.end(), s.begin(), s.end());
        coeff.push_back(detail::complex_normal(rng));
      });
    }
  }

  double energy = 0.0;
  for (const auto& c : coeff) energy += std::norm(c);
  const double volume = std::pow(2.0 * grid.L(), d);
  const double norm = std::sqrt(energy * volume);
  const double N = static_cast<double>(grid.size());
  CVector spec(grid.size());
  std::vector<int> idx(static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < coeff.size(); ++i) {
    for (int a = 0; a < d; ++a) idx[static_cast<std::size_t>(a)] = grid.wrap_index(lattice[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(a)]);
    spec[grid.ravel(idx)] += norm > 0.0 ? coeff[i] * (ens.amplitude * N / norm) : cplx{};
  }
  return SpectralField::from_spectrum(grid, std::move(spec));
}

// ---------------------------------------------------------------------------
// Norm helpers.

/// ||u||_{L^r_t L^p_x}.
inline double lebesgue_spacetime(const Trajectory& u, double p, double r) {
  std::vector<double> v(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) v[j] = lp_norm(u[j], p);
  return time_lp_norm(v, u.times(), r);
}

/// Forced linear evolution t -> int_{t_0}^t W(t - tau) F(tau) dtau (trapezoid).
inline Trajectory forced_duhamel(const SymbolTable& table, const Trajectory& F) {
  const GridSpec& g = table.grid();
  const auto& times = F.times();
  std::vector<SpectralField> out(times.size());
  CVector acc(g.size());
  CVector prev;
  PhaseSweep sweep(table, times);
  for (std::size_t j = 0; j < times.size(); ++j) {
    const CVector& rot = sweep.at(j);
    CVector cur = F[j].spectrum_copy();
    for (std::size_t i = 0; i < cur.size(); ++i) cur[i] *= rot[i];
    if (j > 0) {
      const double w = 0.5 * (times[j] - times[j - 1]);
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += w * (prev[i] + cur[i]);
    }
    CVector spec(acc.size());
    for (std::size_t i = 0; i < spec.size(); ++i) spec[i] = std::conj(rot[i]) * acc[i];
    out[j] = SpectralField::from_spectrum(g, std::move(spec));
    prev = std::move(cur);
  }
  return Trajectory(times, std::move(out));
}

/// Pointwise product of trajectories.
inline Trajectory product(const std::vector<Trajectory>& factors) {
  if (factors.empty()) throw Error("empty product");
  std::vector<SpectralField> out;
  out.reserve(factors.front().size());
  for (std::size_t j = 0; j < factors.front().size(); ++j) {
    SpectralField acc = factors.front()[j];
    for (std::size_t k = 1; k < factors.size(); ++k) acc = pointwise_mul(acc, factors[k][j]);
    out.push_back(acc);
  }
  return Trajectory(factors.front().times(), std::move(out));
}

inline void require_admissible(const HarnessConfig& hc, const Rational& p, const Rational& r, bool probe,
                               const std::string& what) {
  const int cg = c_gamma(hc.coeffs.gamma != 0.0);
  Rational defect;
  try {
    defect = admissible_defect(hc.grid.d, cg, p, r);
  } catch (const HypothesisViolation&) {
    if (!probe) throw;
    return;
  }
  if (defect != Rational(0) && !probe)
    throw HypothesisViolation(what + " (p, r) = (" + p.str() + ", " + r.str() + ") is not admissible: defect " + defect.str());
}

inline void require_s_hypothesis(const HarnessConfig& hc, bool probe) {
  if (probe) return;
  if (hc.q == 1.0 ? hc.s < 0.0 : !(hc.s > hc.grid.d * (1.0 - 1.0 / hc.q)))
    throw HypothesisViolation("Hoelder-like estimate needs s >= 0 for q = 1 and s > d(1 - 1/q) for q > 1");
}

// ---------------------------------------------------------------------------
// Checks.

struct StrichartzReport {
  RatioReport lebesgue;
  RatioReport lifted;
  double max_end_ratio = 0.0;  ///< max over samples of ||W(T)u0||_{L^p} / max_t ||W(t)u0||_{L^p}
};

inline StrichartzReport check_homogeneous_strichartz(const HarnessConfig& hc, const EnsembleSpec& ens, const Rational& p,
                                                     const Rational& r, bool probe = false) {
  require_admissible(hc, p, r, probe, "homogeneous Strichartz");
  const Partition part(hc.partition, hc.grid);
  const SymbolTable table(hc.coeffs, hc.grid);
  const auto times = hc.times();
  const double pd = p.to_double(), rd = r.to_double();
  StrichartzReport out;
  out.lebesgue.name = "strichartz-hom-lebesgue";
  out.lifted.name = "strichartz-hom-lifted";
  out.lebesgue.probe = out.lifted.probe = probe;
  for (std::size_t i = 0; i < ens.count; ++i) {
    const SpectralField u0 = random_field(hc.grid, ens, i);
    const Trajectory u = free_evolution(table, u0, times);
    std::vector<double> lp(u.size());
    for (std::size_t j = 0; j < u.size(); ++j) lp[j] = lp_norm(u[j], pd);
    const double peak = *std::max_element(lp.begin(), lp.end());
    if (peak > 0.0) out.max_end_ratio = std::max(out.max_end_ratio, lp.back() / peak);
    out.lebesgue.add(time_lp_norm(lp, times, rd), lp_norm(u0, 2.0));
    out.lifted.add(planchon_norm(part, u, {hc.s, hc.q, rd, pd}), mod_norm(part, u0, {2.0, hc.q, hc.s}));
  }
  out.lebesgue.finalize();
  out.lifted.finalize();
  return out;
}

struct InhomOptions {
  bool lebesgue = true;
  bool lifted = true;
  bool probe = false;
};

/// Random forcing F(tau) = cos(omega tau + phi) g1 + W(tau) g2.
inline Trajectory random_forcing(const HarnessConfig& hc, const SymbolTable& table, const EnsembleSpec& ens,
                                 std::size_t i) {
  const SpectralField g1 = random_field(hc.grid, ens, 2 * i);
  const SpectralField g2 = random_field(hc.grid, ens, 2 * i + 1);
  auto rng = sample_rng(ens.seed, i, 1);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const double omega = 2.0 * U(rng);
  const double phi = 2.0 * std::numbers::pi * U(rng);
  const auto times = hc.times();
  const Trajectory w = free_evolution(table, g2, times);
  std::vector<SpectralField> F;
  F.reserve(times.size());
  for (std::size_t j = 0; j < times.size(); ++j) F.push_back(axpy(std::cos(omega * times[j] + phi), g1, w[j]));
  return Trajectory(times, std::move(F));
}

inline StrichartzReport check_inhomogeneous_strichartz(const HarnessConfig& hc, const EnsembleSpec& ens,
                                                       const Rational& p, const Rational& r, const Rational& pt,
                                                       const Rational& rt, const InhomOptions& opt = {}) {
  require_admissible(hc, p, r, opt.probe, "inhomogeneous Strichartz target");
  if (!(pt >= Rational(1) && pt <= Rational(2) && rt >= Rational(1) && rt <= Rational(2)) && !opt.probe)
    throw HypothesisViolation("dual exponents must lie in [1, 2]");
  require_admissible(hc, conjugate(pt), conjugate(rt), opt.probe, "inhomogeneous Strichartz dual");
  const Partition part(hc.partition, hc.grid);
  const SymbolTable table(hc.coeffs, hc.grid);
  const double pd = p.to_double(), rd = r.to_double(), ptd = pt.to_double(), rtd = rt.to_double();
  StrichartzReport out;
  out.lebesgue.name = "strichartz-inhom-lebesgue";
  out.lifted.name = "strichartz-inhom-lifted";
  out.lebesgue.probe = out.lifted.probe = opt.probe;
  for (std::size_t i = 0; i < ens.count; ++i) {
    const Trajectory F = random_forcing(hc, table, ens, i);
    const Trajectory D = forced_duhamel(table, F);
    if (opt.lebesgue) out.lebesgue.add(lebesgue_spacetime(D, pd, rd), lebesgue_spacetime(F, ptd, rtd));
    if (opt.lifted)
      out.lifted.add(planchon_norm(part, D, {hc.s, hc.q, rd, pd}), planchon_norm(part, F, {hc.s, hc.q, rtd, ptd}));
  }
  out.lebesgue.finalize();
  out.lifted.finalize();
  return out;
}

enum class HoelderMode { Planchon, Modulation };

/// 1/p = sum 1/p_j and 1/r = sum 1/r_j; r and r_j are ignored in modulation mode.
struct HoelderSplit {
  Rational p{2};
  Rational r{2};
  std::vector<Rational> p_j{Rational(4), Rational(4)};
  std::vector<Rational> r_j{Rational(4), Rational(4)};

  static HoelderSplit uniform(int factors) {
    HoelderSplit s;
    s.p_j.assign(static_cast<std::size_t>(factors), Rational(2 * factors));
    s.r_j = s.p_j;
    return s;
  }

  void validate() const {
    if (p_j.size() < 2 || r_j.size() != p_j.size()) throw Error("exponent split needs matching lists of >= 2 factors");
    Rational sp(0), sr(0);
    for (const auto& x : p_j) sp = sp + x.reciprocal();
    for (const auto& x : r_j) sr = sr + x.reciprocal();
    if (sp != p.reciprocal()) throw Error("exponent split mismatch: sum 1/p_j = " + sp.str() + " but 1/p = " + p.reciprocal().str());
    if (sr != r.reciprocal()) throw Error("exponent split mismatch: sum 1/r_j = " + sr.str() + " but 1/r = " + r.reciprocal().str());
  }
};

inline RatioReport check_hoelder_like(const HarnessConfig& hc, const EnsembleSpec& ens, const HoelderSplit& split,
                                      HoelderMode mode, bool probe = false) {
  split.validate();
  require_s_hypothesis(hc, probe);
  const Partition part(hc.partition, hc.grid);
  const SymbolTable table(hc.coeffs, hc.grid);
  const auto times = hc.times();
  const std::size_t n = split.p_j.size();
  RatioReport out;
  out.name = std::string(mode == HoelderMode::Planchon ? "hoelder-planchon-" : "hoelder-modulation-") + std::to_string(n);
  out.probe = probe;
  for (std::size_t i = 0; i < ens.count; ++i) {
    std::vector<SpectralField> g;
    for (std::size_t k = 0; k < n; ++k) g.push_back(random_field(hc.grid, ens, i * n + k));
    double rhs = 1.0;
    if (mode == HoelderMode::Modulation) {
      SpectralField prod = g[0];
      for (std::size_t k = 1; k < n; ++k) prod = pointwise_mul(prod, g[k]);
      for (std::size_t k = 0; k < n; ++k) rhs *= mod_norm(part, g[k], {split.p_j[k].to_double(), hc.q, hc.s});
      out.add(mod_norm(part, prod, {split.p.to_double(), hc.q, hc.s}), rhs);
      continue;
    }
    std::vector<Trajectory> f;
    for (std::size_t k = 0; k < n; ++k) {
      f.push_back(free_evolution(table, g[k], times));
      rhs *= planchon_norm(part, f.back(), {hc.s, hc.q, split.r_j[k].to_double(), split.p_j[k].to_double()});
    }
    out.add(planchon_norm(part, product(f), {hc.s, hc.q, split.r.to_double(), split.p.to_double()}), rhs);
  }
  out.finalize();
  return out;
}

struct TrendPoint {
  double band = 0.0;
  std::size_t boxes = 0;  ///< boxes meeting the support of a sample
  double max_ratio = 0.0;
  double median_ratio = 0.0;
};

/// Growth of the Hoelder-like ratio with the number of active boxes, for
/// (s, q) violating the regularity hypothesis. Trend data only.
inline std::vector<TrendPoint> hoelder_probe_trend(const HarnessConfig& hc, EnsembleSpec ens, const HoelderSplit& split,
                                                   const std::vector<double>& bands) {
  std::vector<TrendPoint> out;
  for (double b : bands) {
    ens.band = b;
    const auto rep = check_hoelder_like(hc, ens, split, HoelderMode::Modulation, true);
    const int k = static_cast<int>(std::floor(b + 0.5));
    std::size_t boxes = 1;
    for (int a = 0; a < hc.grid.d; ++a) boxes *= static_cast<std::size_t>(2 * k + 1);
    out.push_back({b, boxes, rep.max_ratio, rep.median_ratio});
  }
  return out;
}

/// Lipschitz exponents implied by (d, gamma, m, r).
inline LipschitzExponents lipschitz_exponents(const HarnessConfig& hc, int m, const Rational& r) {
  const bool gnz = hc.coeffs.gamma != 0.0;
  const int m0 = compute_m0(hc.grid.d, gnz);
  const int l = effective_l(r, m, m0);
  const DualPair dp = dual_pair(r, l, hc.grid.d, gnz);
  return {hc.s, hc.q, dp.r_tilde.to_double(), dp.p_tilde.to_double(), l, m};
}

struct LipschitzOptions {
  bool zero_v = false;  ///< v = 0
  bool same = false;    ///< v = u (excluded 0/0)
};

inline RatioReport check_power_lipschitz(const HarnessConfig& hc, const EnsembleSpec& ens, const NonlinSpec& spec,
                                         const LipschitzExponents& e, const LipschitzOptions& opt = {}) {
  if (spec.kind != NonlinKind::Power) throw Error("Lipschitz check needs a power nonlinearity");
  if (e.m != spec.degree_m()) throw Error("Lipschitz exponents built for another degree");
  const Partition part(hc.partition, hc.grid);
  const SymbolTable table(hc.coeffs, hc.grid);
  const auto times = hc.times();
  RatioReport out;
  out.name = opt.zero_v ? "lipschitz-v0" : "lipschitz";
  for (std::size_t i = 0; i < ens.count; ++i) {
    const Trajectory u = free_evolution(table, random_field(hc.grid, ens, 2 * i), times);
    const Trajectory v = opt.zero_v ? Trajectory::stationary(times, SpectralField::zeros(hc.grid))
                         : opt.same ? u
                                    : free_evolution(table, random_field(hc.grid, ens, 2 * i + 1), times);
    const auto w = power_lipschitz_witness(part, spec, u, v, e);
    out.add(w.lhs, w.rhs);
  }
  out.finalize();
  return out;
}

struct EmbeddingSpec {
  double p = 6.0;
  double q = 1.0;
  double r = 4.0;
  double p1 = 2.0;
  double p2 = 6.0;
};

struct EmbeddingReport {
  RatioReport minkowski;
  RatioReport bernstein;
};

inline EmbeddingReport check_embeddings(const HarnessConfig& hc, const EnsembleSpec& ens, const EmbeddingSpec& es = {}) {
  if (es.q > es.r) throw HypothesisViolation("Minkowski embedding needs q <= r");
  if (es.p1 > es.p2) throw HypothesisViolation("Bernstein embedding needs p1 <= p2");
  const Partition part(hc.partition, hc.grid);
  const SymbolTable table(hc.coeffs, hc.grid);
  const auto times = hc.times();
  EmbeddingReport out;
  out.minkowski.name = "embedding-minkowski";
  out.bernstein.name = "embedding-bernstein";
  for (std::size_t i = 0; i < ens.count; ++i) {
    const Trajectory u = free_evolution(table, random_field(hc.grid, ens, i), times);
    const auto t = tabulate(part, u, {es.p, es.p1, es.p2});
    const auto series = t.mod_norm_series(0, es.q, hc.s);
    out.minkowski.add(time_lp_norm(series, times, es.r), t.planchon(0, hc.s, es.q, es.r));
    out.bernstein.add(t.planchon(2, hc.s, hc.q, es.r), t.planchon(1, hc.s, hc.q, es.r));
  }
  out.minkowski.finalize();
  out.bernstein.finalize();
  return out;
}

}  // namespace modnls

#pragma once

// Pointwise nonlinearities: products of m+1 copies of u and conj(u) with a
// complex coefficient, and lambda (exp(rho |u|^2) - 1) u.

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>
#include <string>
#include <vector>

#include "modnls/error.hpp"
#include "modnls/modspace.hpp"
#include "modnls/spectral.hpp"

namespace modnls {

enum class NonlinKind { Power, Exponential };

struct NonlinSpec {
  NonlinKind kind = NonlinKind::Power;
  std::vector<bool> conjugated;  ///< one entry per factor; true = conj(u)
  cplx coeff{1.0, 0.0};
  cplx lambda{1.0, 0.0};
  double rho = 1.0;
  int cutoff = 8;  ///< series truncation M_max
  bool zero = false;  ///< f = 0 (linear problem)

  static NonlinSpec power(std::vector<bool> pattern, cplx c) {
    if (pattern.empty()) throw Error("power nonlinearity needs at least one factor");
    NonlinSpec s;
    s.kind = NonlinKind::Power;
    s.conjugated = std::move(pattern);
    s.coeff = c;
    return s;
  }

  /// c |u|^(2k) u.
  static NonlinSpec gauge_power(int k, cplx c) {
    std::vector<bool> pattern(static_cast<std::size_t>(2 * k + 1), false);
    for (int i = 0; i < k; ++i) pattern[static_cast<std::size_t>(2 * i + 1)] = true;
    return power(std::move(pattern), c);
  }

  static NonlinSpec exponential(cplx lambda, double rho, int cutoff) {
    if (!(rho > 0.0)) throw Error("exponential nonlinearity needs rho > 0");
    if (cutoff < 1) throw Error("series cutoff must be >= 1");
    NonlinSpec s;
    s.kind = NonlinKind::Exponential;
    s.lambda = lambda;
    s.rho = rho;
    s.cutoff = cutoff;
    return s;
  }

  static NonlinSpec none() {
    NonlinSpec s = power({false}, 0.0);
    s.zero = true;
    return s;
  }

  /// m, the power-nonlinearity degree minus one.
  int degree_m() const { return static_cast<int>(conjugated.size()) - 1; }
  int plain_count() const {
    int c = 0;
    for (bool b : conjugated) c += b ? 0 : 1;
    return c;
  }
  int conj_count() const { return static_cast<int>(conjugated.size()) - plain_count(); }

  /// True for c |u|^(2k) u, where the pointwise flow is a phase rotation when c is real.
  bool is_gauge_power() const { return kind == NonlinKind::Power && plain_count() == conj_count() + 1; }

  std::string pattern_string() const {
    std::string out;
    for (std::size_t i = 0; i < conjugated.size(); ++i) {
      if (i) out += ",";
      out += conjugated[i] ? "conj" : "u";
    }
    return out;
  }
};

/// Parses "u,conj,u"; "ubar" is accepted for conj.
inline std::vector<bool> parse_pattern(const std::string& text) {
  std::vector<bool> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto b = tok.find_first_not_of(" \t");
    const auto e = tok.find_last_not_of(" \t");
    tok = b == std::string::npos ? "" : tok.substr(b, e - b + 1);
    if (tok == "u")
      out.push_back(false);
    else if (tok == "conj" || tok == "ubar")
      out.push_back(true);
    else
      throw Error("unknown pattern factor '" + tok + "' (expected u or conj)");
  }
  if (out.empty()) throw Error("empty nonlinearity pattern");
  return out;
}

inline cplx power_pointwise(const NonlinSpec& spec, cplx z) {
  cplx out = spec.coeff;
  for (bool c : spec.conjugated) out *= c ? std::conj(z) : z;
  return out;
}

inline cplx exponential_pointwise(const NonlinSpec& spec, cplx z) {
  return spec.lambda * std::expm1(spec.rho * std::norm(z)) * z;
}

/// lambda * sum_{k=1}^{cutoff} rho^k / k! |z|^(2k) z.
inline cplx exponential_series_pointwise(const NonlinSpec& spec, cplx z, int cutoff) {
  const double x = spec.rho * std::norm(z);
  double term = 1.0;
  double sum = 0.0;
  for (int k = 1; k <= cutoff; ++k) {
    term *= x / k;
    sum += term;
  }
  return spec.lambda * sum * z;
}

/// Upper bound on |closed form - series| at a point with |z| <= amplitude:
/// |lambda| a x^(M+1)/(M+1)! e^x with x = rho a^2 (Lagrange remainder of exp).
inline double exponential_tail_bound(const NonlinSpec& spec, double amplitude, int cutoff) {
  const double x = spec.rho * amplitude * amplitude;
  double term = 1.0;
  for (int k = 1; k <= cutoff + 1; ++k) term *= x / k;
  return std::abs(spec.lambda) * amplitude * term * std::exp(x);
}

inline constexpr double kExponentOverflow = 700.0;

inline cplx evaluate_pointwise(const NonlinSpec& spec, cplx z) {
  if (spec.zero) return {};
  return spec.kind == NonlinKind::Power ? power_pointwise(spec, z) : exponential_pointwise(spec, z);
}

/// f(u) evaluated into `out` (same length as `values`).
inline void apply_values(const NonlinSpec& spec, std::span<const cplx> values, std::span<cplx> out) {
  if (spec.zero) {
    std::fill(out.begin(), out.end(), cplx{});
    return;
  }
  if (spec.kind == NonlinKind::Power) {
    // Factor order is irrelevant pointwise: c z^a conj(z)^b.
    const int a = spec.plain_count();
    const int b = spec.conj_count();
    const int common = std::min(a, b);
    for (std::size_t i = 0; i < values.size(); ++i) {
      const cplx z = values[i];
      const cplx w = a > b ? z : std::conj(z);
      const double m2 = std::norm(z);
      double mod = 1.0;
      for (int k = 0; k < common; ++k) mod *= m2;
      cplx acc = spec.coeff * mod;
      for (int k = common; k < std::max(a, b); ++k) acc *= w;
      out[i] = acc;
    }
    return;
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (spec.rho * std::norm(values[i]) > kExponentOverflow)
      throw NumericalFailure("exponential nonlinearity overflow: rho |u|^2 > 700");
    out[i] = exponential_pointwise(spec, values[i]);
  }
}

inline SpectralField apply_power(const NonlinSpec& spec, const SpectralField& u) {
  if (spec.kind != NonlinKind::Power) throw Error("apply_power on a non-power nonlinearity");
  CVector out(u.size());
  apply_values(spec, u.values(), out);
  return SpectralField::from_values(u.grid(), std::move(out));
}

inline SpectralField apply_exponential(const NonlinSpec& spec, const SpectralField& u) {
  if (spec.kind != NonlinKind::Exponential) throw Error("apply_exponential on a non-exponential nonlinearity");
  CVector out(u.size());
  apply_values(spec, u.values(), out);
  return SpectralField::from_values(u.grid(), std::move(out));
}

inline SpectralField apply_exponential_series(const NonlinSpec& spec, const SpectralField& u, int cutoff) {
  if (spec.kind != NonlinKind::Exponential) throw Error("series evaluation on a non-exponential nonlinearity");
  CVector out(u.size());
  const auto& v = u.values();
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = exponential_series_pointwise(spec, v[i], cutoff);
  return SpectralField::from_values(u.grid(), std::move(out));
}

inline SpectralField apply_nonlinearity(const NonlinSpec& spec, const SpectralField& u) {
  CVector out(u.size());
  apply_values(spec, u.values(), out);
  return SpectralField::from_values(u.grid(), std::move(out));
}

inline Trajectory apply_nonlinearity(const NonlinSpec& spec, const Trajectory& u) {
  std::vector<SpectralField> out;
  out.reserve(u.size());
  for (const auto& f : u.fields()) out.push_back(apply_nonlinearity(spec, f));
  return Trajectory(u.times(), std::move(out));
}

/// Exponents for the Lipschitz estimate of the power nonlinearity.
struct LipschitzExponents {
  double s = 0.0;
  double q = 1.0;
  double r_tilde = 1.0;
  double p_tilde = 2.0;
  int l = 0;
  int m = 0;
};

struct LipschitzWitness {
  double lhs = 0.0;
  double rhs = 0.0;
};

inline Trajectory difference(const Trajectory& a, const Trajectory& b) {
  if (a.times() != b.times()) throw Error("trajectories sampled at different times");
  std::vector<SpectralField> out;
  out.reserve(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) out.push_back(subtract(a[j], b[j]));
  return Trajectory(a.times(), std::move(out));
}

/// lhs = ||pi(u) - pi(v)||_{l(L^r~ L^p~)};
/// rhs = ||u - v||_{l(L^{(l+1)r~} L^{(l+1)p~})} (||u||^l ||u||_{l(L^inf L^2)}^{m-l} + same for v).
inline LipschitzWitness power_lipschitz_witness(const Partition& part, const NonlinSpec& spec, const Trajectory& u,
                                                const Trajectory& v, const LipschitzExponents& e) {
  if (spec.kind != NonlinKind::Power) throw Error("Lipschitz witness needs a power nonlinearity");
  if (e.l < 0 || e.l > e.m) throw Error("effective nonlinearity l must lie in [0, m]");
  const double big_r = (e.l + 1) * e.r_tilde;
  const double big_p = (e.l + 1) * e.p_tilde;
  const Trajectory fu = apply_nonlinearity(spec, u);
  const Trajectory fv = apply_nonlinearity(spec, v);
  LipschitzWitness w;
  w.lhs = planchon_norm(part, difference(fu, fv), {e.s, e.q, e.r_tilde, e.p_tilde});
  const double duv = planchon_norm(part, difference(u, v), {e.s, e.q, big_r, big_p});
  auto factor = [&](const Trajectory& x) {
    const auto t = tabulate(part, x, {big_p, 2.0});
    return std::pow(t.planchon(0, e.s, e.q, big_r), e.l) * std::pow(t.planchon(1, e.s, e.q, kInf), e.m - e.l);
  };
  w.rhs = duv * (factor(u) + factor(v));
  return w;
}

/// |pi(a) - pi(b)| / (|a - b| (|a|^m + |b|^m)) for scalars; the pointwise
/// shadow of the Lipschitz estimate.
inline double scalar_lipschitz_ratio(const NonlinSpec& spec, cplx a, cplx b) {
  const int m = spec.degree_m();
  const double den = std::abs(a - b) * (std::pow(std::abs(a), m) + std::pow(std::abs(b), m));
  const double num = std::abs(power_pointwise(spec, a) - power_pointwise(spec, b));
  if (den == 0.0) return num == 0.0 ? 0.0 : kInf;
  return num / den;
}

}  // namespace modnls

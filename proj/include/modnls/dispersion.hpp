#pragma once

// Linear symbol alpha|xi|^2 + beta xi_1^3 + gamma xi_1^4, the propagator
// W(t) = F^-1 exp(i symbol t) F, and the exact exponent algebra that
// decides which (r, p) make the small-data theory work.

#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "modnls/error.hpp"
#include "modnls/rational.hpp"
#include "modnls/spectral.hpp"

namespace modnls {

struct EquationCoeffs {
  double alpha = 1.0;
  double beta = 0.0;
  double gamma = 1.0;

  EquationCoeffs() = default;
  EquationCoeffs(double a, double b, double g) : alpha(a), beta(b), gamma(g) {
    if (alpha == 0.0) throw Error("alpha must be nonzero");
    if (beta == 0.0 && gamma == 0.0) throw Error("(beta, gamma) must not both vanish");
    if (!std::isfinite(alpha) || !std::isfinite(beta) || !std::isfinite(gamma))
      throw Error("equation coefficients must be finite");
  }
};

inline double symbol(const EquationCoeffs& c, std::span<const double> xi) {
  double xi2 = 0.0;
  for (double v : xi) xi2 += v * v;
  const double x1 = xi.empty() ? 0.0 : xi[0];
  return c.alpha * xi2 + c.beta * x1 * x1 * x1 + c.gamma * x1 * x1 * x1 * x1;
}

/// Symbol sampled at every DFT index of a grid.
class SymbolTable {
public:
  SymbolTable(const EquationCoeffs& coeffs, const GridSpec& grid) : grid_(grid), phase_(grid.size()) {
    std::vector<int> idx(static_cast<std::size_t>(grid.d));
    std::vector<double> xi(static_cast<std::size_t>(grid.d));
    for (std::size_t i = 0; i < phase_.size(); ++i) {
      grid.unravel(i, idx);
      for (int a = 0; a < grid.d; ++a) xi[static_cast<std::size_t>(a)] = grid.frequency(idx[static_cast<std::size_t>(a)]);
      phase_[i] = symbol(coeffs, xi);
    }
  }

  const GridSpec& grid() const { return grid_; }
  std::span<const double> phases() const { return phase_; }

  /// spectrum *= exp(i symbol t).
  void apply(CVector& spectrum, double t) const {
    for (std::size_t i = 0; i < spectrum.size(); ++i) spectrum[i] *= std::polar(1.0, phase_[i] * t);
  }

private:
  GridSpec grid_;
  std::vector<double> phase_;
};

/// exp(-i symbol t_j) over a sample grid. On a uniform grid consecutive
/// indices cost one complex multiply per entry; indices divisible by `resync`
/// and jumps are evaluated exactly, so a value depends only on the index and
/// the direction of travel.
class PhaseSweep {
public:
  PhaseSweep(const SymbolTable& table, std::span<const double> times, std::size_t resync = 16)
      : table_(&table), times_(times.begin(), times.end()), resync_(resync) {
    const std::size_t N = times_.size();
    if (N >= 2) {
      h_ = (times_.back() - times_.front()) / static_cast<double>(N - 1);
      uniform_ = h_ != 0.0;
      for (std::size_t j = 1; j < N && uniform_; ++j)
        uniform_ = std::abs((times_[j] - times_[j - 1]) - h_) <= 1e-12 * std::abs(h_);
    }
  }

  const CVector& at(std::size_t j) {
    const auto ph = table_->phases();
    const bool fwd = have_ && j == last_ + 1;
    const bool bwd = have_ && j + 1 == last_;
    if (uniform_ && (fwd || bwd) && j % resync_ != 0) {
      if (step_.empty()) {
        step_.resize(ph.size());
        for (std::size_t i = 0; i < ph.size(); ++i) step_[i] = std::polar(1.0, -ph[i] * h_);
      }
      if (fwd)
        for (std::size_t i = 0; i < rot_.size(); ++i) rot_[i] *= step_[i];
      else
        for (std::size_t i = 0; i < rot_.size(); ++i) rot_[i] *= std::conj(step_[i]);
    } else {
      rot_.resize(ph.size());
      const double t = times_[j];
      for (std::size_t i = 0; i < ph.size(); ++i) rot_[i] = std::polar(1.0, -ph[i] * t);
    }
    have_ = true;
    last_ = j;
    return rot_;
  }

private:
  const SymbolTable* table_;
  std::vector<double> times_;
  std::size_t resync_;
  double h_ = 0.0;
  bool uniform_ = false;
  bool have_ = false;
  std::size_t last_ = 0;
  CVector rot_;
  CVector step_;
};

inline SpectralField propagate(const SymbolTable& table, double t, const SpectralField& f) {
  if (!(f.grid() == table.grid())) throw GridMismatch("propagator table built for another grid");
  if (t == 0.0) return f;
  CVector spec = f.spectrum_copy();
  table.apply(spec, t);
  return SpectralField::from_spectrum(f.grid(), std::move(spec));
}

inline SpectralField propagate(const EquationCoeffs& coeffs, double t, const SpectralField& f) {
  return propagate(SymbolTable(coeffs, f.grid()), t, f);
}

// ---------------------------------------------------------------------------
// Exponent algebra. Exponents are Rationals; infinity is allowed.

inline int c_gamma(bool gamma_nonzero) { return gamma_nonzero ? 2 : 3; }

/// d - 1/c_gamma.
inline Rational effective_dimension(int d, int cg) { return Rational(d) - Rational(1, cg); }

/// 2/r + D/p - D/2 without any range check on (p, r).
inline Rational scaling_defect(const Rational& D, const Rational& p, const Rational& r) {
  return Rational(2) * r.reciprocal() + D * p.reciprocal() - D / Rational(2);
}

inline bool in_two_to_inf(const Rational& x) { return x >= Rational(2); }

/// Defect of the admissibility relation; zero iff (p, r) is admissible.
inline Rational admissible_defect(int d, int cg, const Rational& p, const Rational& r) {
  if (!in_two_to_inf(p) || !in_two_to_inf(r)) throw Error("admissible pair must lie in [2, inf]^2");
  return scaling_defect(effective_dimension(d, cg), p, r);
}

/// Same left-minus-right quantity; <= 0 qualifies (sigma, rho).
inline Rational subadmissible_defect(int d, int cg, const Rational& sigma, const Rational& rho) {
  return admissible_defect(d, cg, sigma, rho);
}

inline int compute_m0_for(const Rational& D) { return static_cast<int>((Rational(4) / D).ceil()); }

/// m0 = ceil(4 / (d - 1/c_gamma)).
inline int compute_m0(int d, bool gamma_nonzero) {
  if (d < 2) throw HypothesisViolation("minimal power needs d >= 2");
  return compute_m0_for(effective_dimension(d, c_gamma(gamma_nonzero)));
}

/// Admissible range for 1/r: [1/(2(m+1)), 1/(m0+1)].
inline Interval interval_I(int m, int d, bool gamma_nonzero) {
  const int m0 = compute_m0(d, gamma_nonzero);
  if (m < m0)
    throw HypothesisViolation("power m=" + std::to_string(m) + " violates m >= m0=" + std::to_string(m0));
  return {Rational(1, 2 * (m + 1)), Rational(1, m0 + 1)};
}

/// l = min(floor(r) - 1, m), cross-checked against the characterisation
/// l = max{k in [m0, m] : 1/r in [1/(2(k+1)), 1/(k+1)]}.
inline int effective_l(const Rational& r, int m, int m0) {
  if (r.is_infinite()) throw HypothesisViolation("effective nonlinearity needs finite r");
  const int by_min = static_cast<int>(std::min<std::int64_t>(r.floor() - 1, m));
  std::optional<int> by_max;
  const Rational inv = r.reciprocal();
  for (int k = m0; k <= m; ++k)
    if (Rational(1, 2 * (k + 1)) <= inv && inv <= Rational(1, k + 1)) by_max = k;
  if (!by_max) throw HypothesisViolation("1/r=" + inv.str() + " lies outside every [1/(2(k+1)), 1/(k+1)]");
  if (*by_max != by_min)
    throw Error("effective nonlinearity mismatch: min-formula " + std::to_string(by_min) + " vs max-formula " +
                std::to_string(*by_max));
  return by_min;
}

/// J for general effective dimension D; exposed for degenerate-case checks.
inline Interval interval_J_for(const Rational& D, const Rational& r, int l) {
  const Rational upper = Rational(1, 2) - Rational(2) * r.reciprocal() / D;
  const Rational lower = upper - Rational(1, 2 * (l + 1)) * (Rational(l) - Rational(4) / D);
  return {lower, upper};
}

/// Range for 1/p given r and the effective nonlinearity l.
inline Interval interval_J(const Rational& r, int d, bool gamma_nonzero, int l) {
  const Interval J = interval_J_for(effective_dimension(d, c_gamma(gamma_nonzero)), r, l);
  if (J.empty()) throw HypothesisViolation("space range J is empty (1/p in [" + J.lo.str() + ", " + J.hi.str() + "])");
  return J;
}

/// p_a = (1/2 - 2/(r D))^-1, so that (p_a, r) is admissible.
inline Rational admissible_p(const Rational& r, int d, bool gamma_nonzero) {
  const Rational D = effective_dimension(d, c_gamma(gamma_nonzero));
  return (Rational(1, 2) - Rational(2) * r.reciprocal() / D).reciprocal();
}

struct DualPair {
  Rational p_tilde;
  Rational r_tilde;
  Rational p_prime;   ///< Hoelder conjugate of p_tilde
  Rational r_prime;   ///< Hoelder conjugate of r_tilde
  Rational defect;    ///< scaling defect of (p', r'); always zero
  bool in_range = false;  ///< (p', r') in [2, inf]^2
};

/// r~ = r/(l+1), p~ = (1/2 + 2(1 - 1/r~)/D)^-1.
inline DualPair dual_pair(const Rational& r, int l, int d, bool gamma_nonzero) {
  const Rational D = effective_dimension(d, c_gamma(gamma_nonzero));
  DualPair out;
  out.r_tilde = r / Rational(l + 1);
  if (out.r_tilde < Rational(1) || out.r_tilde > Rational(2))
    throw HypothesisViolation("dual time exponent r~=" + out.r_tilde.str() + " outside [1, 2]");
  out.p_tilde = (Rational(1, 2) + Rational(2) * (Rational(1) - out.r_tilde.reciprocal()) / D).reciprocal();
  out.p_prime = conjugate(out.p_tilde);
  out.r_prime = conjugate(out.r_tilde);
  // 1/p' = 1 - 1/p~ may be negative; keep the algebra on reciprocals.
  const Rational inv_p_prime = Rational(1) - out.p_tilde.reciprocal();
  const Rational inv_r_prime = Rational(1) - out.r_tilde.reciprocal();
  out.defect = Rational(2) * inv_r_prime + D * inv_p_prime - D / Rational(2);
  if (out.defect != Rational(0)) throw Error("dual pair fails the scaling relation: " + out.defect.str());
  out.in_range = inv_p_prime >= Rational(0) && inv_p_prime <= Rational(1, 2) && inv_r_prime >= Rational(0) &&
                 inv_r_prime <= Rational(1, 2);
  return out;
}

struct LedgerCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Every exponent derived from (d, m, gamma, r, p), with the checks that
/// tie them together.
struct ParamLedger {
  int d = 2;
  int m = 3;
  bool gamma_nonzero = true;
  int c_gamma = 2;
  int m0 = 0;
  Interval I;
  Rational r;
  std::optional<Rational> p;
  int l = 0;
  Interval J;
  Rational p_a;
  DualPair dual;
  std::vector<LedgerCheck> checks;

  bool all_passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
};

/// Builds the ledger; throws HypothesisViolation when m < m0, 1/r is not in
/// I or 1/p is not in J. When r is absent the endpoint 1/r = 1/(m0+1) is used.
inline ParamLedger compute_ledger(int d, int m, bool gamma_nonzero, std::optional<Rational> r = std::nullopt,
                                  std::optional<Rational> p = std::nullopt) {
  ParamLedger L;
  L.d = d;
  L.m = m;
  L.gamma_nonzero = gamma_nonzero;
  L.c_gamma = c_gamma(gamma_nonzero);
  L.m0 = compute_m0(d, gamma_nonzero);
  L.I = interval_I(m, d, gamma_nonzero);
  L.r = r.value_or(Rational(L.m0 + 1));
  if (!L.I.contains(L.r.reciprocal()))
    throw HypothesisViolation("1/r=" + L.r.reciprocal().str() + " not in I=[" + L.I.lo.str() + ", " + L.I.hi.str() + "]");
  L.l = effective_l(L.r, m, L.m0);
  L.J = interval_J(L.r, d, gamma_nonzero, L.l);
  L.p = p;
  if (p && !L.J.contains(p->reciprocal()))
    throw HypothesisViolation("1/p=" + p->reciprocal().str() + " not in J=[" + L.J.lo.str() + ", " + L.J.hi.str() + "]");
  L.p_a = admissible_p(L.r, d, gamma_nonzero);
  L.dual = dual_pair(L.r, L.l, d, gamma_nonzero);

  auto add = [&](std::string name, bool ok, std::string detail) { L.checks.push_back({std::move(name), ok, std::move(detail)}); };
  const Rational D = effective_dimension(d, L.c_gamma);
  add("I_within_0_half", Rational(0) <= L.I.lo && L.I.hi <= Rational(1, 2), "I subset [0, 1/2]");
  add("J_nonempty", !L.J.empty(), "J=[" + L.J.lo.str() + ", " + L.J.hi.str() + "]");
  add("pa_admissible", scaling_defect(D, L.p_a, L.r) == Rational(0) && in_two_to_inf(L.p_a) && in_two_to_inf(L.r),
      "defect(p_a, r)=" + scaling_defect(D, L.p_a, L.r).str());
  add("dual_defect_zero", L.dual.defect == Rational(0), "defect(p~', r~')=" + L.dual.defect.str());
  add("dual_in_range", L.dual.in_range, "p~'=" + L.dual.p_prime.str() + ", r~'=" + L.dual.r_prime.str());
  const Rational lp = Rational(L.l + 1) * L.dual.p_tilde;
  add("upper_J_is_pa", L.J.hi == L.p_a.reciprocal(), "1/p_a=" + L.p_a.reciprocal().str());
  if (p) {
    add("p_ge_pa", *p >= L.p_a, "p=" + p->str() + ", p_a=" + L.p_a.str());
    add("l1_ptilde_ge_p", lp >= *p, "(l+1)p~=" + lp.str());
  } else {
    add("l1_ptilde_is_lower_J", lp.reciprocal() == L.J.lo, "(l+1)p~=" + lp.str());
  }
  return L;
}

}  // namespace modnls

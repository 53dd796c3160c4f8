#pragma once

// Mild solutions by Picard iteration of the Duhamel operator
//
//   (T u)(t) = W(t) u0 + i int_{t*}^{t} W(t - tau) f(u(tau)) dtau,   t* in {0, -inf},
//
// an independent Strang split-step integrator for the same flow, and the
// scattering maps u0- -> u -> u0+. The flow solved is du/dt = A u + i f(u)
// with A the generator of W(t) = F^-1 exp(i symbol t) F.
//
// Time integrals use the trapezoid rule on the sample grid in the
// interaction picture: with G(tau) = exp(-i symbol tau) F[f(u(tau))],
// F[(T u)(t_j)] = exp(i symbol t_j) (F[u0] + i sum_{trapezoid} G).

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "modnls/dispersion.hpp"
#include "modnls/error.hpp"
#include "modnls/modspace.hpp"
#include "modnls/nonlinear.hpp"
#include "modnls/parallel.hpp"
#include "modnls/spectral.hpp"

namespace modnls {

enum class LowerLimit { Zero, MinusInfinity };

/// Reading of the regularity hypothesis for q = 1 in the exponential case.
enum class SReading { NonNegative, AtLeastP };

struct SolveConfig {
  EquationCoeffs coeffs{1.0, 0.0, 1.0};
  NonlinSpec nonlin = NonlinSpec::gauge_power(2, -1.0);
  GridSpec grid{2, 8, 256};
  PartitionSpec partition{PartitionKind::TrigonometricWindow, 5};
  double t_min = 0.0;
  double t_max = 8.0;
  std::size_t intervals = 512;
  double delta = 1.0;
  int max_iters = 60;
  double tolerance = 1e-12;  ///< stop when ||u^{n+1} - u^n||_X <= tolerance * ||u^0||_X
  double s = 0.0;
  Rational q{1};
  Rational r{4};
  Rational p{6};
  int oracle_substeps = 4;
  bool override_hypotheses = false;
  SReading s_reading = SReading::NonNegative;
  double tail_tolerance = 0.05;  ///< max relative integrand size at a window end for -inf/+inf limits

  std::vector<double> times() const { return uniform_times(t_min, t_max, intervals); }
  double qd() const { return q.to_double(); }
  double rd() const { return r.to_double(); }
  double pd() const { return p.to_double(); }
  ModNormSpec data_norm() const { return {2.0, qd(), s}; }
};

/// Outcome of the hypothesis gate.
struct HypothesisReport {
  std::vector<std::string> violations;
  std::optional<ParamLedger> ledger;
  bool ok() const { return violations.empty(); }
};

/// Checks d >= 2, the exponent ranges of the power (or exponential) theory and
/// the regularity condition on (s, q). Does not throw.
inline HypothesisReport check_hypotheses(const SolveConfig& cfg) {
  HypothesisReport out;
  const int d = cfg.grid.d;
  if (d < 2) {
    out.violations.push_back("d=" + std::to_string(d) + " is outside the theory (needs d >= 2)");
    return out;
  }
  if (cfg.nonlin.zero) return out;
  const bool gnz = cfg.coeffs.gamma != 0.0;
  const int m = cfg.nonlin.kind == NonlinKind::Power ? cfg.nonlin.degree_m() : 3;
  try {
    out.ledger = compute_ledger(d, m, gnz, cfg.r, cfg.p);
  } catch (const HypothesisViolation& e) {
    out.violations.emplace_back(e.what());
  }
  const double q = cfg.qd();
  if (q == 1.0) {
    const bool alt = cfg.nonlin.kind == NonlinKind::Exponential && cfg.s_reading == SReading::AtLeastP;
    const double need = alt ? cfg.pd() : 0.0;
    if (cfg.s < need)
      out.violations.push_back("q=1 requires s >= " + std::to_string(need) + ", got s=" + std::to_string(cfg.s));
  } else {
    const double need = d * (1.0 - 1.0 / q);
    if (!(cfg.s > need))
      out.violations.push_back("q>1 requires s > d/q' = " + std::to_string(need) + ", got s=" + std::to_string(cfg.s));
  }
  return out;
}

struct SolveReport {
  int iterations = 0;
  std::vector<double> differences;  ///< ||u^{n+1} - u^n||_X per iteration
  double initial_x_norm = 0.0;      ///< ||W(t) u0||_X
  double final_x_norm = 0.0;
  double theta_hat = 0.0;  ///< max ratio of successive differences
  bool converged = false;
  double oracle_deviation = std::numeric_limits<double>::quiet_NaN();  ///< L^inf_t L^2_x
  double mass_drift = 0.0;              ///< max_j |mass(u(t_j)) / mass(u(t*)) - 1|
  double truncation_residual = 0.0;     ///< max over samples, L^2
  double aliasing_residual = 0.0;       ///< max over samples of the relative high-band content of f(u)
  double data_norm = 0.0;               ///< ||u0||_{M^s_{2,q}}
  std::vector<std::string> warnings;
};

/// Picard iteration failed to contract or to converge.
class ContractionFailure : public NumericalFailure {
public:
  ContractionFailure(const std::string& what, SolveReport report)
      : NumericalFailure(what), report_(std::move(report)) {}
  const SolveReport& report() const { return report_; }

private:
  SolveReport report_;
};

inline double mass(const SpectralField& u) {
  const double n = lp_norm(u, 2.0);
  return n * n;
}

/// t -> W(t) u0 on the given samples.
inline Trajectory free_evolution(const SymbolTable& table, const SpectralField& u0, const std::vector<double>& times) {
  constexpr std::size_t block = 16;
  std::vector<SpectralField> fields(times.size());
  const CVector base = u0.spectrum_copy();
  const std::size_t chunks = (times.size() + block - 1) / block;
  parallel_for(chunks, [&](std::size_t c) {
    PhaseSweep sweep(table, times, block);
    for (std::size_t j = c * block; j < std::min(times.size(), (c + 1) * block); ++j) {
      const CVector& rot = sweep.at(j);
      CVector spec(base.size());
      for (std::size_t i = 0; i < spec.size(); ++i) spec[i] = base[i] * std::conj(rot[i]);
      fft_inverse(spec, u0.grid().d, u0.grid().n);
      fields[j] = SpectralField::from_values(u0.grid(), std::move(spec));
    }
  });
  return Trajectory(times, std::move(fields));
}

inline std::size_t index_of_time_zero(const std::vector<double>& times) {
  const double scale = times.size() > 1 ? (times.back() - times.front()) / static_cast<double>(times.size() - 1) : 1.0;
  for (std::size_t j = 0; j < times.size(); ++j)
    if (std::abs(times[j]) <= 1e-9 * std::max(scale, 1e-300)) return j;
  throw GridMismatch("time grid has no sample at t = 0");
}

/// Per-sample L^2 norms of the integrand f(u(t_j)), kept for tail checks.
struct DuhamelStats {
  std::vector<double> integrand_l2;

  /// |f(u)| at the first (or last) sample relative to its maximum.
  double end_ratio(bool last) const {
    if (integrand_l2.empty()) return 0.0;
    const double peak = *std::max_element(integrand_l2.begin(), integrand_l2.end());
    if (peak == 0.0) return 0.0;
    return (last ? integrand_l2.back() : integrand_l2.front()) / peak;
  }
};

class DuhamelOperator {
public:
  DuhamelOperator(const EquationCoeffs& coeffs, const NonlinSpec& nonlin, const GridSpec& grid)
      : table_(coeffs, grid), nonlin_(nonlin) {}

  const SymbolTable& table() const { return table_; }
  const NonlinSpec& nonlinearity() const { return nonlin_; }

  /// Interaction-picture integrand G(t_j) = exp(-i symbol t_j) F[f(u_j)], with
  /// `rot` = exp(-i symbol t_j).
  CVector integrand(const SpectralField& u, const CVector& rot, double* l2 = nullptr) const {
    const GridSpec& g = table_.grid();
    CVector buf(u.size());
    apply_values(nonlin_, u.values(), buf);
    fft_forward(buf, g.d, g.n);
    if (l2) {
      double acc = 0.0;
      for (const auto& c : buf) acc += std::norm(c);
      *l2 = std::sqrt(acc * g.cell_volume() / static_cast<double>(g.size()));
    }
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] *= rot[i];
    return buf;
  }

  CVector integrand(const SpectralField& u, double t, double* l2 = nullptr) const {
    CVector rot(u.size(), cplx(1.0, 0.0));
    table_.apply(rot, -t);
    return integrand(u, rot, l2);
  }

  Trajectory apply(const Trajectory& u, const SpectralField& u0, LowerLimit lower, DuhamelStats* stats = nullptr) const {
    if (!(u.grid() == table_.grid()) || !(u0.grid() == table_.grid()))
      throw GridMismatch("Duhamel operator built for another grid");
    const auto& times = u.times();
    const std::size_t N = times.size();
    const std::size_t j0 = lower == LowerLimit::Zero ? index_of_time_zero(times) : 0;
    const GridSpec& g = table_.grid();
    const CVector base = u0.spectrum_copy();
    std::vector<SpectralField> out(N);
    if (stats) stats->integrand_l2.assign(N, 0.0);

    auto emit = [&](std::size_t j, const CVector& acc, const CVector& rot) {
      CVector spec(base.size());
      for (std::size_t i = 0; i < spec.size(); ++i)
        spec[i] = std::conj(rot[i]) * (base[i] + cplx(-acc[i].imag(), acc[i].real()));
      fft_inverse(spec, g.d, g.n);
      out[j] = SpectralField::from_values(g, std::move(spec));
    };
    auto G = [&](std::size_t j, const CVector& rot) {
      double l2 = 0.0;
      CVector v = integrand(u[j], rot, &l2);
      if (stats) stats->integrand_l2[j] = l2;
      return v;
    };

    CVector acc(base.size());
    PhaseSweep fwd(table_, times);
    if (nonlin_.zero) {
      for (std::size_t j = 0; j < N; ++j) emit(j, acc, fwd.at(j));
      return Trajectory(times, std::move(out));
    }
    const CVector& rot0 = fwd.at(j0);
    CVector g_j0 = G(j0, rot0);
    emit(j0, acc, rot0);
    CVector prev = g_j0;
    for (std::size_t j = j0 + 1; j < N; ++j) {
      const CVector& rot = fwd.at(j);
      CVector cur = G(j, rot);
      const double w = 0.5 * (times[j] - times[j - 1]);
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += w * (prev[i] + cur[i]);
      emit(j, acc, rot);
      prev = std::move(cur);
    }
    if (j0 > 0) {
      std::fill(acc.begin(), acc.end(), cplx{});
      prev = std::move(g_j0);
      PhaseSweep bwd(table_, times);
      for (std::size_t j = j0; j-- > 0;) {
        const CVector& rot = bwd.at(j);
        CVector cur = G(j, rot);
        const double w = 0.5 * (times[j + 1] - times[j]);
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] -= w * (prev[i] + cur[i]);
        emit(j, acc, rot);
        prev = std::move(cur);
      }
    }
    return Trajectory(times, std::move(out));
  }

private:
  SymbolTable table_;
  NonlinSpec nonlin_;
};

/// Duhamel operator for a SolveConfig.
inline Trajectory duhamel_apply(const SolveConfig& cfg, const Trajectory& u, const SpectralField& u0, LowerLimit lower,
                                DuhamelStats* stats = nullptr) {
  return DuhamelOperator(cfg.coeffs, cfg.nonlin, cfg.grid).apply(u, u0, lower, stats);
}

/// ||a - b||_X without materialising the difference trajectory.
inline double x_norm_difference(const Partition& part, const Trajectory& a, const Trajectory& b, double s, double q,
                                double r, double p) {
  if (a.size() != b.size()) throw Error("trajectories of different length");
  BoxNormTable table(part, {2.0, p}, a.size());
  const GridSpec& g = part.grid();
  parallel_for(a.size(), [&](std::size_t j) {
    const auto& av = a[j].values();
    const auto& bv = b[j].values();
    CVector diff(av.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = av[i] - bv[i];
    fft_forward(diff, g.d, g.n);
    table.set(j, a.times()[j], diff);
  });
  return table.planchon(0, s, q, kInf) + table.planchon(1, s, q, r);
}

/// Max over samples of the high-band share of f(u): the L^2 mass of F[f(u)]
/// beyond two thirds of the Nyquist frequency relative to its total.
inline double aliasing_residual(const NonlinSpec& spec, const Trajectory& u) {
  if (spec.zero) return 0.0;
  const GridSpec& g = u.grid();
  const double cut = (2.0 / 3.0) * g.nyquist();
  std::vector<double> res(u.size());
  parallel_for(u.size(), [&](std::size_t j) {
    CVector buf(u[j].size());
    apply_values(spec, u[j].values(), buf);
    fft_forward(buf, g.d, g.n);
    std::vector<int> idx(static_cast<std::size_t>(g.d));
    double hi = 0.0;
    double tot = 0.0;
    for (std::size_t i = 0; i < buf.size(); ++i) {
      g.unravel(i, idx);
      double inf = 0.0;
      for (int v : idx) inf = std::max(inf, std::abs(g.frequency(v)));
      const double e = std::norm(buf[i]);
      tot += e;
      if (inf > cut) hi += e;
    }
    res[j] = tot > 0.0 ? std::sqrt(hi / tot) : 0.0;
  });
  return *std::max_element(res.begin(), res.end());
}

struct PicardOptions {
  LowerLimit lower = LowerLimit::Zero;
  int max_iters = 60;
  bool require_convergence = true;  ///< throw when max_iters is hit without convergence
  bool throw_on_failure = true;     ///< throw ContractionFailure when theta_hat >= 1
};

struct PicardResult {
  Trajectory solution;
  SolveReport report;
};

/// Runs u^0 = W(t) u0, u^{n+1} = T u^n and records the X-norm differences.
inline PicardResult picard_iterate(const SolveConfig& cfg, const SpectralField& u0, const PicardOptions& opts) {
  if (!(u0.grid() == cfg.grid)) throw GridMismatch("initial datum not on the configured grid");
  const Partition part(cfg.partition, cfg.grid);
  const DuhamelOperator T(cfg.coeffs, cfg.nonlin, cfg.grid);
  const double s = cfg.s, q = cfg.qd(), r = cfg.rd(), p = cfg.pd();

  PicardResult res;
  SolveReport& rep = res.report;
  rep.data_norm = mod_norm(part, u0, cfg.data_norm());
  Trajectory u = free_evolution(T.table(), u0, cfg.times());
  rep.initial_x_norm = x_norm(part, u, s, q, r, p);
  const double scale = rep.initial_x_norm;
  const double ratio_floor = 1e-13 * scale;

  for (int it = 1; it <= opts.max_iters; ++it) {
    Trajectory next = T.apply(u, u0, opts.lower);
    const double dn = x_norm_difference(part, next, u, s, q, r, p);
    rep.differences.push_back(dn);
    rep.iterations = it;
    u = std::move(next);
    if (!std::isfinite(dn) || dn > 1e6 * std::max(scale, 1e-300)) {
      rep.theta_hat = kInf;
      if (opts.throw_on_failure) throw ContractionFailure("Picard iteration diverged", rep);
      break;
    }
    if (rep.differences.size() >= 2) {
      const double prev = rep.differences[rep.differences.size() - 2];
      if (prev > ratio_floor) rep.theta_hat = std::max(rep.theta_hat, dn / prev);
    }
    if (rep.theta_hat >= 1.0) {
      if (opts.throw_on_failure)
        throw ContractionFailure("non-contraction: theta_hat=" + std::to_string(rep.theta_hat), rep);
      break;
    }
    if (dn <= cfg.tolerance * scale || dn == 0.0) {
      rep.converged = true;
      break;
    }
  }
  if (!rep.converged && opts.require_convergence && opts.throw_on_failure)
    throw ContractionFailure("Picard iteration hit max_iters=" + std::to_string(opts.max_iters) + " without converging",
                             rep);

  const auto table = tabulate(part, u, {2.0, p});
  rep.final_x_norm = table.planchon(0, s, q, kInf) + table.planchon(1, s, q, r);
  const std::size_t j0 = opts.lower == LowerLimit::Zero ? index_of_time_zero(u.times()) : 0;
  const double m0 = mass(u[j0]);
  for (const auto& f : u.fields()) {
    if (m0 > 0.0) rep.mass_drift = std::max(rep.mass_drift, std::abs(mass(f) / m0 - 1.0));
    rep.truncation_residual = std::max(rep.truncation_residual, truncation_residual(part, f.spectrum_copy()));
  }
  rep.aliasing_residual = aliasing_residual(cfg.nonlin, u);
  res.solution = std::move(u);
  return res;
}

/// Hypothesis gate shared by the solve entry points. Returns warnings when overridden.
inline std::vector<std::string> gate(const SolveConfig& cfg, double data_norm) {
  HypothesisReport h = check_hypotheses(cfg);
  if (cfg.delta <= 0.0) throw Error("ball radius delta must be positive");
  if (data_norm > 0.5 * cfg.delta * (1.0 + 1e-12))
    h.violations.push_back("data norm " + std::to_string(data_norm) + " exceeds delta/2 = " + std::to_string(0.5 * cfg.delta));
  if (h.ok()) return {};
  if (!cfg.override_hypotheses) {
    std::string msg = "hypothesis violated:";
    for (const auto& v : h.violations) msg += " [" + v + "]";
    throw HypothesisViolation(msg);
  }
  std::vector<std::string> w;
  for (const auto& v : h.violations) w.push_back("overridden: " + v);
  return w;
}

/// Fixed point of the Duhamel operator with lower limit 0.
inline PicardResult picard_solve(const SolveConfig& cfg, const SpectralField& u0) {
  if (cfg.t_min >= cfg.t_max) throw Error("time window must satisfy t_min < t_max");
  const Partition part(cfg.partition, cfg.grid);
  auto warnings = gate(cfg, mod_norm(part, u0, cfg.data_norm()));
  PicardResult res = picard_iterate(cfg, u0, {LowerLimit::Zero, cfg.max_iters, true, true});
  res.report.warnings.insert(res.report.warnings.end(), warnings.begin(), warnings.end());
  return res;
}

// ---------------------------------------------------------------------------
// Split-step oracle.

/// Exact or RK4 solution of dz/dt = i f(z) over one step.
inline cplx nonlinear_flow(const NonlinSpec& spec, cplx z, double dt, bool force_rk4 = false) {
  if (spec.zero) return z;
  if (!force_rk4) {
    if (spec.is_gauge_power() && spec.coeff.imag() == 0.0)
      return z * std::polar(1.0, spec.coeff.real() * std::pow(std::norm(z), spec.conj_count()) * dt);
    if (spec.kind == NonlinKind::Exponential && spec.lambda.imag() == 0.0)
      return z * std::polar(1.0, spec.lambda.real() * std::expm1(spec.rho * std::norm(z)) * dt);
  }
  const cplx I(0.0, 1.0);
  auto rhs = [&](cplx y) { return I * evaluate_pointwise(spec, y); };
  const cplx k1 = rhs(z);
  const cplx k2 = rhs(z + 0.5 * dt * k1);
  const cplx k3 = rhs(z + 0.5 * dt * k2);
  const cplx k4 = rhs(z + dt * k3);
  return z + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Strang splitting from a known state at times[start]; `substeps` steps per
/// sample interval, integrating forward and backward from the start sample.
inline Trajectory split_step_from(const SolveConfig& cfg, const std::vector<double>& times, std::size_t start,
                                  const SpectralField& state, int substeps) {
  if (substeps < 1) throw Error("oracle needs at least one substep per interval");
  const GridSpec& g = cfg.grid;
  const SymbolTable table(cfg.coeffs, g);
  std::vector<SpectralField> out(times.size());
  out[start] = state;

  auto march = [&](std::size_t from, std::size_t to) {
    CVector spec = out[from].spectrum_copy();
    CVector half(spec.size());
    double cached_dt = std::numeric_limits<double>::quiet_NaN();
    const int dir = to > from ? 1 : -1;
    for (std::size_t j = from; j != to;) {
      const std::size_t nxt = dir > 0 ? j + 1 : j - 1;
      const double dt = (times[nxt] - times[j]) / substeps;
      if (dt != cached_dt) {
        const auto ph = table.phases();
        for (std::size_t i = 0; i < half.size(); ++i) half[i] = std::polar(1.0, ph[i] * 0.5 * dt);
        cached_dt = dt;
      }
      for (int k = 0; k < substeps; ++k) {
        for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= half[i];
        fft_inverse(spec, g.d, g.n);
        if (!cfg.nonlin.zero)
          for (auto& z : spec) z = nonlinear_flow(cfg.nonlin, z, dt);
        fft_forward(spec, g.d, g.n);
        for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= half[i];
      }
      CVector values = spec;
      fft_inverse(values, g.d, g.n);
      out[nxt] = SpectralField::from_values(g, std::move(values));
      j = nxt;
    }
  };
  if (start + 1 < times.size()) march(start, times.size() - 1);
  if (start > 0) march(start, 0);
  return Trajectory(times, std::move(out));
}

/// Independent integrator for the Cauchy problem with data at t = 0.
inline Trajectory split_step_oracle(const SolveConfig& cfg, const SpectralField& u0, int substeps = 0) {
  const auto times = cfg.times();
  return split_step_from(cfg, times, index_of_time_zero(times), u0, substeps > 0 ? substeps : cfg.oracle_substeps);
}

/// sup_j ||a(t_j) - b(t_j)||_{L^2}.
inline double linf_l2_deviation(const Trajectory& a, const Trajectory& b) {
  if (a.size() != b.size()) throw Error("trajectories of different length");
  double worst = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) worst = std::max(worst, lp_norm(subtract(a[j], b[j]), 2.0));
  return worst;
}

/// Max relative mass drift along a trajectory, measured from sample `ref`.
inline double mass_drift(const Trajectory& u, std::size_t ref) {
  const double m0 = mass(u[ref]);
  double worst = 0.0;
  if (m0 == 0.0) return 0.0;
  for (const auto& f : u.fields()) worst = std::max(worst, std::abs(mass(f) / m0 - 1.0));
  return worst;
}

// ---------------------------------------------------------------------------
// Scattering.

struct ScatterMinusResult {
  Trajectory solution;
  SolveReport report;
  std::vector<double> minus_tail;  ///< ||u(t_j) - W(t_j) u0-||_{M^s_{2,q}}
  double integrand_start_ratio = 0.0;
};

/// Fixed point of S_- (lower limit -inf approximated by t_min).
inline ScatterMinusResult scatter_minus(const SolveConfig& cfg, const SpectralField& u0_minus) {
  if (cfg.t_min >= cfg.t_max) throw Error("time window must satisfy t_min < t_max");
  const Partition part(cfg.partition, cfg.grid);
  auto warnings = gate(cfg, mod_norm(part, u0_minus, cfg.data_norm()));
  PicardResult pr = picard_iterate(cfg, u0_minus, {LowerLimit::MinusInfinity, cfg.max_iters, true, true});
  ScatterMinusResult out;
  out.report = std::move(pr.report);
  out.report.warnings.insert(out.report.warnings.end(), warnings.begin(), warnings.end());
  out.solution = std::move(pr.solution);

  DuhamelStats stats;
  (void)duhamel_apply(cfg, out.solution, u0_minus, LowerLimit::MinusInfinity, &stats);
  out.integrand_start_ratio = stats.end_ratio(false);
  if (out.integrand_start_ratio > cfg.tail_tolerance)
    throw NumericalFailure("tail not negligible at t_min: integrand ratio " + std::to_string(out.integrand_start_ratio));

  const SymbolTable table(cfg.coeffs, cfg.grid);
  const auto free = free_evolution(table, u0_minus, out.solution.times());
  const auto tail = tabulate(part, difference(out.solution, free), {2.0});
  out.minus_tail = tail.mod_norm_series(0, cfg.qd(), cfg.s);
  return out;
}

struct WaveOperatorResult {
  SpectralField u0_plus;
  std::vector<double> plus_tail;  ///< ||W(-t_j) u(t_j) - u0+||_{M^s_{2,q}}
  double defect_minus = 0.0;      ///< ||u(t_min) - W(t_min) u0-||_{M^s_{2,q}}
  double defect_plus = 0.0;       ///< ||W(-t_max) u(t_max) - u0+||_{M^s_{2,q}}
  double quadrature_tolerance = 0.0;
  double integrand_end_ratio = 0.0;
  double difference_norm = 0.0;   ///< ||u0+ - u0-||_{M^s_{2,q}}
};

/// u0+ = u0- + i int W(-tau) f(u(tau)) dtau over the window.
inline WaveOperatorResult wave_operator_plus(const SolveConfig& cfg, const Trajectory& u, const SpectralField& u0_minus) {
  const GridSpec& g = cfg.grid;
  const Partition part(cfg.partition, g);
  const DuhamelOperator T(cfg.coeffs, cfg.nonlin, g);
  const auto& times = u.times();
  const std::size_t N = times.size();
  if (N < 3 || (N - 1) % 2 != 0) throw Error("wave operator needs an even number of time intervals");
  const ModNormSpec norm = cfg.data_norm();

  WaveOperatorResult out;
  CVector fine(g.size());
  CVector coarse(g.size());
  std::vector<double> l2(N);
  if (!cfg.nonlin.zero) {
    // Trapezoid weights on all samples and on every other sample.
    PhaseSweep sweep(T.table(), times);
    for (std::size_t j = 0; j < N; ++j) {
      const CVector cur = T.integrand(u[j], sweep.at(j), &l2[j]);
      const double wf = 0.5 * ((j > 0 ? times[j] - times[j - 1] : 0.0) + (j + 1 < N ? times[j + 1] - times[j] : 0.0));
      const double wc = j % 2 ? 0.0
                              : 0.5 * ((j > 0 ? times[j] - times[j - 2] : 0.0) + (j + 2 < N ? times[j + 2] - times[j] : 0.0));
      for (std::size_t i = 0; i < fine.size(); ++i) {
        fine[i] += wf * cur[i];
        coarse[i] += wc * cur[i];
      }
    }
  }
  const CVector base = u0_minus.spectrum_copy();
  CVector plus(base.size());
  CVector rich(base.size());
  for (std::size_t i = 0; i < plus.size(); ++i) {
    plus[i] = base[i] + cplx(0.0, 1.0) * fine[i];
    rich[i] = fine[i] - coarse[i];
  }
  out.u0_plus = SpectralField::from_spectrum(g, plus);
  out.quadrature_tolerance = mod_norm(part, SpectralField::from_spectrum(g, std::move(rich)), norm) / 3.0;
  out.difference_norm = mod_norm(part, subtract(out.u0_plus, u0_minus), norm);

  const double peak = *std::max_element(l2.begin(), l2.end());
  out.integrand_end_ratio = peak > 0.0 ? l2.back() / peak : 0.0;
  if (out.integrand_end_ratio > cfg.tail_tolerance)
    throw NumericalFailure("tail not negligible at t_max: integrand ratio " + std::to_string(out.integrand_end_ratio));

  out.plus_tail.resize(N);
  parallel_for(N, [&](std::size_t j) {
    const auto back = propagate(T.table(), -times[j], u[j]);
    out.plus_tail[j] = mod_norm(part, subtract(back, out.u0_plus), norm);
  });
  out.defect_plus = out.plus_tail.back();
  out.defect_minus = mod_norm(part, subtract(u[0], propagate(T.table(), times[0], u0_minus)), norm);
  return out;
}

struct ScatteringResult {
  SpectralField u0_plus;
  double u0_plus_norm = 0.0;
  ScatterMinusResult minus;
  WaveOperatorResult plus;
};

/// u0- -> u0+ through the nonlinear flow on the window.
inline ScatteringResult scattering_map(const SolveConfig& cfg, const SpectralField& u0_minus) {
  if (!cfg.nonlin.zero) {
    const int cap = cfg.nonlin.kind == NonlinKind::Power ? cfg.nonlin.degree_m() + 1 : 3;
    if (cfg.qd() > cap && !cfg.override_hypotheses)
      throw HypothesisViolation("scattering needs q <= " + std::to_string(cap) + ", got q=" + cfg.q.str());
  }
  ScatteringResult out;
  out.minus = scatter_minus(cfg, u0_minus);
  out.plus = wave_operator_plus(cfg, out.minus.solution, u0_minus);
  out.u0_plus = out.plus.u0_plus;
  const Partition part(cfg.partition, cfg.grid);
  out.u0_plus_norm = mod_norm(part, out.u0_plus, cfg.data_norm());
  if (!std::isfinite(out.u0_plus_norm)) throw NumericalFailure("scattered state has non-finite norm");
  return out;
}

// ---------------------------------------------------------------------------
// Initial data and delta selection.

/// a exp(-|x - x0|^2 / (2 w^2)) exp(i k0.x), truncated to |xi|_inf <= band.
inline SpectralField gaussian_packet(const GridSpec& grid, double width, std::vector<double> center,
                                     std::vector<double> momentum, double band) {
  center.resize(static_cast<std::size_t>(grid.d), 0.0);
  momentum.resize(static_cast<std::size_t>(grid.d), 0.0);
  const auto raw = SpectralField::from_function(grid, [&](std::span<const double> x) {
    double r2 = 0.0;
    double ph = 0.0;
    for (std::size_t a = 0; a < x.size(); ++a) {
      r2 += (x[a] - center[a]) * (x[a] - center[a]);
      ph += momentum[a] * x[a];
    }
    return std::exp(-r2 / (2.0 * width * width)) * std::polar(1.0, ph);
  });
  CVector spec = raw.spectrum_copy();
  std::vector<int> idx(static_cast<std::size_t>(grid.d));
  for (std::size_t i = 0; i < spec.size(); ++i) {
    grid.unravel(i, idx);
    for (int v : idx)
      if (std::abs(grid.frequency(v)) > band + 1e-12) {
        spec[i] = {};
        break;
      }
  }
  return SpectralField::from_spectrum(grid, std::move(spec));
}

/// Rescales f so that ||f||_{M^s_{2,q}} = amplitude.
inline SpectralField normalized(const Partition& part, const SpectralField& f, const ModNormSpec& norm, double amplitude) {
  const double n = mod_norm(part, f, norm);
  if (n == 0.0) throw Error("cannot normalise a zero field");
  return scale(amplitude / n, f);
}

struct DeltaProbe {
  double delta = 0.0;
  double theta_hat = 0.0;
  int iterations = 0;
};

struct DeltaSearch {
  double delta = 0.0;      ///< largest tested delta with theta_hat < threshold
  double theta_hat = 0.0;  ///< at that delta
  std::vector<DeltaProbe> probes;
};

/// Largest tested delta (data of norm delta/2 along `profile`) whose Picard
/// contraction estimate from `probe_iters` iterations stays below `threshold`.
inline DeltaSearch find_delta(const SolveConfig& cfg, const SpectralField& profile, double lo, double hi, int steps,
                              int probe_iters, double threshold = 0.9) {
  const Partition part(cfg.partition, cfg.grid);
  const ModNormSpec norm = cfg.data_norm();
  DeltaSearch out;
  auto theta = [&](double delta) {
    const SpectralField u0 = normalized(part, profile, norm, 0.5 * delta);
    PicardOptions opts{LowerLimit::Zero, probe_iters, false, false};
    double th = kInf;
    int iters = 0;
    try {
      const auto r = picard_iterate(cfg, u0, opts);
      th = r.report.theta_hat;
      iters = r.report.iterations;
    } catch (const NumericalFailure&) {
    }
    out.probes.push_back({delta, th, iters});
    return th;
  };
  double th_lo = theta(lo);
  if (!(th_lo < threshold)) throw NumericalFailure("no contraction even at delta=" + std::to_string(lo));
  double th_hi = theta(hi);
  for (int grow = 0; grow < 8 && th_hi < threshold; ++grow) {
    lo = hi;
    th_lo = th_hi;
    hi *= 2.0;
    th_hi = theta(hi);
  }
  for (int i = 0; i < steps; ++i) {
    const double mid = std::sqrt(lo * hi);
    const double th = theta(mid);
    if (th < threshold) {
      lo = mid;
      th_lo = th;
    } else {
      hi = mid;
    }
  }
  out.delta = lo;
  out.theta_hat = th_lo;
  return out;
}

}  // namespace modnls

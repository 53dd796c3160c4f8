#pragma once

// The `verify` suite: each check on the base harness grid and on its
// refinement, with the grid-doubling drift of the max ratio.

#include <string>
#include <vector>

#include "modnls/harness.hpp"

namespace modnls {

struct VerifySettings {
  HarnessConfig harness;
  EnsembleSpec ensemble;
  bool probe = false;
  bool refine = true;
  double drift_limit = 0.2;
  Rational p{6};
  Rational r{4};
  double lipschitz_band = 0.75;
  std::string lipschitz_pattern = "u,u,conj,u";
};

struct CheckOutcome {
  RatioReport base;
  RatioReport refined;
  double drift = 0.0;
  bool has_refined = false;

  bool passed(double limit) const {
    if (base.probe) return true;
    return base.passed() && (!has_refined || (refined.passed() && drift < limit));
  }
};

struct CheckGroup {
  std::string check;
  std::vector<CheckOutcome> outcomes;
  std::vector<TrendPoint> trend;  ///< probe mode only
  double max_end_ratio = 0.0;     ///< homogeneous Strichartz only
};

inline const std::vector<std::string>& verify_check_names() {
  static const std::vector<std::string> names{"strichartz-hom", "strichartz-inhom", "hoelder", "lipschitz", "embeddings"};
  return names;
}

namespace detail {

template <class Run>
std::vector<CheckOutcome> on_both_grids(const VerifySettings& vs, Run&& run) {
  const auto base = run(vs.harness);
  std::vector<CheckOutcome> out(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) out[i].base = base[i];
  if (!vs.refine) return out;
  const auto fine = run(vs.harness.refined());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].refined = fine[i];
    out[i].has_refined = true;
    out[i].drift = doubling_drift(out[i].base, out[i].refined);
  }
  return out;
}

}  // namespace detail

inline CheckGroup run_check(const std::string& check, const VerifySettings& vs) {
  CheckGroup g;
  g.check = check;
  const auto& ens = vs.ensemble;
  ens.validate();
  if (check == "strichartz-hom") {
    // Probe: a non-admissible pair.
    const Rational p = vs.probe ? Rational(4) : vs.p;
    const Rational r = vs.probe ? Rational(4) : vs.r;
    g.outcomes = detail::on_both_grids(vs, [&](const HarnessConfig& hc) {
      const auto rep = check_homogeneous_strichartz(hc, ens, p, r, vs.probe);
      if (&hc == &vs.harness) g.max_end_ratio = rep.max_end_ratio;
      return std::vector<RatioReport>{rep.lebesgue, rep.lifted};
    });
  } else if (check == "strichartz-inhom") {
    // Lebesgue form with the dual of (6, 4); lifted form with the dual pair of the contraction argument.
    const bool gnz = vs.harness.coeffs.gamma != 0.0;
    const int m0 = compute_m0(vs.harness.grid.d, gnz);
    const DualPair dp = dual_pair(vs.r, effective_l(vs.r, m0, m0), vs.harness.grid.d, gnz);
    const Rational pt = vs.probe ? Rational(4, 3) : conjugate(vs.p);
    const Rational rt = vs.probe ? Rational(4, 3) : conjugate(vs.r);
    g.outcomes = detail::on_both_grids(vs, [&](const HarnessConfig& hc) {
      const Rational p = vs.probe ? Rational(4) : vs.p;
      const Rational r = vs.probe ? Rational(4) : vs.r;
      const auto leb = check_inhomogeneous_strichartz(hc, ens, p, r, pt, rt, {true, false, vs.probe});
      const auto lift = check_inhomogeneous_strichartz(hc, ens, p, r, vs.probe ? pt : dp.p_tilde,
                                                       vs.probe ? rt : dp.r_tilde, {false, true, vs.probe});
      return std::vector<RatioReport>{leb.lebesgue, lift.lifted};
    });
  } else if (check == "hoelder") {
    HarnessConfig hc = vs.harness;
    if (vs.probe) {
      // (s, q) = (0, 2) violates s > d/q'.
      hc.q = 2.0;
      hc.s = 0.0;
      VerifySettings v2 = vs;
      v2.harness = hc;
      g.trend = hoelder_probe_trend(hc, ens, HoelderSplit::uniform(2), {0.5, 1.0, 1.5, 2.0});
      g.outcomes = detail::on_both_grids(v2, [&](const HarnessConfig& h) {
        return std::vector<RatioReport>{check_hoelder_like(h, ens, HoelderSplit::uniform(2), HoelderMode::Modulation, true)};
      });
    } else {
      g.outcomes = detail::on_both_grids(vs, [&](const HarnessConfig& h) {
        std::vector<RatioReport> reps;
        for (int n : {2, 3})
          for (auto mode : {HoelderMode::Planchon, HoelderMode::Modulation})
            reps.push_back(check_hoelder_like(h, ens, HoelderSplit::uniform(n), mode));
        return reps;
      });
    }
  } else if (check == "lipschitz") {
    const auto spec = NonlinSpec::power(parse_pattern(vs.lipschitz_pattern), -1.0);
    EnsembleSpec el = ens;
    el.band = vs.lipschitz_band;
    g.outcomes = detail::on_both_grids(vs, [&](const HarnessConfig& h) {
      const auto e = lipschitz_exponents(h, spec.degree_m(), vs.r);
      auto a = check_power_lipschitz(h, el, spec, e);
      auto b = check_power_lipschitz(h, el, spec, e, {true, false});
      a.probe = b.probe = vs.probe;
      return std::vector<RatioReport>{a, b};
    });
  } else if (check == "embeddings") {
    g.outcomes = detail::on_both_grids(vs, [&](const HarnessConfig& h) {
      auto rep = check_embeddings(h, ens);
      rep.minkowski.probe = rep.bernstein.probe = vs.probe;
      return std::vector<RatioReport>{rep.minkowski, rep.bernstein};
    });
  } else {
    throw Error("unknown check '" + check + "'");
  }
  return g;
}

/// `all` expands to every check.
inline std::vector<CheckGroup> run_verify(const std::string& check, const VerifySettings& vs) {
  std::vector<CheckGroup> out;
  if (check == "all") {
    for (const auto& c : verify_check_names()) out.push_back(run_check(c, vs));
  } else {
    out.push_back(run_check(check, vs));
  }
  return out;
}

}  // namespace modnls

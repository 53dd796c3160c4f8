#include <gtest/gtest.h>

#include "common.hpp"
#include "modnls/harness.hpp"

using namespace modnls;

namespace {

HarnessConfig small_harness() {
  HarnessConfig hc;
  hc.t_max = 2.0;
  hc.intervals = 16;
  return hc;
}

EnsembleSpec small_ensemble(std::size_t count = 4) {
  EnsembleSpec e;
  e.count = count;
  return e;
}

}  // namespace

TEST(Ensemble, DeterministicAndGridIndependent) {
  const auto g = make_grid_m(2, 4, 64);
  EnsembleSpec ens;
  ens.band = 1.5;
  const auto a = random_field(g, ens, 3);
  EXPECT_EQ(testutil::rel_diff(a, random_field(g, ens, 3)), 0.0);
  EXPECT_GT(testutil::rel_diff(a, random_field(g, ens, 4)), 0.1);
  EXPECT_NEAR(lp_norm(a, 2.0), 1.0, 1e-12);
  const auto fine = random_field(make_grid_m(2, 4, 128), ens, 3);
  const GridSpec& gf = fine.grid();
  std::vector<int> idx(2);
  double coarse_energy = 0.0, worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.unravel(i, idx);
    const std::size_t k = gf.ravel(std::vector<int>{gf.wrap_index(g.signed_index(idx[0])), gf.wrap_index(g.signed_index(idx[1]))});
    const cplx ca = a.spectrum()[i] / static_cast<double>(g.size());
    const cplx cf = fine.spectrum()[k] / static_cast<double>(gf.size());
    coarse_energy += std::norm(ca);
    worst = std::max(worst, std::abs(ca - cf));
  }
  EXPECT_GT(coarse_energy, 0.0);
  EXPECT_LE(worst, 1e-13);
}

TEST(Ensemble, SingleBoxLaw) {
  const auto g = make_grid_m(2, 4, 64);
  EnsembleSpec ens;
  ens.law = FieldLaw::SingleBox;
  ens.band = 2.0;
  const Partition part({PartitionKind::TrigonometricWindow, 3}, g);
  for (std::uint64_t i = 0; i < 5; ++i) {
    const auto f = random_field(g, ens, i);
    int active = 0;
    for (std::size_t b = 0; b < part.box_count(); ++b)
      active += lp_norm(box(part, part.box_index(b), f), 2.0) > 1e-12 ? 1 : 0;
    EXPECT_GE(active, 1);
    EXPECT_LE(active, 9);
  }
  EXPECT_EQ(parse_field_law(to_string(FieldLaw::MultiBoxSparse)), FieldLaw::MultiBoxSparse);
  EXPECT_THROW(parse_field_law("uniform"), Error);
  ens.band = -1.0;
  EXPECT_THROW(ens.validate(), Error);
}

TEST(RatioReport, ExclusionsFailuresAndFlags) {
  RatioReport r;
  r.add(0.0, 0.0);
  r.add(1.0, 2.0);
  r.add(2.0, 2.0);
  r.add(3.0, 2.0);
  r.finalize();
  EXPECT_EQ(r.used(), 3u);
  EXPECT_DOUBLE_EQ(r.median_ratio, 1.0);
  EXPECT_DOUBLE_EQ(r.max_ratio, 1.5);
  EXPECT_TRUE(r.passed());
  r.add(50.0, 1.0);
  r.finalize();
  EXPECT_EQ(r.flagged, 1);
  EXPECT_FALSE(r.passed());
  RatioReport z;
  z.add(1.0, 0.0);
  z.finalize();
  EXPECT_EQ(z.failures, 1);
  EXPECT_FALSE(z.passed());
  RatioReport a, b;
  a.max_ratio = 2.0;
  b.max_ratio = 2.1;
  EXPECT_NEAR(doubling_drift(a, b), 0.05, 1e-12);
}

TEST(Operators, ForcedDuhamelClosedForm) {
  const auto hc = small_harness();
  const SymbolTable table(hc.coeffs, hc.grid);
  const auto g = testutil::random_field(hc.grid, 2, 2.0);
  const auto free = free_evolution(table, g, hc.times());
  const auto D = forced_duhamel(table, free);
  for (std::size_t j = 0; j < D.size(); ++j)
    EXPECT_LE(lp_norm(subtract(D[j], scale(free.times()[j], free[j])), 2.0), 1e-12 * (1.0 + free.times()[j]));
}

TEST(Operators, LebesgueSpacetimeStationary) {
  const auto hc = small_harness();
  const auto f = testutil::random_field(hc.grid, 5, 2.0);
  const auto u = Trajectory::stationary(hc.times(), f);
  EXPECT_NEAR(lebesgue_spacetime(u, 6.0, 4.0), lp_norm(f, 6.0) * std::pow(2.0, 0.25), 1e-12 * lp_norm(f, 6.0));
  const auto p = product({u, u});
  EXPECT_LE(testutil::rel_diff(p[3], pointwise_mul(f, f)), 1e-15);
}

TEST(Exponents, AdmissibilityGuards) {
  const auto hc = small_harness();
  EXPECT_NO_THROW(require_admissible(hc, Rational(6), Rational(4), false, "x"));
  EXPECT_THROW(require_admissible(hc, Rational(4), Rational(4), false, "x"), HypothesisViolation);
  EXPECT_NO_THROW(require_admissible(hc, Rational(4), Rational(4), true, "x"));
  HoelderSplit bad;
  bad.p_j = {Rational(4), Rational(3)};
  EXPECT_THROW(bad.validate(), Error);
  EXPECT_NO_THROW(HoelderSplit::uniform(3).validate());
  auto neg = hc;
  neg.q = 2.0;
  EXPECT_THROW(check_hoelder_like(neg, small_ensemble(), HoelderSplit::uniform(2), HoelderMode::Modulation), HypothesisViolation);
  const auto e = lipschitz_exponents(hc, 3, Rational(4));
  EXPECT_EQ(e.l, 3);
  EXPECT_DOUBLE_EQ(e.r_tilde, 1.0);
  EXPECT_DOUBLE_EQ(e.p_tilde, 2.0);
}

TEST(Checks, SmallEnsemblesPass) {
  const auto hc = small_harness();
  const auto ens = small_ensemble();
  const auto hom = check_homogeneous_strichartz(hc, ens, Rational(6), Rational(4), false);
  EXPECT_TRUE(hom.lebesgue.passed());
  EXPECT_TRUE(hom.lifted.passed());
  EXPECT_EQ(hom.lebesgue.used(), ens.count);
  for (auto mode : {HoelderMode::Planchon, HoelderMode::Modulation})
    EXPECT_TRUE(check_hoelder_like(hc, ens, HoelderSplit::uniform(2), mode).passed());
  const auto spec = NonlinSpec::gauge_power(1, 1.0);
  auto e = lipschitz_exponents(hc, 3, Rational(4));
  const auto quart = NonlinSpec::power({false, true, false, false}, 1.0);
  EXPECT_TRUE(check_power_lipschitz(hc, ens, quart, e).passed());
  const auto same = check_power_lipschitz(hc, ens, quart, e, {false, true});
  EXPECT_EQ(same.used(), 0u);
  EXPECT_EQ(same.failures, 0);
  EXPECT_THROW(check_power_lipschitz(hc, ens, spec, e), Error);
  const auto emb = check_embeddings(hc, ens);
  EXPECT_TRUE(emb.minkowski.passed());
  EXPECT_LE(emb.minkowski.max_ratio, 1.0 + 1e-12);
  EXPECT_TRUE(emb.bernstein.passed());
}

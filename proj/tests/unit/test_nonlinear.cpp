#include <gtest/gtest.h>

#include <limits>
#include <random>

#include "common.hpp"
#include "modnls/dispersion.hpp"
#include "modnls/nonlinear.hpp"

using namespace modnls;

TEST(Pattern, ParseAndCounts) {
  const auto p = parse_pattern("u, conj ,u,ubar");
  EXPECT_EQ(p, (std::vector<bool>{false, true, false, true}));
  EXPECT_THROW(parse_pattern("u,v"), Error);
  EXPECT_THROW(parse_pattern(""), Error);
  const auto g = NonlinSpec::gauge_power(2, -1.0);
  EXPECT_EQ(g.pattern_string(), "u,conj,u,conj,u");
  EXPECT_EQ(g.degree_m(), 4);
  EXPECT_TRUE(g.is_gauge_power());
  EXPECT_FALSE(NonlinSpec::power({false, false, true, false}, 1.0).is_gauge_power());
  EXPECT_THROW(NonlinSpec::exponential(1.0, 0.0, 4), Error);
}

TEST(Pointwise, Examples) {
  const cplx z(1.0, 2.0);
  const auto cubic = NonlinSpec::gauge_power(1, 1.0);
  EXPECT_LT(std::abs(power_pointwise(cubic, z) - 5.0 * z), 1e-14);
  const auto quart = NonlinSpec::power({false, false, true, false}, cplx(0.0, 2.0));
  EXPECT_LT(std::abs(power_pointwise(quart, z) - cplx(0.0, 2.0) * 5.0 * z * z), 1e-13);
  const auto ex = NonlinSpec::exponential(cplx(-1.0, 0.0), 0.5, 8);
  EXPECT_LT(std::abs(exponential_pointwise(ex, z) + std::expm1(2.5) * z), 1e-13);
  EXPECT_EQ(evaluate_pointwise(NonlinSpec::none(), z), cplx{});
}

TEST(Pointwise, FieldMatchesScalar) {
  const auto g = make_grid_m(1, 4, 64);
  const auto u = testutil::random_field(g, 5, 2.0);
  for (const auto& spec : {NonlinSpec::power({true, false, false, true, true}, cplx(0.3, -1.0)),
                           NonlinSpec::gauge_power(3, -1.0)}) {
    const auto f = apply_power(spec, u);
    for (std::size_t i = 0; i < u.size(); ++i) {
      const cplx want = power_pointwise(spec, u.values()[i]);
      EXPECT_LT(std::abs(f.values()[i] - want), 1e-12 * (1.0 + std::abs(want)));
    }
  }
}

TEST(Power, HomogeneityAndGauge) {
  const auto g = make_grid_m(2, 4, 64);
  const auto u = testutil::random_field(g, 8, 2.0);
  const auto spec = NonlinSpec::power({false, true, false, false}, cplx(1.0, 1.0));
  const double lam = 1.7;
  EXPECT_LE(testutil::rel_diff(apply_power(spec, scale(lam, u)), scale(std::pow(lam, 4), apply_power(spec, u))), 1e-13);
  const auto cubic = NonlinSpec::gauge_power(1, -1.0);
  const cplx rot = std::polar(1.0, 0.6);
  EXPECT_LE(testutil::rel_diff(apply_power(cubic, scale(rot, u)), scale(rot, apply_power(cubic, u))), 1e-13);
  const auto zero = apply_power(spec, SpectralField::zeros(g));
  EXPECT_EQ(lp_norm(zero, kInf), 0.0);
}

TEST(Exponential, TailBoundHolds) {
  const auto spec = NonlinSpec::exponential(cplx(1.0, -0.5), 1.0, 8);
  for (double a : {0.3, 0.8, 1.2})
    for (int cutoff = 1; cutoff <= 12; ++cutoff) {
      const double bound = exponential_tail_bound(spec, a, cutoff);
      double worst = 0.0;
      const double roundoff = 8 * std::numeric_limits<double>::epsilon() * std::abs(spec.lambda) * a * std::expm1(a * a);
      for (int k = 0; k <= 20; ++k) {
        const cplx z = std::polar(a * k / 20.0, 0.3 * k);
        worst = std::max(worst, std::abs(exponential_pointwise(spec, z) - exponential_series_pointwise(spec, z, cutoff)));
      }
      EXPECT_LE(worst, bound * (1 + 1e-12) + roundoff) << "a=" << a << " cutoff=" << cutoff;
    }
}

TEST(Exponential, SeriesConvergesAndOverflowFails) {
  const auto g = make_grid_m(1, 4, 64);
  const auto u = testutil::random_field(g, 11, 2.0);
  const auto spec = NonlinSpec::exponential(1.0, 0.5, 30);
  EXPECT_LE(testutil::rel_diff(apply_exponential_series(spec, u, 30), apply_exponential(spec, u)), 1e-12);
  const auto big = scale(100.0, u);
  EXPECT_THROW(apply_exponential(NonlinSpec::exponential(1.0, 10.0, 4), big), NumericalFailure);
  EXPECT_THROW(apply_power(spec, u), Error);
}

TEST(Lipschitz, ScalarMesh) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n(0.0, 1.0);
  for (const auto& spec : {NonlinSpec::gauge_power(1, 1.0), NonlinSpec::power({false, false, true, false}, 1.0),
                           NonlinSpec::gauge_power(2, cplx(0.0, 1.0))}) {
    const int m = spec.degree_m();
    double worst = 0.0;
    for (int i = 0; i < 2000; ++i) {
      const cplx a(n(rng), n(rng)), b(n(rng), n(rng));
      worst = std::max(worst, scalar_lipschitz_ratio(spec, a, b));
    }
    EXPECT_LE(worst, static_cast<double>(m + 1)) << spec.pattern_string();
  }
  EXPECT_EQ(scalar_lipschitz_ratio(NonlinSpec::gauge_power(1, 1.0), 0.0, 0.0), 0.0);
}

TEST(Lipschitz, WitnessFiniteAndVanishesOnEqualInputs) {
  const auto g = make_grid_m(2, 4, 64);
  const Partition part({PartitionKind::TrigonometricWindow, 3}, g);
  const SymbolTable table(EquationCoeffs(1, 0, 1), g);
  const auto times = uniform_times(0.0, 1.0, 8);
  auto evolve = [&](const SpectralField& f) {
    std::vector<SpectralField> out;
    for (double t : times) out.push_back(propagate(table, t, f));
    return Trajectory(times, out);
  };
  const auto u = evolve(testutil::random_field(g, 1, 1.5));
  const auto v = evolve(testutil::random_field(g, 2, 1.5));
  const auto spec = NonlinSpec::gauge_power(1, 1.0);
  const LipschitzExponents e{0.0, 1.0, 1.0, 2.0, 2, 2};
  const auto w = power_lipschitz_witness(part, spec, u, v, e);
  EXPECT_GT(w.lhs, 0.0);
  EXPECT_TRUE(std::isfinite(w.rhs));
  EXPECT_LE(w.lhs, 10.0 * w.rhs);
  EXPECT_EQ(power_lipschitz_witness(part, spec, u, u, e).lhs, 0.0);
  EXPECT_THROW(power_lipschitz_witness(part, spec, u, v, LipschitzExponents{0.0, 1.0, 1.0, 2.0, 3, 2}), Error);
}

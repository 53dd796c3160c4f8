#include <gtest/gtest.h>

#include <cmath>

#include "common.hpp"
#include "modnls/dispersion.hpp"
#include "modnls/modspace.hpp"

using namespace modnls;

namespace {

const PartitionKind kKinds[] = {PartitionKind::TrigonometricWindow, PartitionKind::PolynomialBump};

double max_abs_diff(const SpectralField& a, const SpectralField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  return m;
}

}  // namespace

TEST(Partition, UnityOnLattice) {
  for (auto kind : kKinds)
    for (int d : {1, 2}) {
      const auto g = make_grid_m(d, 4, 64);
      const Partition part({kind, 3}, g);
      EXPECT_LE(part.unity_residual(), 1e-12);
      std::vector<int> idx(static_cast<std::size_t>(d));
      std::vector<double> xi(static_cast<std::size_t>(d));
      double worst = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        g.unravel(i, idx);
        bool inside = true;
        for (int a = 0; a < d; ++a) {
          xi[static_cast<std::size_t>(a)] = g.frequency(idx[static_cast<std::size_t>(a)]);
          inside = inside && std::abs(xi[static_cast<std::size_t>(a)]) <= 2.0 + 1e-12;
        }
        if (!inside) continue;
        double sum = 0.0;
        for (std::size_t b = 0; b < part.box_count(); ++b) sum += part.sigma(part.box_index(b), xi);
        worst = std::max(worst, std::abs(sum - 1.0));
      }
      EXPECT_LE(worst, 1e-12) << to_string(kind) << " d=" << d;
    }
}

TEST(Partition, TrigWindowProfile) {
  EXPECT_NEAR(partition_profile(PartitionKind::TrigonometricWindow, 0.5), 0.5, 1e-15);
  EXPECT_NEAR(partition_profile(PartitionKind::TrigonometricWindow, 0.25), std::pow(std::cos(std::numbers::pi / 8), 2),
              1e-15);
  EXPECT_EQ(partition_profile(PartitionKind::TrigonometricWindow, 1.0), 0.0);
  EXPECT_EQ(partition_profile(PartitionKind::PolynomialBump, -1.0), 0.0);
  EXPECT_NEAR(partition_profile(PartitionKind::PolynomialBump, 0.0), 1.0, 1e-15);
}

TEST(Partition, SupportAndLowerBound) {
  for (auto kind : kKinds)
    for (int d : {1, 2}) {
      const auto g = make_grid_m(d, 4, 64);
      const Partition part({kind, 2}, g);
      for (std::size_t e = 0; e < part.support_size(); ++e) {
        if (part.weights()[e] == 0.0) continue;
        double r2 = 0.0;
        for (int o : part.offset(e)) r2 += (static_cast<double>(o) / g.M) * (static_cast<double>(o) / g.M);
        EXPECT_LT(std::sqrt(r2), std::sqrt(static_cast<double>(d)));
      }
      const std::vector<int> k(static_cast<std::size_t>(d), 1);
      const std::vector<double> centre(k.begin(), k.end());
      EXPECT_GE(part.sigma(k, centre), 0.5);
      EXPECT_GT(part.lower_bound(), 0.0);
    }
  const Partition trig({PartitionKind::TrigonometricWindow, 2}, make_grid_m(2, 4, 64));
  EXPECT_NEAR(trig.lower_bound(), 0.25, 1e-15);
}

TEST(Partition, Validation) {
  const auto g = make_grid_m(2, 4, 64);
  EXPECT_THROW(Partition({PartitionKind::TrigonometricWindow, 4}, g), Error);
  EXPECT_THROW(Partition({PartitionKind::TrigonometricWindow, 1}, g), Error);
  const Partition part({PartitionKind::TrigonometricWindow, 3}, g);
  EXPECT_THROW(part.find_box(std::vector<int>{4, 0}), Error);
  EXPECT_THROW(box(part, std::vector<int>{0, 0}, SpectralField::zeros(make_grid_m(2, 4, 128))), GridMismatch);
}

TEST(Partition, AlmostOrthogonality) {
  const auto g = make_grid_m(2, 4, 64);
  const Partition part({PartitionKind::PolynomialBump, 3}, g);
  const int reach = static_cast<int>(std::ceil(2.0 * std::sqrt(2.0)));
  for (std::size_t a = 0; a < part.box_count(); ++a)
    for (std::size_t b = 0; b < part.box_count(); ++b) {
      int dist = 0;
      for (int i = 0; i < 2; ++i) dist = std::max(dist, std::abs(part.box_index(a)[static_cast<std::size_t>(i)] - part.box_index(b)[static_cast<std::size_t>(i)]));
      if (dist <= reach) continue;
      std::vector<std::size_t> sa, sb;
      for (std::size_t e = 0; e < part.support_size(); ++e) {
        if (part.weights()[e] == 0.0) continue;
        sa.push_back(part.flat_indices(a)[e]);
        sb.push_back(part.flat_indices(b)[e]);
      }
      std::sort(sa.begin(), sa.end());
      std::sort(sb.begin(), sb.end());
      std::vector<std::size_t> common;
      std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(common));
      EXPECT_TRUE(common.empty());
    }
}

TEST(Box, DisjointSupportAndSingleMode) {
  const auto g = make_grid_m(2, 4, 64);
  const Partition part({PartitionKind::TrigonometricWindow, 3}, g);
  // xi0 = (1/4, -3/4) lies in Q_{(0,-1)}.
  const std::vector<double> xi0{0.25, -0.75};
  const auto f = SpectralField::from_function(g, [&](std::span<const double> x) {
    return std::polar(1.0, xi0[0] * x[0] + xi0[1] * x[1]);
  });
  EXPECT_LE(lp_norm(box(part, std::vector<int>{3, 3}, f), kInf), 1e-12);
  const std::vector<int> k0{0, -1};
  const double w = part.sigma(k0, xi0);
  EXPECT_NEAR(w, std::pow(std::cos(std::numbers::pi / 8), 2) * std::pow(std::cos(std::numbers::pi / 8), 2), 1e-14);
  EXPECT_LE(max_abs_diff(box(part, k0, f), scale(w, f)), 1e-12);
}

TEST(Box, Reconstruction) {
  for (auto kind : kKinds) {
    const auto g = make_grid_m(2, 4, 64);
    const Partition part({kind, 3}, g);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto f = testutil::random_field(g, seed, 2.0);
      EXPECT_LE(testutil::rel_diff(reconstruct(part, f), f), 1e-10);
      EXPECT_LE(truncation_residual(part, f.spectrum()), 1e-10 * lp_norm(f, 2.0));
    }
    const auto wide = testutil::random_field(g, 99);
    EXPECT_GT(truncation_residual(part, wide.spectrum()), 0.0);
  }
}

TEST(Helpers, AggregatesAndSizes) {
  const std::vector<double> a{3.0, 4.0};
  EXPECT_DOUBLE_EQ(lq_aggregate(a, 1.0), 7.0);
  EXPECT_DOUBLE_EQ(lq_aggregate(a, 2.0), 5.0);
  EXPECT_DOUBLE_EQ(lq_aggregate(a, kInf), 4.0);
  EXPECT_DOUBLE_EQ(japanese_bracket(std::vector<int>{1, 2}), std::sqrt(6.0));
  EXPECT_EQ(nice_fft_size(43), 45);
  EXPECT_EQ(nice_fft_size(64), 64);
  EXPECT_EQ(parse_partition_kind("trigonometric-window"), PartitionKind::TrigonometricWindow);
  EXPECT_EQ(parse_partition_kind("piecewise-smooth-bump"), PartitionKind::PolynomialBump);
  EXPECT_THROW(parse_partition_kind("gauss"), Error);
}

TEST(ModNorm, ClosedForms) {
  const auto g = make_grid_m(2, 4, 64);
  for (auto kind : kKinds) {
    const Partition part({kind, 3}, g);
    EXPECT_EQ(mod_norm(part, SpectralField::zeros(g), {2.0, 1.0, 0.0}), 0.0);
    const auto f = SpectralField::from_function(g, [](std::span<const double> x) {
      return std::polar(1.0, 0.25 * x[0] + 1.5 * x[1]);
    });
    EXPECT_NEAR(mod_norm(part, f, {2.0, 1.0, 0.0}), lp_norm(f, 2.0), 1e-12 * lp_norm(f, 2.0));
    const auto h = testutil::random_field(g, 4, 2.0);
    const cplx c(0.5, -2.0);
    for (double p : {2.0, 4.0, 3.0})
      EXPECT_NEAR(mod_norm(part, scale(c, h), {p, 2.0, 1.0}), std::abs(c) * mod_norm(part, h, {p, 2.0, 1.0}),
                  1e-12 * std::abs(c) * mod_norm(part, h, {p, 2.0, 1.0}));
  }
}

TEST(ModNorm, ReducedPathMatchesFullGrid) {
  for (int d : {1, 2}) {
    const auto g = make_grid_m(d, 4, d == 1 ? 128 : 64);
    const Partition part({PartitionKind::PolynomialBump, 3}, g);
    const BoxNormEvaluator ev(part);
    EXPECT_GT(ev.reduced_size(6.0), 0);
    EXPECT_EQ(ev.reduced_size(3.0), 0);
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const auto f = testutil::random_field(g, seed, 3.0);
      for (double p : {2.0, 4.0, 6.0, 8.0}) {
        const auto fast = ev.norms(f.spectrum(), p, BoxNormPath::Auto);
        const auto full = ev.norms(f.spectrum(), p, BoxNormPath::Full);
        for (std::size_t b = 0; b < fast.size(); ++b) EXPECT_NEAR(fast[b], full[b], 1e-11 * (1.0 + full[b])) << p;
      }
    }
  }
}

TEST(ModNorm, Monotonicity) {
  const auto g = make_grid_m(2, 4, 64);
  const Partition part({PartitionKind::TrigonometricWindow, 3}, g);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto f = testutil::random_field(g, seed, 3.0);
    EXPECT_LE(mod_norm(part, f, {2.0, 2.0, 0.0}), mod_norm(part, f, {2.0, 2.0, 1.5}));
    EXPECT_LE(mod_norm(part, f, {2.0, 2.0, 0.5}), mod_norm(part, f, {2.0, 1.0, 0.5}));
    EXPECT_LE(mod_norm(part, f, {2.0, kInf, 0.5}), mod_norm(part, f, {2.0, 2.0, 0.5}));
  }
}

TEST(ModNorm, PartitionEquivalenceStableUnderRefinement) {
  double cstar[2] = {0.0, 0.0};
  for (int level = 0; level < 2; ++level) {
    const auto g = make_grid_m(2, 4, 64 << level);
    const Partition a({PartitionKind::TrigonometricWindow, 3}, g);
    const Partition b({PartitionKind::PolynomialBump, 3}, g);
    double lo = kInf, hi = 0.0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      // Same function at both resolutions: spectrum confined to |xi| <= 2.
      CVector spec(g.size());
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> n(0.0, 1.0);
      for (int s0 = -8; s0 <= 8; ++s0)
        for (int s1 = -8; s1 <= 8; ++s1) {
          const double re = n(rng), im = n(rng);
          spec[g.ravel(std::vector<int>{g.wrap_index(s0), g.wrap_index(s1)})] = cplx(re, im) * static_cast<double>(g.size());
        }
      const auto f = SpectralField::from_spectrum(g, std::move(spec));
      for (double p : {2.0, 4.0}) {
        const double r = mod_norm(a, f, {p, 1.0, 0.0}) / mod_norm(b, f, {p, 1.0, 0.0});
        lo = std::min(lo, r);
        hi = std::max(hi, r);
      }
    }
    cstar[level] = std::max(hi, 1.0 / lo);
    EXPECT_GE(cstar[level], 1.0);
    EXPECT_LT(cstar[level], 4.0);
  }
  EXPECT_LT(std::abs(cstar[1] - cstar[0]) / cstar[0], 0.05);
}

TEST(Planchon, Reductions) {
  const auto g = make_grid_m(2, 4, 64);
  const Partition part({PartitionKind::TrigonometricWindow, 3}, g);
  const auto f = testutil::random_field(g, 21, 2.0);
  const auto times = uniform_times(0.0, 2.0, 40);
  const auto stat = Trajectory::stationary(times, f);
  for (double p : {2.0, 6.0})
    EXPECT_NEAR(planchon_norm(part, stat, {0.5, 2.0, kInf, p}), mod_norm(part, f, {p, 2.0, 0.5}),
                1e-12 * mod_norm(part, f, {p, 2.0, 0.5}));
  std::vector<SpectralField> fields;
  std::vector<double> gv;
  for (double t : times) {
    gv.push_back(1.0 + t * t);
    fields.push_back(scale(gv.back(), f));
  }
  const Trajectory sep(times, fields);
  const double expect = time_lp_norm(gv, times, 3.0) * mod_norm(part, f, {4.0, 1.0, 0.0});
  EXPECT_NEAR(planchon_norm(part, sep, {0.0, 1.0, 3.0, 4.0}), expect, 1e-12 * expect);
  EXPECT_EQ(planchon_norm(part, Trajectory::stationary(times, SpectralField::zeros(g)), {0.0, 1.0, 4.0, 6.0}), 0.0);
}

TEST(XNorm, Reductions) {
  const auto g = make_grid_m(2, 4, 64);
  const Partition part({PartitionKind::PolynomialBump, 3}, g);
  const auto f = testutil::random_field(g, 22, 2.0);
  const auto times = uniform_times(0.0, 1.0, 10);
  EXPECT_EQ(x_norm(part, Trajectory::stationary(times, SpectralField::zeros(g)), 0.0, 1.0, 4.0, 6.0), 0.0);
  const double m = mod_norm(part, f, {2.0, 1.0, 1.0});
  EXPECT_NEAR(x_norm(part, Trajectory::stationary(times, f), 1.0, 1.0, kInf, 2.0), 2.0 * m, 1e-12 * m);
  const auto u = Trajectory::stationary(times, f);
  const auto u3 = Trajectory::stationary(times, scale(-3.0, f));
  EXPECT_NEAR(x_norm(part, u3, 0.0, 1.0, 4.0, 6.0), 3.0 * x_norm(part, u, 0.0, 1.0, 4.0, 6.0),
              1e-12 * x_norm(part, u3, 0.0, 1.0, 4.0, 6.0));
}

TEST(Embeddings, MinkowskiAndBernstein) {
  const auto g = make_grid_m(2, 4, 64);
  const Partition part({PartitionKind::TrigonometricWindow, 3}, g);
  const SymbolTable table(EquationCoeffs(1.0, 0.0, 1.0), g);
  const auto times = uniform_times(0.0, 4.0, 32);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto f = testutil::random_field(g, seed, 2.0);
    std::vector<SpectralField> fields;
    for (double t : times) fields.push_back(propagate(table, t, f));
    const Trajectory u(times, fields);
    const auto tab = tabulate(part, u, {6.0, 2.0});
    const auto series = tab.mod_norm_series(0, 1.0, 0.0);
    EXPECT_LE(time_lp_norm(series, times, 4.0), tab.planchon(0, 0.0, 1.0, 4.0) * (1 + 1e-12));
    EXPECT_TRUE(std::isfinite(tab.planchon(0, 0.0, 1.0, 4.0) / tab.planchon(1, 0.0, 1.0, 4.0)));
  }
  // Stationary trajectory at r = inf: both sides coincide.
  const auto f = testutil::random_field(g, 77, 2.0);
  const auto stat = tabulate(part, Trajectory::stationary(times, f), {6.0});
  EXPECT_NEAR(time_lp_norm(stat.mod_norm_series(0, 1.0, 0.0), times, kInf), stat.planchon(0, 0.0, 1.0, kInf), 1e-14);
}

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "common.hpp"
#include "modnls/spectral.hpp"

using namespace modnls;

TEST(Grid, FrequencySpacing) {
  const auto g = make_grid(1, 16 * std::numbers::pi, 512);
  EXPECT_EQ(g.M, 16);
  EXPECT_DOUBLE_EQ(g.dxi(), 1.0 / 16.0);
  int per_box = 0;
  for (int j = 0; j < g.n; ++j) {
    const double xi = g.frequency(j);
    if (xi > -0.5 && xi <= 0.5) ++per_box;
  }
  EXPECT_EQ(per_box, 16);
}

TEST(Grid, TwoDimensional) {
  const auto g = make_grid(2, 16 * std::numbers::pi, 256);
  EXPECT_EQ(g.size(), 256u * 256u);
  EXPECT_EQ(g.d, 2);
}

TEST(Grid, Validation) {
  EXPECT_THROW(make_grid(1, 10.0, 64), Error);
  EXPECT_THROW(make_grid(1, 4 * std::numbers::pi, 96), Error);
  EXPECT_THROW(make_grid(1, 3 * std::numbers::pi, 64), Error);
  EXPECT_THROW(make_grid(0, 4 * std::numbers::pi, 64), Error);
}

TEST(Grid, IndexHelpers) {
  const auto g = make_grid_m(2, 4, 16);
  EXPECT_EQ(g.signed_index(9), -7);
  EXPECT_EQ(g.wrap_index(-1), 15);
  std::vector<int> idx(2);
  g.unravel(g.ravel(std::vector<int>{3, 11}), idx);
  EXPECT_EQ(idx[0], 3);
  EXPECT_EQ(idx[1], 11);
  EXPECT_DOUBLE_EQ(g.coordinate(0), -g.L());
}

TEST(SpectralField, RoundTripAndPlancherel) {
  const auto g = make_grid_m(2, 4, 64);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto f = testutil::random_field(g, seed);
    CVector spec = f.spectrum_copy();
    fft_inverse(spec, g.d, g.n);
    double err = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < spec.size(); ++i) {
      err = std::max(err, std::abs(spec[i] - f.values()[i]));
      ref = std::max(ref, std::abs(f.values()[i]));
    }
    EXPECT_LE(err / ref, 1e-12);
    EXPECT_NEAR(f.l2_norm_spectral() / lp_norm(f, 2.0), 1.0, 1e-12);
  }
}

TEST(SpectralField, FromSpectrumSeedsCache) {
  const auto g = make_grid_m(1, 4, 32);
  CVector spec(g.size());
  spec[3] = {2.0, -1.0};
  const auto f = SpectralField::from_spectrum(g, spec);
  EXPECT_EQ(f.spectrum()[3], cplx(2.0, -1.0));
  EXPECT_NEAR(std::abs(f.values()[5]), std::sqrt(5.0) / g.n, 1e-15);
}

TEST(LpNorm, ClosedForms) {
  const auto g1 = make_grid_m(1, 4, 64);
  EXPECT_EQ(lp_norm(SpectralField::zeros(g1), 2.0), 0.0);
  EXPECT_EQ(lp_norm(SpectralField::zeros(g1), kInf), 0.0);
  const auto one = SpectralField::from_function(g1, [](std::span<const double>) { return cplx(1.0, 0.0); });
  EXPECT_NEAR(lp_norm(one, 2.0), 5.01326, 1e-5);
  EXPECT_NEAR(lp_norm(one, 2.0), std::sqrt(8.0 * std::numbers::pi), 1e-12);
  const auto g2 = make_grid_m(2, 4, 32);
  const auto wave = SpectralField::from_function(g2, [](std::span<const double> x) {
    return std::polar(1.0, 0.75 * x[0] - 1.25 * x[1]);
  });
  EXPECT_NEAR(lp_norm(wave, kInf), 1.0, 1e-14);
}

TEST(LpNorm, HomogeneityAndNaN) {
  const auto g = make_grid_m(2, 4, 32);
  const auto f = testutil::random_field(g, 3);
  for (double p : {1.0, 2.0, 3.5, 6.0, kInf}) {
    const cplx c(-1.5, 2.0);
    EXPECT_NEAR(lp_norm(scale(c, f), p), std::abs(c) * lp_norm(f, p), 1e-12 * std::abs(c) * lp_norm(f, p));
  }
  CVector bad(g.size());
  bad[7] = {std::nan(""), 0.0};
  const auto nanf = SpectralField::from_values(g, bad);
  EXPECT_THROW(lp_norm(nanf, 2.0), Error);
  EXPECT_THROW(lp_norm(nanf, kInf), Error);
  EXPECT_THROW(lp_norm(f, 0.5), Error);
}

TEST(LpNorm, HoelderOnGrid) {
  const auto g = make_grid_m(2, 4, 32);
  const double splits[][3] = {{2.0, 4.0, 4.0}, {1.0, 2.0, 2.0}, {2.0, 3.0, 6.0}, {3.0, 6.0, 6.0}, {2.0, 2.0, kInf}};
  for (std::uint64_t seed = 10; seed < 20; ++seed) {
    const auto f = testutil::random_field(g, seed);
    const auto h = testutil::random_field(g, seed + 100);
    for (const auto& s : splits)
      EXPECT_LE(lp_norm(pointwise_mul(f, h), s[0]), lp_norm(f, s[1]) * lp_norm(h, s[2]) * (1 + 1e-12));
  }
}

TEST(FieldOps, Identities) {
  const auto g = make_grid_m(2, 4, 16);
  const auto f = testutil::random_field(g, 5);
  EXPECT_EQ(testutil::rel_diff(conj(conj(f)), f), 0.0);
  EXPECT_EQ(lp_norm(pointwise_mul(f, SpectralField::zeros(g)), 2.0), 0.0);
  const auto three = axpy(2.0, f, f);
  for (double p : {1.0, 2.0, kInf}) EXPECT_NEAR(lp_norm(three, p), 3.0 * lp_norm(f, p), 1e-12 * lp_norm(three, p));
  EXPECT_THROW(axpy(1.0, f, SpectralField::zeros(make_grid_m(2, 4, 32))), GridMismatch);
}

TEST(FieldOps, MultiplierMatchesSpectrum) {
  const auto g = make_grid_m(1, 4, 32);
  const auto f = testutil::random_field(g, 8);
  const auto twice = apply_multiplier(f, [](std::span<const double>) { return cplx(2.0, 0.0); });
  EXPECT_LE(testutil::rel_diff(twice, scale(2.0, f)), 1e-14);
}

TEST(TimeNorm, Quadrature) {
  const std::vector<double> t = uniform_times(0.0, 3.0, 10);
  const std::vector<double> c(t.size(), 2.5);
  EXPECT_NEAR(time_lp_norm(c, t, 1.0), 7.5, 1e-12);
  EXPECT_EQ(time_lp_norm(c, t, kInf), 2.5);
  const auto t2 = uniform_times(0.0, 1.0, 1000);
  EXPECT_NEAR(time_lp_norm(t2, t2, 2.0), 1.0 / std::sqrt(3.0), 1e-4);
  EXPECT_THROW(time_lp_norm(std::vector<double>{}, std::vector<double>{}, 2.0), Error);
}

TEST(Trajectory, Validation) {
  const auto g = make_grid_m(1, 4, 16);
  const auto f = SpectralField::zeros(g);
  EXPECT_THROW(Trajectory({}, {}), Error);
  EXPECT_THROW(Trajectory({0.0, 0.0}, {f, f}), Error);
  EXPECT_THROW(Trajectory({0.0, 1.0}, {f, SpectralField::zeros(make_grid_m(1, 4, 32))}), GridMismatch);
  const auto s = Trajectory::stationary({0.0, 0.5, 1.0}, f);
  EXPECT_EQ(s.size(), 3u);
  EXPECT_EQ(s.quadrature(), TimeQuadrature::Trapezoid);
}

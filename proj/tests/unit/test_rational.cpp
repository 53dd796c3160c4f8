#include <cmath>
#include <gtest/gtest.h>

#include "modnls/rational.hpp"

using modnls::Interval;
using modnls::Rational;

TEST(Rational, ReducesAndNormalisesSign) {
  const Rational r(6, -8);
  EXPECT_EQ(r.num(), -3);
  EXPECT_EQ(r.den(), 4);
  EXPECT_EQ(r.str(), "-3/4");
}

TEST(Rational, Arithmetic) {
  EXPECT_EQ(Rational(1, 2) + Rational(1, 3), Rational(5, 6));
  EXPECT_EQ(Rational(1, 2) - Rational(2, 3), Rational(-1, 6));
  EXPECT_EQ(Rational(3, 4) * Rational(2, 9), Rational(1, 6));
  EXPECT_EQ(Rational(3, 4) / Rational(3, 2), Rational(1, 2));
  EXPECT_THROW(Rational(1) / Rational(0), std::domain_error);
  EXPECT_THROW(Rational(1, 0), std::domain_error);
}

TEST(Rational, FloorCeilOnNegatives) {
  EXPECT_EQ(Rational(7, 2).floor(), 3);
  EXPECT_EQ(Rational(7, 2).ceil(), 4);
  EXPECT_EQ(Rational(-7, 2).floor(), -4);
  EXPECT_EQ(Rational(-7, 2).ceil(), -3);
  EXPECT_EQ(Rational(8, 3).ceil(), 3);
  EXPECT_EQ(Rational(4).floor(), 4);
  EXPECT_EQ(Rational(4).ceil(), 4);
}

TEST(Rational, InfinityConventions) {
  const Rational inf = Rational::infinity();
  EXPECT_TRUE(inf.is_infinite());
  EXPECT_EQ(inf.reciprocal(), Rational(0));
  EXPECT_EQ(Rational(0).reciprocal(), inf);
  EXPECT_GT(inf, Rational(1000000));
  EXPECT_EQ(inf, Rational::infinity());
  EXPECT_THROW(inf + Rational(1), std::domain_error);
  EXPECT_EQ(inf.str(), "inf");
  EXPECT_TRUE(std::isinf(inf.to_double()));
}

TEST(Rational, Parse) {
  EXPECT_EQ(Rational::parse("3"), Rational(3));
  EXPECT_EQ(Rational::parse("-7/2"), Rational(-7, 2));
  EXPECT_EQ(Rational::parse("inf"), Rational::infinity());
  EXPECT_THROW(Rational::parse("x/2"), std::invalid_argument);
}

TEST(Rational, ConjugateExponent) {
  EXPECT_EQ(modnls::conjugate(Rational(2)), Rational(2));
  EXPECT_EQ(modnls::conjugate(Rational(1)), Rational::infinity());
  EXPECT_EQ(modnls::conjugate(Rational::infinity()), Rational(1));
  EXPECT_EQ(modnls::conjugate(Rational(6, 5)), Rational(6));
  EXPECT_EQ(modnls::conjugate(Rational(4, 3)), Rational(4));
}

TEST(Rational, OverflowIsReported) {
  const Rational big(std::numeric_limits<std::int64_t>::max() - 1, 1);
  EXPECT_THROW(big * big, std::overflow_error);
  // Intermediate products beyond 64 bits are fine when the result fits.
  const Rational a(std::int64_t{1} << 40, 3);
  EXPECT_EQ(a * Rational(3, std::int64_t{1} << 40), Rational(1));
}

TEST(Rational, Ordering) {
  EXPECT_LT(Rational(1, 8), Rational(1, 6));
  EXPECT_LT(Rational(-1, 2), Rational(1, 3));
  EXPECT_EQ(Rational(2, 4) <=> Rational(1, 2), std::strong_ordering::equal);
}

TEST(Interval, Predicates) {
  const Interval I{Rational(1, 8), Rational(1, 4)};
  EXPECT_FALSE(I.empty());
  EXPECT_TRUE(I.contains(Rational(1, 4)));
  EXPECT_FALSE(I.contains(Rational(1, 3)));
  EXPECT_TRUE((Interval{Rational(1, 6), Rational(1, 5)}).subset_of(I));
  EXPECT_TRUE((Interval{Rational(1, 2), Rational(1, 3)}).empty());
  EXPECT_TRUE((Interval{Rational(1, 3), Rational(1, 3)}).is_point());
}

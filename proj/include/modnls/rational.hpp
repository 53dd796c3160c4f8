#pragma once

// Exact rational arithmetic for Lebesgue exponents and their reciprocals.
// An exponent may be +infinity; 1/inf = 0 and 1/0 = inf.

#include <cstdint>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <compare>

namespace modnls {

class Rational {
public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t value) : num_(value), den_(1) {}  // NOLINT
  Rational(std::int64_t num, std::int64_t den) { assign(num, den); }

  static constexpr Rational infinity() {
    Rational r;
    r.num_ = 1;
    r.den_ = 0;
    return r;
  }

  constexpr bool is_infinite() const { return den_ == 0; }
  constexpr std::int64_t num() const { return num_; }
  constexpr std::int64_t den() const { return den_; }

  double to_double() const {
    if (is_infinite()) return std::numeric_limits<double>::infinity();
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  /// 1/x with the conventions 1/0 = inf and 1/inf = 0. Negative reciprocals
  /// are fine; only zero maps to infinity.
  Rational reciprocal() const {
    if (is_infinite()) return Rational(0);
    if (num_ == 0) return infinity();
    return Rational(den_, num_);
  }

  std::int64_t floor() const {
    finite_or_throw("floor");
    std::int64_t q = num_ / den_;
    if (num_ % den_ != 0 && num_ < 0) --q;
    return q;
  }

  std::int64_t ceil() const {
    finite_or_throw("ceil");
    std::int64_t q = num_ / den_;
    if (num_ % den_ != 0 && num_ > 0) ++q;
    return q;
  }

  /// Parses "3", "-7/2", "inf".
  static Rational parse(const std::string& text) {
    if (text == "inf" || text == "infinity" || text == "oo") return infinity();
    const auto slash = text.find('/');
    try {
      if (slash == std::string::npos) return Rational(std::stoll(text));
      return Rational(std::stoll(text.substr(0, slash)), std::stoll(text.substr(slash + 1)));
    } catch (const std::logic_error&) {
      throw std::invalid_argument("not a rational number: '" + text + "'");
    }
  }

  std::string str() const {
    if (is_infinite()) return "inf";
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

  friend Rational operator+(const Rational& a, const Rational& b) {
    a.finite_or_throw("+");
    b.finite_or_throw("+");
    return from_wide(wide(a.num_) * b.den_ + wide(b.num_) * a.den_, wide(a.den_) * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    a.finite_or_throw("-");
    b.finite_or_throw("-");
    return from_wide(wide(a.num_) * b.den_ - wide(b.num_) * a.den_, wide(a.den_) * b.den_);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    a.finite_or_throw("*");
    b.finite_or_throw("*");
    return from_wide(wide(a.num_) * b.num_, wide(a.den_) * b.den_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    a.finite_or_throw("/");
    b.finite_or_throw("/");
    if (b.num_ == 0) throw std::domain_error("rational division by zero");
    return from_wide(wide(a.num_) * b.den_, wide(a.den_) * b.num_);
  }
  Rational operator-() const {
    finite_or_throw("negate");
    return Rational(-num_, den_);
  }
  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }
  Rational& operator/=(const Rational& o) { return *this = *this / o; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    if (a.is_infinite() || b.is_infinite()) {
      if (a.is_infinite() && b.is_infinite()) return std::strong_ordering::equal;
      return a.is_infinite() ? std::strong_ordering::greater : std::strong_ordering::less;
    }
    return wide(a.num_) * b.den_ <=> wide(b.num_) * a.den_;
  }

  friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

private:
  using Wide = __int128;
  static Wide wide(std::int64_t v) { return static_cast<Wide>(v); }

  static Rational from_wide(Wide num, Wide den) {
    if (den < 0) {
      num = -num;
      den = -den;
    }
    Wide a = num < 0 ? -num : num;
    Wide b = den;
    while (b != 0) {
      const Wide t = a % b;
      a = b;
      b = t;
    }
    if (a > 1) {
      num /= a;
      den /= a;
    }
    constexpr Wide lim = std::numeric_limits<std::int64_t>::max();
    if (num > lim || num < -lim || den > lim) throw std::overflow_error("rational overflow");
    Rational r;
    r.num_ = static_cast<std::int64_t>(num);
    r.den_ = static_cast<std::int64_t>(den);
    return r;
  }

  void assign(std::int64_t num, std::int64_t den) {
    if (den == 0) throw std::domain_error("rational with zero denominator");
    *this = from_wide(num, den);
  }

  void finite_or_throw(const char* op) const {
    if (is_infinite()) throw std::domain_error(std::string("rational op '") + op + "' on infinity");
  }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

/// Hoelder conjugate 1/p' = 1 - 1/p, as an exponent.
inline Rational conjugate(const Rational& p) { return (Rational(1) - p.reciprocal()).reciprocal(); }

/// Closed interval [lo, hi] of rationals; empty when lo > hi.
struct Interval {
  Rational lo;
  Rational hi;

  bool empty() const { return lo > hi; }
  bool contains(const Rational& x) const { return lo <= x && x <= hi; }
  bool subset_of(const Interval& o) const { return o.lo <= lo && hi <= o.hi; }
  bool is_point() const { return lo == hi; }
};

}  // namespace modnls

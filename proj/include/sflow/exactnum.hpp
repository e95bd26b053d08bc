#pragma once

// Exact arithmetic over Q and real quadratic fields Q(sqrt d).

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sflow {

class MismatchedField : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class DivisionByZero : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ParseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Arbitrary precision rational, always in lowest terms with positive denominator.
using BigRational = mpq_class;
using BigInt = mpz_class;

std::string to_string(const BigRational& q);
BigRational parse_rational(std::string_view text);

bool is_squarefree(std::int64_t d);

/// a + b*sqrt(d) with a, b rational and d a squarefree integer >= 2.
///
/// Every value carries its field parameter d; binary operations require
/// both operands to live in the same field. A rational is just b == 0.
class QuadExtScalar {
 public:
  static constexpr std::int64_t kDefaultField = 2;

  QuadExtScalar() = default;
  explicit QuadExtScalar(std::int64_t d);
  QuadExtScalar(BigRational a, BigRational b, std::int64_t d);
  static QuadExtScalar rational(BigRational a, std::int64_t d) { return {std::move(a), 0, d}; }
  static QuadExtScalar integer(long v, std::int64_t d) { return {BigRational(v), 0, d}; }
  static QuadExtScalar sqrt_d(std::int64_t d) { return {0, 1, d}; }

  const BigRational& a() const { return a_; }
  const BigRational& b() const { return b_; }
  std::int64_t d() const { return d_; }

  bool is_rational() const { return sgn(b_) == 0; }
  bool is_zero() const { return sgn(a_) == 0 && sgn(b_) == 0; }

  /// Exact sign of the real number a + b*sqrt(d).
  int sign() const;
  QuadExtScalar conjugate() const { return {a_, -b_, d_}; }
  /// a^2 - d b^2
  BigRational norm() const { return a_ * a_ - b_ * b_ * d_; }

  BigInt floor() const;
  /// x - floor(x), in [0, 1).
  QuadExtScalar mod1() const;
  QuadExtScalar abs() const { return sign() < 0 ? -*this : *this; }

  /// Rendering only; never used for decisions.
  double approx() const;

  QuadExtScalar operator-() const { return {-a_, -b_, d_}; }
  QuadExtScalar& operator+=(const QuadExtScalar& o);
  QuadExtScalar& operator-=(const QuadExtScalar& o);
  QuadExtScalar& operator*=(const QuadExtScalar& o);
  QuadExtScalar& operator/=(const QuadExtScalar& o);

  friend QuadExtScalar operator+(QuadExtScalar x, const QuadExtScalar& y) { return x += y; }
  friend QuadExtScalar operator-(QuadExtScalar x, const QuadExtScalar& y) { return x -= y; }
  friend QuadExtScalar operator*(QuadExtScalar x, const QuadExtScalar& y) { return x *= y; }
  friend QuadExtScalar operator/(QuadExtScalar x, const QuadExtScalar& y) { return x /= y; }

  /// Structural equality; values in different fields compare unequal
  /// unless both are the same rational.
  friend bool operator==(const QuadExtScalar& x, const QuadExtScalar& y);
  /// Real-number order. Throws MismatchedField across fields.
  friend std::strong_ordering operator<=>(const QuadExtScalar& x, const QuadExtScalar& y);

  /// "p/q" or "p/q+r/s*sqrt(d)".
  std::string str() const;
  /// Parses the textual form. A bare rational lands in field `d`; a
  /// sqrt term must name the same d.
  static QuadExtScalar parse(std::string_view text, std::int64_t d);

 private:
  void check_same_field(const QuadExtScalar& o) const;

  BigRational a_{0};
  BigRational b_{0};
  std::int64_t d_{kDefaultField};
};

QuadExtScalar qadd(const QuadExtScalar& x, const QuadExtScalar& y);
QuadExtScalar qsub(const QuadExtScalar& x, const QuadExtScalar& y);
QuadExtScalar qmul(const QuadExtScalar& x, const QuadExtScalar& y);
QuadExtScalar qdiv(const QuadExtScalar& x, const QuadExtScalar& y);
int qsign(const QuadExtScalar& x);
QuadExtScalar qmod1(const QuadExtScalar& x);

/// Distance on R/Z: min(|x-y| mod 1, 1 - that).
QuadExtScalar circle_distance(const QuadExtScalar& x, const QuadExtScalar& y);

}  // namespace sflow

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "sflow/exactnum.hpp"

using sflow::BigRational;
using sflow::QuadExtScalar;

namespace {

QuadExtScalar q(const char* s, std::int64_t d = 2) { return QuadExtScalar::parse(s, d); }

BigRational random_rational(std::mt19937_64& rng, long range) {
  std::uniform_int_distribution<long> num(-range, range);
  std::uniform_int_distribution<long> den(1, range);
  BigRational r(num(rng), den(rng));
  r.canonicalize();
  return r;
}

QuadExtScalar random_scalar(std::mt19937_64& rng, std::int64_t d, long range = 1000) {
  return {random_rational(rng, range), random_rational(rng, range), d};
}

// Sign of a + b sqrt(d) evaluated with ~120 decimal digits.
int decimal_sign(const QuadExtScalar& x) {
  const unsigned bits = 400;
  mpf_class a(x.a(), bits), b(x.b(), bits), d(x.d(), bits);
  mpf_class v = a + b * sqrt(d);
  return sgn(v);
}

}  // namespace

TEST_CASE("conjugate product, identity, self division") {
  CHECK(q("1+sqrt(2)") * q("1-sqrt(2)") == q("-1"));
  CHECK(q("0") + q("3/7-2/5*sqrt(2)") == q("3/7-2/5*sqrt(2)"));
  CHECK(q("3+sqrt(5)", 5) / q("3+sqrt(5)", 5) == q("1", 5));
}

TEST_CASE("qsign examples") {
  CHECK(sflow::qsign(q("3-2*sqrt(2)")) == 1);
  CHECK(sflow::qsign(q("0")) == 0);
  CHECK(sflow::qsign(q("1-sqrt(2)")) == -1);
  CHECK(sflow::qsign(q("-3+2*sqrt(2)")) == -1);
}

TEST_CASE("qmod1 examples") {
  CHECK(sflow::qmod1(q("1/2+1/2*sqrt(5)", 5)) == q("-1/2+1/2*sqrt(5)", 5));
  CHECK(sflow::qmod1(q("7/3")) == q("1/3"));
  CHECK(sflow::qmod1(q("-1/4")) == q("3/4"));
  CHECK(sflow::qmod1(q("-1")) == q("0"));
  CHECK(sflow::qmod1(q("-sqrt(2)")) == q("2-sqrt(2)"));
}

TEST_CASE("mismatched fields and division by zero") {
  CHECK_THROWS_AS(q("sqrt(2)") + q("sqrt(3)", 3), sflow::MismatchedField);
  CHECK_THROWS_AS(q("1") / q("0"), sflow::DivisionByZero);
  CHECK_THROWS_AS(QuadExtScalar::parse("1+sqrt(3)", 2), sflow::MismatchedField);
  CHECK_THROWS_AS(QuadExtScalar(BigRational(1), BigRational(1), 4), std::invalid_argument);
}

TEST_CASE("textual round trip") {
  for (const char* s : {"0", "-5/3", "1/2+3/4*sqrt(2)", "-1/2-sqrt(2)", "sqrt(2)", "-7/9*sqrt(2)"}) {
    QuadExtScalar x = q(s);
    CHECK(QuadExtScalar::parse(x.str(), 2) == x);
  }
  CHECK(q("2/4+ 6/8 * sqrt(2)").str() == "1/2+3/4*sqrt(2)");
  CHECK_THROWS_AS(q("1/"), sflow::ParseError);
  CHECK_THROWS_AS(q("abc"), sflow::ParseError);
  CHECK_THROWS_AS(q("1+2+sqrt(2)"), sflow::ParseError);
  CHECK_THROWS_AS(sflow::parse_rational("1/0"), sflow::DivisionByZero);
}

TEST_CASE("field axioms on random triples") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    for (std::int64_t d : {2, 3, 5}) {
      auto x = random_scalar(rng, d), y = random_scalar(rng, d), z = random_scalar(rng, d);
      CHECK((x + y) + z == x + (y + z));
      CHECK((x * y) * z == x * (y * z));
      CHECK(x * (y + z) == x * y + x * z);
      if (!x.is_zero()) CHECK(x * (QuadExtScalar::integer(1, d) / x) == QuadExtScalar::integer(1, d));
    }
  }
}

TEST_CASE("qsign agrees with high precision decimal evaluation") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 10000; ++i) {
    std::int64_t d = std::vector<std::int64_t>{2, 3, 5, 7, 11}[i % 5];
    QuadExtScalar x = random_scalar(rng, d, 1000000);
    REQUIRE(x.sign() == decimal_sign(x));
  }
  // Near-cancelling values from convergents of sqrt(2).
  BigRational p = 1, r = 1;
  for (int k = 0; k < 40; ++k) {
    QuadExtScalar x(p, -r, 2);
    CHECK(x.sign() == decimal_sign(x));
    BigRational np = p + 2 * r, nr = p + r;
    p = np;
    r = nr;
  }
}

TEST_CASE("qmod1 lands in [0,1) and differs by an integer") {
  std::mt19937_64 rng(13);
  const auto zero = QuadExtScalar::integer(0, 2), one = QuadExtScalar::integer(1, 2);
  for (int i = 0; i < 5000; ++i) {
    QuadExtScalar x = random_scalar(rng, 2, 100000);
    QuadExtScalar m = x.mod1();
    REQUIRE(m >= zero);
    REQUIRE(m < one);
    QuadExtScalar diff = x - m;
    REQUIRE(diff.is_rational());
    REQUIRE(diff.a().get_den() == 1);
  }
}

TEST_CASE("circle distance") {
  CHECK(sflow::circle_distance(q("1/10"), q("9/10")) == q("1/5"));
  CHECK(sflow::circle_distance(q("1/2"), q("1/2")) == q("0"));
  CHECK(sflow::circle_distance(q("0"), q("1/2")) == q("1/2"));
}

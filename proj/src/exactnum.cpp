#include "sflow/exactnum.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

namespace sflow {

std::string to_string(const BigRational& q) { return q.get_str(); }

BigRational parse_rational(std::string_view text) {
  std::string s(text);
  if (s.empty()) throw ParseError("empty rational");
  std::size_t i = 0;
  if (s[0] == '+' || s[0] == '-') ++i;
  bool seen_slash = false;
  bool digits_before = false, digits_after = false;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      (seen_slash ? digits_after : digits_before) = true;
    } else if (c == '/' && !seen_slash) {
      seen_slash = true;
    } else {
      throw ParseError("malformed rational '" + s + "'");
    }
  }
  if (!digits_before || (seen_slash && !digits_after)) throw ParseError("malformed rational '" + s + "'");
  if (s[0] == '+') s.erase(0, 1);
  BigRational q;
  if (q.set_str(s, 10) != 0) throw ParseError("malformed rational '" + s + "'");
  if (sgn(q.get_den()) == 0) throw DivisionByZero("zero denominator in '" + s + "'");
  q.canonicalize();
  return q;
}

bool is_squarefree(std::int64_t d) {
  if (d < 2) return false;
  for (std::int64_t p = 2; p * p <= d; ++p) {
    if (d % (p * p) == 0) return false;
  }
  return true;
}

QuadExtScalar::QuadExtScalar(std::int64_t d) : d_(d) {
  if (!is_squarefree(d)) throw std::invalid_argument("field parameter must be squarefree and >= 2");
}

QuadExtScalar::QuadExtScalar(BigRational a, BigRational b, std::int64_t d)
    : a_(std::move(a)), b_(std::move(b)), d_(d) {
  if (!is_squarefree(d)) throw std::invalid_argument("field parameter must be squarefree and >= 2");
  a_.canonicalize();
  b_.canonicalize();
}

void QuadExtScalar::check_same_field(const QuadExtScalar& o) const {
  if (d_ != o.d_) {
    throw MismatchedField("Q(sqrt " + std::to_string(d_) + ") vs Q(sqrt " + std::to_string(o.d_) + ")");
  }
}

int QuadExtScalar::sign() const {
  const int sa = sgn(a_);
  const int sb = sgn(b_);
  if (sb == 0) return sa;
  if (sa == 0 || sa == sb) return sb;
  // Opposite signs: compare a^2 with b^2 d.
  const int c = cmp(a_ * a_, b_ * b_ * d_);
  if (c > 0) return sa;
  if (c < 0) return sb;
  return 0;  // unreachable for squarefree d
}

BigInt QuadExtScalar::floor() const {
  // floor(b sqrt d) from the integer square root of p^2 d, where b = p/q.
  BigInt fb = 0;
  if (sgn(b_) != 0) {
    const BigInt p = ::abs(b_.get_num());
    const BigInt& q = b_.get_den();
    BigInt r = sqrt(BigInt(p * p * d_));
    BigInt f;
    mpz_fdiv_q(f.get_mpz_t(), r.get_mpz_t(), q.get_mpz_t());
    fb = sgn(b_) > 0 ? f : BigInt(-f - 1);
  }
  BigInt fa;
  mpz_fdiv_q(fa.get_mpz_t(), a_.get_num_mpz_t(), a_.get_den_mpz_t());
  BigInt c = fa + fb;
  QuadExtScalar next(a_ - BigRational(c + 1), b_, d_);
  if (next.sign() >= 0) c += 1;
  return c;
}

QuadExtScalar QuadExtScalar::mod1() const {
  return {a_ - BigRational(floor()), b_, d_};
}

double QuadExtScalar::approx() const {
  return a_.get_d() + b_.get_d() * std::sqrt(static_cast<double>(d_));
}

QuadExtScalar& QuadExtScalar::operator+=(const QuadExtScalar& o) {
  check_same_field(o);
  a_ += o.a_;
  b_ += o.b_;
  return *this;
}

QuadExtScalar& QuadExtScalar::operator-=(const QuadExtScalar& o) {
  check_same_field(o);
  a_ -= o.a_;
  b_ -= o.b_;
  return *this;
}

QuadExtScalar& QuadExtScalar::operator*=(const QuadExtScalar& o) {
  check_same_field(o);
  if (sgn(b_) == 0 && sgn(o.b_) == 0) {
    a_ *= o.a_;
    return *this;
  }
  BigRational na = a_ * o.a_ + b_ * o.b_ * d_;
  BigRational nb = a_ * o.b_ + b_ * o.a_;
  a_ = std::move(na);
  b_ = std::move(nb);
  return *this;
}

QuadExtScalar& QuadExtScalar::operator/=(const QuadExtScalar& o) {
  check_same_field(o);
  if (o.is_zero()) throw DivisionByZero("division by zero in Q(sqrt " + std::to_string(d_) + ")");
  if (sgn(o.b_) == 0) {
    a_ /= o.a_;
    b_ /= o.a_;
    return *this;
  }
  // x / y = x * conj(y) / N(y)
  const BigRational n = o.norm();
  *this *= o.conjugate();
  a_ /= n;
  b_ /= n;
  return *this;
}

bool operator==(const QuadExtScalar& x, const QuadExtScalar& y) {
  if (x.a_ != y.a_ || x.b_ != y.b_) return false;
  return x.d_ == y.d_ || sgn(x.b_) == 0;
}

std::strong_ordering operator<=>(const QuadExtScalar& x, const QuadExtScalar& y) {
  const int s = (x - y).sign();
  if (s < 0) return std::strong_ordering::less;
  if (s > 0) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::string QuadExtScalar::str() const {
  if (sgn(b_) == 0) return a_.get_str();
  std::string tail = "*sqrt(" + std::to_string(d_) + ")";
  if (sgn(a_) == 0) return b_.get_str() + tail;
  if (sgn(b_) > 0) return a_.get_str() + "+" + b_.get_str() + tail;
  return a_.get_str() + "-" + BigRational(-b_).get_str() + tail;
}

namespace {

std::string strip_spaces(std::string_view text) {
  std::string s;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  }
  return s;
}

// Parses "[coef*]sqrt(d)" with an explicit leading sign already removed.
bool parse_sqrt_term(const std::string& term, BigRational& coef, std::int64_t& d) {
  const auto pos = term.find("sqrt(");
  if (pos == std::string::npos) return false;
  if (term.back() != ')') throw ParseError("malformed sqrt term '" + term + "'");
  std::string head = term.substr(0, pos);
  std::string inner = term.substr(pos + 5, term.size() - pos - 6);
  if (head.empty()) {
    coef = 1;
  } else {
    if (head.back() != '*') throw ParseError("expected '*' before sqrt in '" + term + "'");
    head.pop_back();
    coef = parse_rational(head);
  }
  try {
    std::size_t used = 0;
    d = std::stoll(inner, &used);
    if (used != inner.size()) throw ParseError("bad field parameter in '" + term + "'");
  } catch (const std::logic_error&) {
    throw ParseError("bad field parameter in '" + term + "'");
  }
  return true;
}

}  // namespace

QuadExtScalar QuadExtScalar::parse(std::string_view text, std::int64_t d) {
  const std::string s = strip_spaces(text);
  if (s.empty()) throw ParseError("empty scalar");
  // Split into signed terms at '+'/'-' not at position 0 and not after '/' or '*'.
  std::vector<std::string> terms;
  std::size_t start = 0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if ((s[i] == '+' || s[i] == '-') && s[i - 1] != '/' && s[i - 1] != '*' && s[i - 1] != '(') {
      terms.push_back(s.substr(start, i - start));
      start = i;
    }
  }
  terms.push_back(s.substr(start));
  if (terms.size() > 2) throw ParseError("too many terms in scalar '" + s + "'");

  BigRational a = 0, b = 0;
  bool have_a = false, have_b = false;
  for (std::string t : terms) {
    int sign = 1;
    if (!t.empty() && (t[0] == '+' || t[0] == '-')) {
      if (t[0] == '-') sign = -1;
      t.erase(0, 1);
    }
    if (t.empty()) throw ParseError("dangling sign in '" + s + "'");
    BigRational coef;
    std::int64_t term_d = 0;
    if (parse_sqrt_term(t, coef, term_d)) {
      if (have_b) throw ParseError("two sqrt terms in '" + s + "'");
      if (term_d != d) {
        throw MismatchedField("scalar '" + s + "' names sqrt(" + std::to_string(term_d) +
                              ") in a Q(sqrt " + std::to_string(d) + ") context");
      }
      b = sign * coef;
      have_b = true;
    } else {
      if (have_a) throw ParseError("two rational terms in '" + s + "'");
      a = sign * parse_rational(t);
      have_a = true;
    }
  }
  return {a, b, d};
}

QuadExtScalar qadd(const QuadExtScalar& x, const QuadExtScalar& y) { return x + y; }
QuadExtScalar qsub(const QuadExtScalar& x, const QuadExtScalar& y) { return x - y; }
QuadExtScalar qmul(const QuadExtScalar& x, const QuadExtScalar& y) { return x * y; }
QuadExtScalar qdiv(const QuadExtScalar& x, const QuadExtScalar& y) { return x / y; }
int qsign(const QuadExtScalar& x) { return x.sign(); }
QuadExtScalar qmod1(const QuadExtScalar& x) { return x.mod1(); }

QuadExtScalar circle_distance(const QuadExtScalar& x, const QuadExtScalar& y) {
  QuadExtScalar r = (x - y).mod1();
  QuadExtScalar other = QuadExtScalar::integer(1, r.d()) - r;
  return other < r ? other : r;
}

}  // namespace sflow

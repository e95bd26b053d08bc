#pragma once

// Orbit-iteration engines. Every orbit point of an exchange differs from its
// start by a sum of translations, so all values share one denominator D and
// can be carried as integer pairs (A + B sqrt d) / D. FixedQuad does this in
// 128-bit integers and throws KernelOverflow when a component leaves the safe
// range; GenericQuad wraps QuadExtScalar. Both are exact.

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <vector>

#include "sflow/iem.hpp"

namespace sflow::detail {

struct KernelOverflow : std::overflow_error {
  KernelOverflow() : std::overflow_error("fixed-width kernel overflow") {}
};

struct FixedQuad {
  __int128 a = 0, b = 0;
};

class FixedArith {
 public:
  using Num = FixedQuad;
  static constexpr __int128 kLimit = static_cast<__int128>(1) << 56;

  /// Fails (returns nullopt) when some value does not fit.
  static std::optional<FixedArith> make(std::int64_t d, const std::vector<QuadExtScalar>& values) {
    if (d > 4096) return std::nullopt;
    BigInt den = 1;
    for (const auto& v : values) {
      mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), v.a().get_den_mpz_t());
      mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), v.b().get_den_mpz_t());
    }
    FixedArith ar(d, den);
    for (const auto& v : values) {
      if (!ar.fits(v)) return std::nullopt;
    }
    return ar;
  }

  Num from(const QuadExtScalar& v) const {
    return {to128(BigRational(v.a() * den_).get_num()), to128(BigRational(v.b() * den_).get_num())};
  }
  QuadExtScalar to(const Num& x) const {
    return {BigRational(from128(x.a), den_), BigRational(from128(x.b), den_), d_};
  }

  Num add(const Num& x, const Num& y) const { return check({x.a + y.a, x.b + y.b}); }
  Num sub(const Num& x, const Num& y) const { return check({x.a - y.a, x.b - y.b}); }
  int sign(const Num& x) const {
    const int sa = x.a > 0 ? 1 : (x.a < 0 ? -1 : 0);
    const int sb = x.b > 0 ? 1 : (x.b < 0 ? -1 : 0);
    if (sb == 0) return sa;
    if (sa == 0 || sa == sb) return sb;
    const __int128 aa = x.a * x.a, bb = x.b * x.b * d_;
    return aa > bb ? sa : sb;
  }
  bool eq(const Num& x, const Num& y) const { return x.a == y.a && x.b == y.b; }
  bool less(const Num& x, const Num& y) const { return sign(sub(x, y)) < 0; }

 private:
  FixedArith(std::int64_t d, BigInt den) : d_(d), den_(std::move(den)) {}

  bool fits(const QuadExtScalar& v) const {
    BigInt a = BigRational(v.a() * den_).get_num(), b = BigRational(v.b() * den_).get_num();
    return ::abs(a) < BigInt(1) << 56 && ::abs(b) < BigInt(1) << 56;
  }
  static Num check(Num x) {
    if (x.a >= kLimit || x.a <= -kLimit || x.b >= kLimit || x.b <= -kLimit) throw KernelOverflow();
    return x;
  }
  static __int128 to128(const BigInt& z) {
    // |z| < 2^56 fits a long.
    return static_cast<__int128>(z.get_si());
  }
  static BigInt from128(__int128 v) {
    const bool neg = v < 0;
    unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v) : static_cast<unsigned __int128>(v);
    BigInt hi = static_cast<unsigned long>(u >> 64), lo = static_cast<unsigned long>(u);
    BigInt r = (hi << 64) + lo;
    return neg ? BigInt(-r) : r;
  }

  std::int64_t d_;
  BigInt den_;
};

class GenericArith {
 public:
  using Num = QuadExtScalar;
  explicit GenericArith(std::int64_t) {}
  Num from(const QuadExtScalar& v) const { return v; }
  QuadExtScalar to(const Num& x) const { return x; }
  Num add(const Num& x, const Num& y) const { return x + y; }
  Num sub(const Num& x, const Num& y) const { return x - y; }
  int sign(const Num& x) const { return x.sign(); }
  bool eq(const Num& x, const Num& y) const { return x == y; }
  bool less(const Num& x, const Num& y) const { return x < y; }
};

/// The exchange expressed in an arithmetic. Points are kept in [0, 1).
template <class Arith>
class Kernel {
 public:
  using Num = typename Arith::Num;

  Kernel(const IntervalExchange& f, Arith ar) : ar_(std::move(ar)) {
    for (int i = 0; i < f.n(); ++i) {
      left_.push_back(ar_.from(f.breakpoints()[i]));
      shift_.push_back(ar_.from(f.translation(i)));
      right_limit_.push_back(ar_.from(f.right_limit(i)));
    }
    one_ = ar_.from(QuadExtScalar::integer(1, f.field()));
  }

  const Arith& arith() const { return ar_; }
  int n() const { return static_cast<int>(left_.size()); }
  const Num& one() const { return one_; }
  Num from(const QuadExtScalar& v) const { return ar_.from(v); }
  QuadExtScalar to(const Num& x) const { return ar_.to(x); }

  /// Interval index, or -(k+1) when x is breakpoint k.
  int locate(const Num& x) const {
    int lo = 0, hi = n();  // first index with left > x
    while (lo < hi) {
      const int mid = (lo + hi) / 2;
      if (ar_.less(x, left_[mid])) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    const int i = lo - 1;
    if (ar_.eq(left_[i], x)) return -(i + 1);
    return i;
  }
  Num apply_in(const Num& x, int i) const { return ar_.add(x, shift_[i]); }
  const Num& right_limit(int k) const { return right_limit_[k]; }

  /// Circle distance of x and y strictly exceeds delta.
  bool farther_than(const Num& x, const Num& y, const Num& delta) const {
    Num diff = ar_.sub(x, y);
    if (ar_.sign(diff) < 0) diff = ar_.sub(y, x);
    const Num other = ar_.sub(one_, diff);
    const Num& m = ar_.less(other, diff) ? other : diff;
    return ar_.less(delta, m);
  }
  Num circle_distance(const Num& x, const Num& y) const {
    Num diff = ar_.sub(x, y);
    if (ar_.sign(diff) < 0) diff = ar_.sub(y, x);
    const Num other = ar_.sub(one_, diff);
    return ar_.less(other, diff) ? other : diff;
  }

 private:
  Arith ar_;
  std::vector<Num> left_, shift_, right_limit_;
  Num one_;
};

/// Runs body(kernel) in fixed width when every seed value fits and no
/// overflow occurs, otherwise in GMP arithmetic.
template <class Body>
auto with_kernel(const IntervalExchange& f, std::vector<QuadExtScalar> seeds, Body body) {
  for (int i = 0; i < f.n(); ++i) {
    seeds.push_back(f.breakpoints()[i]);
    seeds.push_back(f.translation(i));
    seeds.push_back(f.right_limit(i));
  }
  seeds.push_back(QuadExtScalar::integer(1, f.field()));
  if (auto ar = FixedArith::make(f.field(), seeds)) {
    try {
      return body(Kernel<FixedArith>(f, *ar));
    } catch (const KernelOverflow&) {
    }
  }
  return body(Kernel<GenericArith>(f, GenericArith(f.field())));
}

}  // namespace sflow::detail

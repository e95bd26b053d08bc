#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "iem_fixtures.hpp"
#include "sflow/metricflow.hpp"

using namespace sflow;
using fixtures::Q;

namespace {

QuadExtScalar R(long p, long q, std::int64_t d = 5) { return QuadExtScalar::rational(BigRational(p, q), d); }

SuspensionFlow golden_rotation() { return SuspensionFlow(fixtures::rotation(Q("-1/2+1/2*sqrt(5)", 5))); }

SuspensionPoint random_point(std::mt19937_64& rng, const SuspensionFlow& fl) {
  for (;;) {
    SuspensionPoint p{R(static_cast<long>(rng() % 1000003), 1000003, fl.field()),
                      R(static_cast<long>(rng() % 1000), 1000, fl.field())};
    if (fl.base().interval_of(p.base)) return p;
  }
}

// Dense floating-point sampling of phi_[0,T](p): 40 points per unit time,
// distances by the same max/roof rule written out directly.
double dense_diameter(const SuspensionFlow& fl, const SuspensionPoint& p, double T) {
  std::vector<std::pair<double, double>> pts;
  std::vector<double> images;
  QuadExtScalar x = p.base;
  double h = p.height.approx(), left = T;
  for (;;) {
    auto fx = fl.step(x);
    const double top = std::min(1.0, h + left);
    // Height 1 is the bottom of the next piece.
    const int last = top == 1.0 && fx ? 39 : 40;
    for (int k = 0; k <= last; ++k) {
      pts.push_back({x.approx(), h + (top - h) * k / 40.0});
      images.push_back(fx ? fx->approx() : NAN);
    }
    if (top < 1.0 || !fx) break;
    left -= top - h;
    h = 0.0;
    x = *fx;
  }
  auto cd = [](double a, double b) { return std::min(std::fabs(a - b), 1.0 - std::fabs(a - b)); };
  double best = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = 0; j < pts.size(); ++j) {
      auto [xi, hi] = pts[i];
      auto [xj, hj] = pts[j];
      double v = std::max(cd(xi, xj), std::fabs(hi - hj));
      if (!std::isnan(images[i]) && hi < 1.0) v = std::min(v, std::max(cd(images[i], xj), 1.0 + hj - hi));
      if (!std::isnan(images[j]) && hj < 1.0) v = std::min(v, std::max(cd(xi, images[j]), 1.0 + hi - hj));
      best = std::max(best, std::min(v, 0.5));
    }
  }
  return best;
}

}  // namespace

TEST_CASE("distance is symmetric, zero on the diagonal, bounded by the diameter") {
  SuspensionFlow fl(fixtures::golden_321());
  std::mt19937_64 rng(1);
  for (int t = 0; t < 500; ++t) {
    auto p = random_point(rng, fl), q = random_point(rng, fl);
    CHECK(fl.distance(p, q) == fl.distance(q, p));
    CHECK(fl.distance(p, p).is_zero());
    CHECK(fl.distance(p, q) <= fl.diameter());
    CHECK(fl.distance(p, q).sign() >= 0);
  }
  // Across the roof: (x, 9/10) and (f x, 1/20) are 3/20 apart.
  SuspensionPoint a{R(1, 3), R(9, 10)};
  SuspensionPoint b{fl.base().apply(R(1, 3)), R(1, 20)};
  CHECK(fl.distance(a, b) == R(3, 20));
}

TEST_CASE("flow is additive") {
  SuspensionFlow fl(fixtures::golden_321());
  std::mt19937_64 rng(2);
  for (int t = 0; t < 100; ++t) {
    auto p = random_point(rng, fl);
    const auto s = R(static_cast<long>(rng() % 5000), 1000), u = R(static_cast<long>(rng() % 5000), 1000);
    CHECK(fl.flow(fl.flow(p, s), u) == fl.flow(p, s + u));
  }
  auto p = SuspensionPoint{R(1, 3), R(1, 2)};
  CHECK(fl.flow(p, R(0, 1)) == p);
  CHECK_THROWS_AS(fl.validate({R(1, 3), R(1, 1)}), std::invalid_argument);
}

TEST_CASE("dist_phi examples") {
  auto fl = golden_rotation();
  SuspensionPoint x{R(1, 3), R(1, 5)};
  auto self = dist_phi(fl, x, x, 10);
  CHECK(self.value.is_zero());
  CHECK(self.same_orbit);

  auto y = fl.flow(x, R(1, 1000));
  auto a = dist_phi(fl, x, y, 10), b = dist_phi(fl, y, x, 10);
  CHECK(a.same_orbit);
  CHECK(a.time == R(1, 1000));
  CHECK(b.time == R(-1, 1000));
  CHECK(a.value == R(1, 1000));
  CHECK(a.value == b.value);

  auto far = fl.flow(x, R(37, 10));
  auto c = dist_phi(fl, x, far, 10);
  CHECK(c.same_orbit);
  CHECK(c.time == R(37, 10));
  CHECK(c.value <= fl.diameter());
  CHECK_FALSE(dist_phi(fl, x, far, 2).same_orbit);

  // Rational bases lie on distinct orbits of an irrational rotation.
  auto d = dist_phi(fl, x, {R(1, 7), R(1, 5)}, 1000);
  CHECK_FALSE(d.same_orbit);
  CHECK(d.value == fl.diameter());
}

TEST_CASE("segment diameter agrees with dense sampling") {
  SuspensionFlow fl(fixtures::golden_321());
  std::mt19937_64 rng(3);
  for (int t = 0; t < 60; ++t) {
    auto p = random_point(rng, fl);
    const long num = 1 + static_cast<long>(rng() % 3000);
    const double dense = dense_diameter(fl, p, num / 1000.0);
    const double ours = fl.segment_diameter(p, R(num, 1000)).approx();
    // The dense samples see at most the true supremum, and miss it by at most one grid step.
    CHECK(ours >= dense - 1e-12);
    CHECK(ours <= dense + 1.0 / 40.0);
  }
}

TEST_CASE("beta0 lower bound") {
  SuspensionFlow single(IntervalExchange({R(1, 1)}, {1}));
  Beta0Options one;
  one.samples = 1;
  one.segment_time = R(1, 4);
  CHECK(beta0_lower_bound(single, one).bound == R(1, 4));

  auto fl = golden_rotation();
  Beta0Options opt;
  opt.samples = 16;
  auto r = beta0_lower_bound(fl, opt);
  CHECK(r.starts.size() == 16);
  CHECK(r.bound == fl.diameter());
  for (std::size_t k = 0; k < r.starts.size(); ++k) CHECK(r.bound <= r.diameters[k]);

  // Saddle connection: f(a_1+) = 2/5 and f(2/5) = a_2.
  SuspensionFlow conn(IntervalExchange({R(1, 5, 2), R(2, 5, 2), R(2, 5, 2)}, {3, 2, 1}));
  Beta0Options co;
  co.samples = 8;
  co.segment_time = QuadExtScalar::integer(16, 2);
  auto rc = beta0_lower_bound(conn, co);
  const auto sep = conn.segment_diameter({conn.base().right_limit(1), QuadExtScalar(2)}, co.segment_time);
  CHECK(rc.bound <= sep);
}

TEST_CASE("pair test agrees with base separation") {
  SuspensionFlow fl(fixtures::golden_321());
  const auto& f = fl.base();
  const QuadExtScalar delta = R(3, 10) * f.lengths()[0];
  std::mt19937_64 rng(4);
  int separated = 0;
  for (int t = 0; t < 300; ++t) {
    auto x = random_point(rng, fl);
    const auto gap = R(100 + static_cast<long>(rng() % 900), 1000000);
    SuspensionPoint y{(x.base + gap).mod1(), x.height};
    if (!f.interval_of(y.base)) continue;
    auto p = expansive_pair_test(fl, x, y, delta, 100000);
    auto s = separation_test(f, x.base, y.base, delta, 100000);
    if (s.status == SeparationStatus::BreakpointHit) continue;
    CHECK((p.status == PairStatus::Separated) == (s.status == SeparationStatus::Separated));
    CHECK(p.returns == s.index);
    separated += p.status == PairStatus::Separated;

    // Unequal heights shift the decision by at most one return.
    SuspensionPoint z{y.base, x.height * R(99, 100)};
    auto q = expansive_pair_test(fl, x, z, delta, 100000);
    if (q.status == PairStatus::Separated && p.status == PairStatus::Separated) {
      CHECK(q.returns + 1 >= p.returns);
      CHECK(q.returns <= p.returns + 1);
    }
  }
  CHECK(separated > 250);
}

TEST_CASE("pair test examples") {
  SuspensionFlow fl(fixtures::golden_321());
  const QuadExtScalar delta = R(3, 10) * fl.base().lengths()[0];
  SuspensionPoint x{R(1, 3), R(1, 4)};
  auto same = expansive_pair_test(fl, x, x, delta, 200);
  CHECK(same.status == PairStatus::NotSeparated);
  CHECK(same.sup.is_zero());
  REQUIRE(same.dphi);
  CHECK(same.dphi->value.is_zero());

  // Same orbit on the irrational torus: never separates under the pairing.
  auto tor = golden_rotation();
  auto y = tor.flow(x, R(1, 500));
  auto r = expansive_pair_test(tor, x, y, R(1, 100), 5000);
  CHECK(r.status == PairStatus::NotSeparated);
  CHECK(r.sup == R(1, 500));
  CHECK(r.dphi->same_orbit);
  CHECK(r.dphi->value <= R(1, 500));

  // Orbit running into a singular breakpoint at the second roof crossing.
  const auto a1 = fl.base().breakpoints()[1];
  const auto pre = fl.base().inverse().apply(a1);
  try {
    expansive_pair_test(fl, {pre, R(1, 2)}, {(pre + R(1, 10000000)).mod1(), R(1, 2)}, R(9, 10), 10);
    FAIL("expected SingularHit");
  } catch (const SingularHit& e) {
    CHECK(e.point == 0);
    CHECK(e.breakpoint == 1);
    CHECK(e.returns == 1);
  }
}

TEST_CASE("kstar pair test") {
  auto tor = golden_rotation();
  SuspensionPoint x{R(2, 7), R(1, 3)};
  const auto s0 = R(1, 1000);
  auto k = kstar_pair_test(tor, x, tor.flow(x, s0), R(1, 100), R(1, 100), 100);
  REQUIRE(k.witness);
  CHECK(k.witness->t0.is_zero());
  CHECK(k.witness->s == s0);

  auto back = kstar_pair_test(tor, tor.flow(x, s0), x, R(1, 100), R(1, 100), 100);
  REQUIRE(back.witness);
  CHECK(back.witness->s == -s0);

  // The witness satisfies its defining identity.
  const auto y = tor.flow(x, s0);
  const auto& w = *k.witness;
  CHECK(tor.flow(x, w.t0 + w.s) == tor.flow(y, canonical_pairing(x, y, w.t0)));

  SuspensionFlow fl(fixtures::golden_321());
  const QuadExtScalar delta = R(3, 10) * fl.base().lengths()[0];
  auto sep = kstar_pair_test(fl, {R(1, 3), R(0, 1)}, {R(1, 3) + R(1, 1000), R(0, 1)}, delta, R(1, 100), 100000);
  CHECK(sep.pair.status == PairStatus::Separated);
  CHECK_FALSE(sep.witness);
  CHECK_FALSE(sep.needs_budget);

  // Same orbit, but a shift of 2 time units is not small.
  auto big = kstar_pair_test(tor, x, tor.flow(x, R(2, 1)), R(9, 10), R(1, 100), 100);
  CHECK_FALSE(big.witness);
  CHECK(big.needs_budget);
}

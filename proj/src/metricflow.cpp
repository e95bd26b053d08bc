#include "sflow/metricflow.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "iem_kernel.hpp"

namespace sflow {

SingularHit::SingularHit(int point_, int breakpoint_, std::uint64_t returns_)
    : std::runtime_error("orbit of point " + std::to_string(point_) + " reaches singular breakpoint " +
                         std::to_string(breakpoint_) + " after " + std::to_string(returns_) + " returns"),
      point(point_),
      breakpoint(breakpoint_),
      returns(returns_) {}

const char* to_string(PairStatus s) { return s == PairStatus::Separated ? "Separated" : "NotSeparated"; }

SuspensionFlow::SuspensionFlow(IntervalExchange f) : f_(std::move(f)), singular_(f_.n(), 0) {
  for (int k : singular_set(f_).singular) singular_[k] = 1;
}

void SuspensionFlow::validate(const SuspensionPoint& p) const {
  const auto one = QuadExtScalar::integer(1, field());
  if (p.base.sign() < 0 || !(p.base < one)) throw std::invalid_argument("base point outside [0, 1)");
  if (p.height.sign() < 0 || !(p.height < one)) throw std::invalid_argument("height outside [0, 1)");
}

std::optional<QuadExtScalar> SuspensionFlow::step(const QuadExtScalar& x) const {
  if (auto i = f_.interval_of(x)) return f_.apply_in(x, *i);
  const int k = *f_.breakpoint_index(x);
  if (singular_[k]) return std::nullopt;
  return f_.right_limit(k);
}

SuspensionPoint SuspensionFlow::flow(const SuspensionPoint& p, const QuadExtScalar& t) const {
  validate(p);
  if (t.sign() < 0) throw std::invalid_argument("negative flow time");
  const QuadExtScalar h = p.height + t;
  const BigInt k = h.floor();
  QuadExtScalar x = p.base;
  std::uint64_t done = 0;
  for (BigInt r = 0; r < k; ++r) {
    auto y = step(x);
    if (!y) throw SingularHit(0, *f_.breakpoint_index(x), done);
    x = std::move(*y);
    ++done;
  }
  return {x, h - QuadExtScalar::rational(BigRational(k), field())};
}

QuadExtScalar SuspensionFlow::diameter() const { return QuadExtScalar::rational(BigRational(1, 2), field()); }

QuadExtScalar SuspensionFlow::distance(const SuspensionPoint& p, const SuspensionPoint& q) const {
  const auto one = QuadExtScalar::integer(1, field());
  QuadExtScalar best = std::max(circle_distance(p.base, q.base), (p.height - q.height).abs());
  // (x, h) ~ (f x, h - 1) across the roof.
  if (auto fp = step(p.base)) best = std::min(best, std::max(circle_distance(*fp, q.base), one + q.height - p.height));
  if (auto fq = step(q.base)) best = std::min(best, std::max(circle_distance(p.base, *fq), one + p.height - q.height));
  return std::min(best, diameter());
}

namespace {

// Vertical piece {x} x [lo, hi] of an orbit segment; fx = f(x) when defined.
template <class T>
struct Piece {
  T x, lo, hi, fx;
  bool has_fx;
};

// sup over h in I, k in J of the roof-identified max distance. It depends on
// u = h - k only, piecewise linearly, so the sup sits at an endpoint or at a
// kink of one of the three branches.
template <class T>
T piece_distance(const Piece<T>& p, const Piece<T>& q, const T& one, const T& half, const T& big) {
  auto cd = [&](const T& a, const T& b) {
    T t = a < b ? b - a : a - b;
    T o = one - t;
    return o < t ? o : t;
  };
  auto mx = [](const T& a, const T& b) { return a < b ? b : a; };
  auto mn = [](const T& a, const T& b) { return a < b ? a : b; };
  const T c0 = cd(p.x, q.x);
  const T c1 = p.has_fx ? cd(p.fx, q.x) : big;  // u -> 1 - u branch
  const T c2 = q.has_fx ? cd(p.x, q.fx) : big;  // u -> 1 + u branch
  const T ulo = p.lo - q.hi, uhi = p.hi - q.lo;
  auto g = [&](const T& u) {
    const T au = u < one - one ? -u : u;
    T v = mx(c0, au);
    if (p.has_fx) v = mn(v, mx(c1, one - u));
    if (q.has_fx) v = mn(v, mx(c2, one + u));
    return mn(v, half);
  };
  std::vector<T> cand{ulo, uhi, half, -half, c0, -c0, one - c0, c0 - one};
  if (p.has_fx) {
    cand.insert(cand.end(), {one - c1, c1, -c1, c1 - one});
  }
  if (q.has_fx) {
    cand.insert(cand.end(), {c2 - one, c2, -c2, one - c2});
  }
  T best = g(ulo);
  for (const T& u : cand) {
    if (u < ulo || uhi < u) continue;
    best = mx(best, g(u));
  }
  return best;
}

}  // namespace

QuadExtScalar SuspensionFlow::segment_diameter(const SuspensionPoint& p, const QuadExtScalar& T) const {
  const std::int64_t d = field();
  const auto one = QuadExtScalar::integer(1, d);
  std::vector<Piece<QuadExtScalar>> pieces;
  QuadExtScalar x = p.base, lo = p.height, rest = T;
  for (;;) {
    const QuadExtScalar top = std::min(one, lo + rest);
    auto y = step(x);
    pieces.push_back({x, lo, top, y ? *y : QuadExtScalar(d), y.has_value()});
    if (top < one || !y) break;
    rest -= top - lo;
    x = std::move(*y);
    lo = QuadExtScalar(d);
  }
  // Floating-point screen, then exact evaluation of the near-maximal pairs.
  std::vector<Piece<double>> ap;
  for (const auto& pc : pieces) ap.push_back({pc.x.approx(), pc.lo.approx(), pc.hi.approx(), pc.fx.approx(), pc.has_fx});
  const std::size_t m = pieces.size();
  std::vector<double> dist(m * m, 0.0);
  double top = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) top = std::max(top, dist[i * m + j] = piece_distance(ap[i], ap[j], 1.0, 0.5, 2.0));
  }
  const auto half = diameter(), big = QuadExtScalar::integer(2, d);
  QuadExtScalar best(d);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (dist[i * m + j] >= top - 1e-9) best = std::max(best, piece_distance(pieces[i], pieces[j], one, half, big));
    }
  }
  return best;
}

DistPhiResult dist_phi(const SuspensionFlow& flow, const SuspensionPoint& x, const SuspensionPoint& y,
                       std::uint64_t horizon) {
  flow.validate(x);
  flow.validate(y);
  const std::int64_t d = flow.field();
  // Smallest k <= horizon with f^k(a.base) = b.base and nonnegative time.
  auto search = [&](const SuspensionPoint& a, const SuspensionPoint& b) -> std::optional<QuadExtScalar> {
    QuadExtScalar z = a.base;
    for (std::uint64_t k = 0; k <= horizon; ++k) {
      if (z == b.base) {
        QuadExtScalar t = QuadExtScalar::integer(static_cast<long>(k), d) + b.height - a.height;
        if (t.sign() >= 0) return t;
      }
      auto nz = flow.step(z);
      if (!nz) break;
      z = std::move(*nz);
    }
    return std::nullopt;
  };
  DistPhiResult r;
  auto fwd = search(x, y), bwd = search(y, x);
  if (!fwd && !bwd) {
    r.value = flow.diameter();
    r.time = QuadExtScalar(d);
    return r;
  }
  r.same_orbit = true;
  if (fwd && (!bwd || *fwd <= *bwd)) {
    r.time = *fwd;
    r.value = flow.segment_diameter(x, *fwd);
  } else {
    r.time = -*bwd;
    r.value = flow.segment_diameter(y, *bwd);
  }
  return r;
}

Beta0Result beta0_lower_bound(const SuspensionFlow& flow, const Beta0Options& opt) {
  const auto& f = flow.base();
  const std::int64_t d = flow.field();
  const QuadExtScalar T = opt.segment_time.is_zero() ? QuadExtScalar::integer(64, d) : opt.segment_time;
  const QuadExtScalar zero(d);
  const auto half = QuadExtScalar::rational(BigRational(1, 2), d);
  Beta0Result r;
  for (int i = 0; i < f.n() && r.starts.size() < opt.samples; ++i) {
    r.starts.push_back({f.breakpoints()[i] + half * f.lengths()[i], zero});
  }
  for (int k = 0; k < f.n() && r.starts.size() < opt.samples; ++k) {
    if (!flow.is_singular_breakpoint(k)) continue;
    r.starts.push_back({f.right_limit(k), zero});
    if (r.starts.size() < opt.samples) r.starts.push_back({f.left_limit(k), zero});
  }
  std::mt19937_64 rng(opt.seed);
  while (r.starts.size() < opt.samples) {
    const BigRational q(static_cast<long>(rng() % (1u << 30)), 1L << 30);
    QuadExtScalar b = QuadExtScalar::rational(q, d);
    if (!f.interval_of(b)) continue;
    r.starts.push_back({b, zero});
  }
  r.bound = flow.diameter();
  for (const auto& s : r.starts) {
    r.diameters.push_back(flow.segment_diameter(s, T));
    r.bound = std::min(r.bound, r.diameters.back());
  }
  return r;
}

QuadExtScalar canonical_pairing(const SuspensionPoint& x, const SuspensionPoint& y, const QuadExtScalar& t) {
  const auto one = QuadExtScalar::integer(1, t.d());
  const QuadExtScalar t1 = one - x.height;
  if (t < t1) return t * (one - y.height) / t1;
  return t + x.height - y.height;
}

PairTestResult expansive_pair_test(const SuspensionFlow& flow, const SuspensionPoint& x, const SuspensionPoint& y,
                                   const QuadExtScalar& delta, std::uint64_t horizon) {
  flow.validate(x);
  flow.validate(y);
  const std::int64_t d = flow.field();
  const auto one = QuadExtScalar::integer(1, d);
  const auto half = QuadExtScalar::rational(BigRational(1, 2), d);
  PairTestResult r;
  r.time = QuadExtScalar(d);
  r.sup = flow.distance(x, y);
  if (r.sup > delta) {
    r.status = PairStatus::Separated;
    return r;
  }
  // Middle of the first piece.
  const QuadExtScalar mid = flow.distance({x.base, half * (x.height + one)}, {y.base, half * (y.height + one)});
  r.sup = std::max(r.sup, mid);
  if (mid > delta) {
    r.status = PairStatus::Separated;
    r.time = half * (one - x.height);
    return r;
  }
  // Later pieces: both at equal heights, so the matched distance is the base circle distance.
  const IntervalExchange& f = flow.base();
  struct Out {
    bool separated;
    std::uint64_t n;
    QuadExtScalar sup;
  };
  Out o = detail::with_kernel(f, {x.base, y.base, delta}, [&](const auto& ker) {
    auto a = ker.from(x.base), b = ker.from(y.base);
    const auto dl = ker.from(delta);
    auto sup = ker.circle_distance(a, b);
    auto advance = [&](auto& p, int which, std::uint64_t n) {
      const int i = ker.locate(p);
      if (i >= 0) {
        p = ker.apply_in(p, i);
        return;
      }
      const int k = -i - 1;
      if (flow.is_singular_breakpoint(k)) throw SingularHit(which, k, n);
      p = ker.right_limit(k);
    };
    for (std::uint64_t n = 1; n <= horizon; ++n) {
      advance(a, 0, n - 1);
      advance(b, 1, n - 1);
      const auto c = ker.circle_distance(a, b);
      if (ker.arith().less(sup, c)) sup = c;
      if (ker.farther_than(a, b, dl)) return Out{true, n, ker.to(sup)};
    }
    return Out{false, horizon, ker.to(sup)};
  });
  r.sup = std::max(r.sup, o.sup);
  r.returns = o.n;
  if (o.separated) {
    r.status = PairStatus::Separated;
    r.time = QuadExtScalar::integer(static_cast<long>(o.n), d) - x.height + half;
    return r;
  }
  r.time = QuadExtScalar::integer(static_cast<long>(horizon), d) - x.height;
  r.dphi = dist_phi(flow, x, y, horizon);
  return r;
}

KStarResult kstar_pair_test(const SuspensionFlow& flow, const SuspensionPoint& x, const SuspensionPoint& y,
                            const QuadExtScalar& delta, const QuadExtScalar& eps, std::uint64_t horizon) {
  KStarResult r;
  r.pair = expansive_pair_test(flow, x, y, delta, horizon);
  if (r.pair.status == PairStatus::Separated) return r;
  const DistPhiResult& dp = *r.pair.dphi;
  if (!dp.same_orbit) {
    r.needs_budget = true;
    return r;
  }
  // y = phi_tau(x) gives phi_{h(t0) + tau}(x) = phi_{h(t0)}(y), so s = h(t0) + tau - t0;
  // s is constant on each piece after the first, and affine on the first.
  const std::int64_t d = flow.field();
  const auto one = QuadExtScalar::integer(1, d);
  std::vector<KStarWitness> cands{{QuadExtScalar(d), dp.time}};
  if (horizon >= 1) cands.push_back({one - x.height, dp.time + x.height - y.height});
  for (const auto& c : cands) {
    if (c.s.abs() < eps) {
      r.witness = c;
      return r;
    }
  }
  r.needs_budget = true;
  return r;
}

}  // namespace sflow

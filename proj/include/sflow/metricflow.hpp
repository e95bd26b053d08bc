#pragma once

// Metric apparatus on the roof-1 suspension of a circle exchange: orbit
// pseudo-distance, orbit diameters, and pair tests under the canonical
// return-to-return time pairing.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "sflow/iem.hpp"

namespace sflow {

/// Point of the suspension: base on the section, 0 <= height < 1.
struct SuspensionPoint {
  QuadExtScalar base;
  QuadExtScalar height;
  friend bool operator==(const SuspensionPoint&, const SuspensionPoint&) = default;
};

/// The forward orbit of a point reached a singular breakpoint at the roof.
class SingularHit : public std::runtime_error {
 public:
  SingularHit(int point, int breakpoint, std::uint64_t returns);
  int point;       // 0 for x, 1 for y
  int breakpoint;  // index in f.breakpoints()
  std::uint64_t returns;
};

class SuspensionFlow {
 public:
  explicit SuspensionFlow(IntervalExchange f);

  const IntervalExchange& base() const { return f_; }
  std::int64_t field() const { return f_.field(); }
  bool is_singular_breakpoint(int k) const { return singular_[k]; }

  /// Throws std::invalid_argument unless 0 <= height < 1 and base in [0, 1).
  void validate(const SuspensionPoint& p) const;
  /// phi_t(p) for t >= 0; SingularHit when the orbit is stopped before time t.
  SuspensionPoint flow(const SuspensionPoint& p, const QuadExtScalar& t) const;
  /// Section map that continues through removable breakpoints.
  std::optional<QuadExtScalar> step(const QuadExtScalar& x) const;

  /// max(circle distance, height difference), minimized over the roof identification.
  QuadExtScalar distance(const SuspensionPoint& p, const SuspensionPoint& q) const;
  /// Upper bound of distance(): 1/2.
  QuadExtScalar diameter() const;

  /// Diameter of phi_[0, T](p) sampled at the bottom, middle and top of every
  /// vertical piece. Stops early at a singular breakpoint.
  QuadExtScalar segment_diameter(const SuspensionPoint& p, const QuadExtScalar& T) const;

 private:
  IntervalExchange f_;
  std::vector<char> singular_;
};

struct DistPhiResult {
  QuadExtScalar value;
  /// y = phi_time(x) was found within the horizon (time may be negative).
  bool same_orbit = false;
  QuadExtScalar time;
};

/// Orbit pseudo-distance; returns diameter() when no common orbit segment of
/// at most `horizon` returns is found.
DistPhiResult dist_phi(const SuspensionFlow& flow, const SuspensionPoint& x, const SuspensionPoint& y,
                       std::uint64_t horizon);

struct Beta0Options {
  std::uint64_t samples = 32;
  QuadExtScalar segment_time;  // zero selects 64
  std::uint64_t seed = 1;
};

struct Beta0Result {
  QuadExtScalar bound;
  std::vector<SuspensionPoint> starts;
  std::vector<QuadExtScalar> diameters;
};

/// Minimum sampled segment diameter over regular starts: interval
/// midpoints, separatrix starts right of each singular point, then seeded
/// random points. Each entry is a lower bound for that orbit's diameter.
Beta0Result beta0_lower_bound(const SuspensionFlow& flow, const Beta0Options& opt);

enum class PairStatus { Separated, NotSeparated };
const char* to_string(PairStatus s);

struct PairTestResult {
  PairStatus status = PairStatus::NotSeparated;
  /// Section returns before the deciding sample (the horizon when NotSeparated).
  std::uint64_t returns = 0;
  /// x-time of the deciding sample.
  QuadExtScalar time;
  /// Largest matched distance seen.
  QuadExtScalar sup;
  /// d_phi estimate, NotSeparated only.
  std::optional<DistPhiResult> dphi;
};

/// Canonical pairing: the n-th return of x is matched with the n-th return of
/// y, linearly in between. Samples are t = 0 and the middle of every piece.
PairTestResult expansive_pair_test(const SuspensionFlow& flow, const SuspensionPoint& x, const SuspensionPoint& y,
                                   const QuadExtScalar& delta, std::uint64_t horizon);

/// y-time matched with x-time t under the canonical pairing; h(0) = 0.
QuadExtScalar canonical_pairing(const SuspensionPoint& x, const SuspensionPoint& y, const QuadExtScalar& t);

struct KStarWitness {
  QuadExtScalar t0, s;  // phi_{t0 + s}(x) = phi_{h(t0)}(y)
};

struct KStarResult {
  PairTestResult pair;
  std::optional<KStarWitness> witness;
  /// No witness up to the horizon: rerun with a larger budget.
  bool needs_budget = false;
};

KStarResult kstar_pair_test(const SuspensionFlow& flow, const SuspensionPoint& x, const SuspensionPoint& y,
                            const QuadExtScalar& delta, const QuadExtScalar& eps, std::uint64_t horizon);

}  // namespace sflow

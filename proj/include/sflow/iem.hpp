#pragma once

// Interval exchange maps on the circle R/Z.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "sflow/certificate.hpp"
#include "sflow/exactnum.hpp"

namespace sflow {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class InvalidIem : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr std::uint64_t kDefaultBudget = 10000;

/// Intervals I_1..I_n laid out from 0 in order; perm[i] is the 1-based
/// position of the image of I_{i+1} in the target layout.
class IntervalExchange {
 public:
  IntervalExchange(std::vector<QuadExtScalar> lengths, std::vector<int> perm);

  int n() const { return static_cast<int>(lengths_.size()); }
  std::int64_t field() const { return d_; }
  const std::vector<QuadExtScalar>& lengths() const { return lengths_; }
  const std::vector<int>& permutation() const { return perm_; }
  /// Left endpoints a_0 = 0, a_1, ..., a_{n-1}.
  const std::vector<QuadExtScalar>& breakpoints() const { return left_; }
  /// Left endpoints of the image intervals f(I_i).
  const std::vector<QuadExtScalar>& image_lefts() const { return image_left_; }
  QuadExtScalar translation(int i) const { return image_left_[i] - left_[i]; }

  /// 0-based interval containing x (reduced mod 1), or nullopt when x is a breakpoint.
  std::optional<int> interval_of(const QuadExtScalar& x) const;
  /// Breakpoint index equal to x mod 1, if any.
  std::optional<int> breakpoint_index(const QuadExtScalar& x) const;

  /// Throws DomainError on breakpoints.
  QuadExtScalar apply(const QuadExtScalar& x) const;
  /// Image of a point already known to lie in interval i.
  QuadExtScalar apply_in(const QuadExtScalar& x, int i) const { return x - left_[i] + image_left_[i]; }

  /// f(a_j^-) and f(a_j^+), reduced mod 1.
  QuadExtScalar left_limit(int j) const;
  QuadExtScalar right_limit(int j) const { return image_left_[j]; }

  IntervalExchange inverse() const;
  bool is_rational() const;
  /// lcm of the length denominators; requires is_rational().
  BigInt common_denominator() const;
  bool has_identity_permutation() const;

  friend bool operator==(const IntervalExchange& x, const IntervalExchange& y) {
    return x.perm_ == y.perm_ && x.lengths_ == y.lengths_;
  }

 private:
  std::vector<QuadExtScalar> lengths_;
  std::vector<int> perm_;
  std::int64_t d_;
  std::vector<QuadExtScalar> left_;
  std::vector<QuadExtScalar> image_left_;
};

struct SingularData {
  std::vector<int> singular;   // breakpoint indices in sing_f
  std::vector<int> removable;  // A minus sing_f
};

SingularData singular_set(const IntervalExchange& f);

/// Fuses neighbours i, i+1 with perm[i+1] = perm[i] + 1 (same translation).
IntervalExchange merge_adjacent(const IntervalExchange& f);

struct OrbitResult {
  std::vector<QuadExtScalar> points;
  /// Set when points.back() is a breakpoint reached before k steps.
  std::optional<int> hit_breakpoint;
};

OrbitResult orbit(const IntervalExchange& f, const QuadExtScalar& x, std::uint64_t k);

/// Budget counts piece-steps of the bounded searches.
Certificate detect_periodic(const IntervalExchange& f, std::uint64_t budget = kDefaultBudget);
Certificate saddle_connection_search(const IntervalExchange& f, std::uint64_t depth = kDefaultBudget);
Certificate is_expansive_iem(const IntervalExchange& f, std::uint64_t budget = kDefaultBudget);

/// Re-checks a certificate witness by direct exact computation.
bool verify_witness(const IntervalExchange& f, const Certificate& c);

enum class SeparationStatus { Separated, NotSeparated, BreakpointHit };

struct SeparationResult {
  SeparationStatus status = SeparationStatus::NotSeparated;
  /// Iterate index of separation, of the hit, or the horizon.
  std::uint64_t index = 0;
  QuadExtScalar distance;
  /// Which point hit a breakpoint (0 for x, 1 for y) and its index.
  int hit_point = -1;
  int hit_breakpoint = -1;
};

const char* to_string(SeparationStatus s);

/// Least n <= horizon with circle distance of f^n x, f^n y strictly above delta.
SeparationResult separation_test(const IntervalExchange& f, const QuadExtScalar& x, const QuadExtScalar& y,
                                 const QuadExtScalar& delta, std::uint64_t horizon);

}  // namespace sflow

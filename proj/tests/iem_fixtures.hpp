#pragma once

// Shared instances for tests and the acceptance suite.

#include <algorithm>
#include <random>
#include <vector>

#include "sflow/iem.hpp"

namespace fixtures {

using sflow::BigRational;
using sflow::QuadExtScalar;

inline QuadExtScalar Q(const char* s, std::int64_t d) { return QuadExtScalar::parse(s, d); }

inline QuadExtScalar phi() { return Q("1/2+1/2*sqrt(5)", 5); }

/// (3 2 1) with lengths (1, phi^2, phi) / (2 phi^2). It is induced from the
/// rotation by phi/3, and no saddle connection appears within 10^5 steps.
inline sflow::IntervalExchange golden_321() {
  const auto p = phi();
  const auto s = QuadExtScalar::integer(2, 5) * p * p;
  return {{QuadExtScalar::integer(1, 5) / s, p * p / s, p / s}, {3, 2, 1}};
}

/// (4 3 2 1) with lengths proportional to 1, phi, phi^2, phi^3.
inline sflow::IntervalExchange golden_4321() {
  const auto p = phi();
  std::vector<QuadExtScalar> l{QuadExtScalar::integer(1, 5), p, p * p, p * p * p};
  QuadExtScalar s(5);
  for (const auto& x : l) s += x;
  for (auto& x : l) x /= s;
  return {l, {4, 3, 2, 1}};
}

/// Rotation by alpha presented as the swap of (1 - alpha, alpha).
inline sflow::IntervalExchange rotation(const QuadExtScalar& alpha) {
  return {{QuadExtScalar::integer(1, alpha.d()) - alpha, alpha}, {2, 1}};
}

inline bool irreducible(const std::vector<int>& perm) {
  const int n = static_cast<int>(perm.size());
  for (int k = 1; k < n; ++k) {
    int mx = 0;
    for (int i = 0; i < k; ++i) mx = std::max(mx, perm[i]);
    if (mx == k) return false;
  }
  return n >= 2;
}

inline std::vector<int> random_irreducible(std::mt19937_64& rng, int n) {
  std::vector<int> p(n);
  for (;;) {
    for (int i = 0; i < n; ++i) p[i] = i + 1;
    std::shuffle(p.begin(), p.end(), rng);
    if (irreducible(p)) return p;
  }
}

/// Positive Q(sqrt 2) lengths summing to 1.
inline std::vector<QuadExtScalar> random_sqrt2_lengths(std::mt19937_64& rng, int n) {
  std::uniform_int_distribution<long> num(1, 97), irr(-20, 20);
  std::vector<QuadExtScalar> l;
  QuadExtScalar s(2);
  for (int i = 0; i < n; ++i) {
    // a >= 31 and |b| <= 20 keep a + b sqrt2 positive.
    long b = irr(rng);
    QuadExtScalar x(BigRational(num(rng) + 30), BigRational(b, 1), 2);
    l.push_back(x);
    s += x;
  }
  for (auto& x : l) x /= s;
  return l;
}

/// Rational lengths k_i / q summing to 1 with q <= max_den.
inline std::vector<QuadExtScalar> random_rational_lengths(std::mt19937_64& rng, int n, long max_den) {
  std::uniform_int_distribution<long> qd(n, max_den);
  const long q = qd(rng);
  // n-1 distinct cut points in 1..q-1.
  std::vector<long> cuts;
  std::uniform_int_distribution<long> cd(1, q - 1);
  while (static_cast<int>(cuts.size()) < n - 1) {
    long c = cd(rng);
    if (std::find(cuts.begin(), cuts.end(), c) == cuts.end()) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.insert(cuts.begin(), 0);
  cuts.push_back(q);
  std::vector<QuadExtScalar> l;
  for (int i = 0; i < n; ++i) l.push_back(QuadExtScalar::rational(BigRational(cuts[i + 1] - cuts[i], q), 2));
  return l;
}

}  // namespace fixtures

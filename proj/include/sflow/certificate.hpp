#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "sflow/exactnum.hpp"

namespace sflow {

enum class Verdict { Yes, No, Unknown };

const char* to_string(Verdict v);

/// f^period(point) = point.
struct PeriodicWitness {
  QuadExtScalar point;
  std::uint64_t period = 0;
};

/// The one-sided image of breakpoint `from` reaches breakpoint `to` after
/// `steps` applications (step 1 is the one-sided limit itself).
struct ConnectionWitness {
  int from = 0;
  bool right_side = true;
  int to = 0;
  std::uint64_t steps = 0;
};

struct Certificate {
  Verdict verdict = Verdict::Unknown;
  /// Yes verdicts that rest on a bounded search.
  bool conditional = false;
  /// Search depth actually spent.
  std::uint64_t depth = 0;
  std::string reason;
  std::optional<PeriodicWitness> periodic;
  std::optional<ConnectionWitness> connection;

  static Certificate yes(std::string reason) { return {Verdict::Yes, false, 0, std::move(reason), {}, {}}; }
  static Certificate no(std::string reason) { return {Verdict::No, false, 0, std::move(reason), {}, {}}; }
  static Certificate unknown(std::string reason, std::uint64_t depth) {
    return {Verdict::Unknown, false, depth, std::move(reason), {}, {}};
  }

  /// Verdict plus conditional flag; what dual-path checks compare.
  std::string certificate_class() const;
};

}  // namespace sflow

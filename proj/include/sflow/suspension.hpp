#pragma once

// Combinatorial suspension of an interval exchange as a glued 2n-gon.

#include <stdexcept>
#include <vector>

#include "sflow/certificate.hpp"
#include "sflow/iem.hpp"

namespace sflow {

class ReduciblePermutation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SingularityRecord {
  /// Cone multiplicity: the class has total angle 2 pi k.
  int k = 1;
  /// Interior top vertices P_j (1 <= j <= n-1) in this class.
  std::vector<int> top_vertices;

  int index() const { return 1 - k; }
  int hyperbolic_sectors() const { return 2 * k; }
  friend bool operator==(const SingularityRecord&, const SingularityRecord&) = default;
};

/// Top vertices P_0..P_n, bottom vertices Q_0..Q_n; top edge i joins
/// P_{i-1}P_i and is glued to bottom edge Q_{pi(i)-1}Q_{pi(i)}.
class SuspensionComplex {
 public:
  const IntervalExchange& base() const { return base_; }
  int n() const { return base_.n(); }
  /// Class id of P_j and Q_j.
  int top_class(int j) const { return top_class_[j]; }
  int bottom_class(int j) const { return bottom_class_[j]; }
  int vertex_count() const { return static_cast<int>(classes_.size()); }
  const std::vector<SingularityRecord>& classes() const { return classes_; }
  int euler_characteristic() const { return vertex_count() - n() + 1; }
  int genus() const { return (2 - euler_characteristic()) / 2; }

 private:
  friend SuspensionComplex suspend(const IntervalExchange& f);
  explicit SuspensionComplex(IntervalExchange f) : base_(std::move(f)) {}

  IntervalExchange base_;
  std::vector<int> top_class_, bottom_class_;
  std::vector<SingularityRecord> classes_;
};

bool is_irreducible(const std::vector<int>& perm);

/// Throws ReduciblePermutation unless no proper prefix {1..k} is invariant.
SuspensionComplex suspend(const IntervalExchange& f);

/// One record per vertex class, ordered by smallest top vertex.
std::vector<SingularityRecord> vertex_classes(const SuspensionComplex& c);

struct FlowSurfaceDescriptor {
  bool orientable = true;
  int h = 0;  // handles (genus when orientable)
  int b = 0;  // boundary components
  int c = 0;  // cross-caps, 0..2
  std::vector<SingularityRecord> singularities;
  Certificate periodic;  // verdict of detect_periodic
  bool nonwandering_full = true;
  std::vector<ConnectionWitness> saddle_connections;

  int euler_characteristic() const { return 2 - 2 * h - b - c; }
  int index_sum() const;
  bool is_torus() const { return orientable && h == 1 && b == 0 && c == 0; }
};

FlowSurfaceDescriptor descriptor(const SuspensionComplex& c, const Certificate& periodic,
                                 const Certificate& connections);
/// Runs the iem searches with the given budget.
FlowSurfaceDescriptor descriptor(const SuspensionComplex& c, std::uint64_t budget = kDefaultBudget);

Certificate is_expansive_flow(const FlowSurfaceDescriptor& d, std::uint64_t budget = kDefaultBudget);

}  // namespace sflow

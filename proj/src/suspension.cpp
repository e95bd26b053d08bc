#include "sflow/suspension.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace sflow {

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int x, int y) { parent[find(x)] = find(y); }
};

}  // namespace

bool is_irreducible(const std::vector<int>& perm) {
  const int n = static_cast<int>(perm.size());
  if (n < 2) return false;
  int mx = 0;
  for (int k = 1; k < n; ++k) {
    mx = std::max(mx, perm[k - 1]);
    if (mx == k) return false;
  }
  return true;
}

SuspensionComplex suspend(const IntervalExchange& f) {
  if (!is_irreducible(f.permutation())) {
    throw ReduciblePermutation("permutation has an invariant proper prefix; its suspension has no quasi-global section");
  }
  const int n = f.n();
  const auto& pi = f.permutation();
  // P_j -> j, Q_j -> n + 1 + j
  UnionFind uf(2 * n + 2);
  auto P = [](int j) { return j; };
  auto Qv = [n](int j) { return n + 1 + j; };
  uf.unite(P(0), Qv(0));
  uf.unite(P(n), Qv(n));
  for (int i = 1; i <= n; ++i) {
    uf.unite(P(i - 1), Qv(pi[i - 1] - 1));
    uf.unite(P(i), Qv(pi[i - 1]));
  }
  SuspensionComplex c(f);
  std::map<int, int> root_to_class;
  // Classes are numbered by their first top vertex.
  for (int j = 0; j <= n; ++j) {
    const int r = uf.find(P(j));
    if (!root_to_class.count(r)) {
      root_to_class[r] = static_cast<int>(c.classes_.size());
      c.classes_.push_back({0, {}});
    }
  }
  for (int j = 0; j <= n; ++j) {
    if (!root_to_class.count(uf.find(Qv(j)))) {
      root_to_class[uf.find(Qv(j))] = static_cast<int>(c.classes_.size());
      c.classes_.push_back({0, {}});
    }
  }
  for (int j = 0; j <= n; ++j) {
    c.top_class_.push_back(root_to_class[uf.find(P(j))]);
    c.bottom_class_.push_back(root_to_class[uf.find(Qv(j))]);
  }
  for (int j = 1; j < n; ++j) {
    auto& rec = c.classes_[c.top_class_[j]];
    rec.k += 1;
    rec.top_vertices.push_back(j);
  }
  return c;
}

std::vector<SingularityRecord> vertex_classes(const SuspensionComplex& c) { return c.classes(); }

int FlowSurfaceDescriptor::index_sum() const {
  int s = 0;
  for (const auto& r : singularities) s += r.index();
  return s;
}

FlowSurfaceDescriptor descriptor(const SuspensionComplex& c, const Certificate& periodic,
                                 const Certificate& connections) {
  FlowSurfaceDescriptor d;
  d.orientable = true;
  d.h = c.genus();
  d.singularities = c.classes();
  d.periodic = periodic;
  // Suspensions of measure-preserving exchanges have an invariant measure
  // positive on open sets.
  d.nonwandering_full = true;
  if (connections.verdict == Verdict::Yes && connections.connection) {
    d.saddle_connections.push_back(*connections.connection);
  }
  return d;
}

FlowSurfaceDescriptor descriptor(const SuspensionComplex& c, std::uint64_t budget) {
  return descriptor(c, detect_periodic(c.base(), budget), saddle_connection_search(c.base(), budget));
}

Certificate is_expansive_flow(const FlowSurfaceDescriptor& d, std::uint64_t budget) {
  if (d.is_torus()) return Certificate::no("surface is the torus");
  if (d.periodic.verdict == Verdict::Yes) {
    Certificate c = Certificate::no("periodic orbit");
    c.periodic = d.periodic.periodic;
    c.depth = d.periodic.depth;
    return c;
  }
  const bool saddles = !d.singularities.empty() &&
                       std::any_of(d.singularities.begin(), d.singularities.end(),
                                   [](const auto& r) { return r.index() < 0; });
  if (!d.nonwandering_full || !saddles) return Certificate::unknown("hypotheses not established", 0);
  Certificate c = Certificate::yes("nonwandering set is the surface, finitely many saddles, no periodic orbit");
  c.conditional = d.periodic.verdict != Verdict::No;
  c.depth = c.conditional ? budget : 0;
  return c;
}

}  // namespace sflow

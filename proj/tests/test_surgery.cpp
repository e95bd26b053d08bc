#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <set>

#include "iem_fixtures.hpp"
#include "sflow/suspension.hpp"
#include "sflow/surgery.hpp"

using namespace sflow;
using fixtures::Q;

namespace {

IntervalExchange golden_rotation() { return fixtures::rotation(Q("-1/2+1/2*sqrt(5)", 5)); }

// Adds a golden-rotation torus and marks an orbit segment across its square.
int add_torus_with_segment(FlowAssembly& a, const std::string& label) {
  const int base = static_cast<int>(a.half_edges().size());
  a.add_piece(golden_rotation(), label);
  return a.mark_segment(base, base + 3);
}

int source_corner(const FlowAssembly& a, int e) {
  const auto& h = a.half_edges()[e];
  return h.dir > 0 ? e : h.next;
}

int sink_corner(const FlowAssembly& a, int e) {
  const auto& h = a.half_edges()[e];
  return h.dir > 0 ? h.next : e;
}

// Torus with one boundary: fake saddles at both ends of a segment, then a cut.
struct CutTorus {
  FlowAssembly a;
  int side1, side2;
};

CutTorus cut_torus(FlowAssembly a, int seg) {
  a.add_fake_saddle(source_corner(a, seg));
  a.add_fake_saddle(sink_corner(a, seg));
  auto [x, y] = a.cut(seg);
  return {a, x, y};
}

struct BiTorus {
  FlowAssembly a;
  int g1, g1p, g2, g2p;
};

BiTorus bitorus() {
  FlowAssembly a;
  const int s1 = add_torus_with_segment(a, "A");
  const int s2 = add_torus_with_segment(a, "B");
  for (int s : {s1, s2}) {
    a.add_fake_saddle(source_corner(a, s));
    a.add_fake_saddle(sink_corner(a, s));
  }
  auto [g1, g1p] = a.cut(s1);
  auto [g2, g2p] = a.cut(s2);
  a.glue(g1, g2p);
  a.glue(g1p, g2);
  return {a, g1, g1p, g2, g2p};
}

// Marks a segment between two transverse sides of some face.
int fresh_segment(FlowAssembly& a) {
  const auto& he = a.half_edges();
  for (int f = 0; f < static_cast<int>(a.faces().size()); ++f) {
    for (int x = a.faces()[f];;) {
      for (int y = he[he[x].next].next; y != x; y = he[y].next) {
        if (he[x].kind != EdgeKind::Transverse || he[y].kind != EdgeKind::Transverse) continue;
        FlowAssembly trial = a;
        try {
          const int s = trial.mark_segment(x, y);
          a = std::move(trial);
          return s;
        } catch (const InvalidSite&) {
        }
      }
      x = he[x].next;
      if (x == a.faces()[f]) break;
    }
  }
  throw std::runtime_error("no face takes a segment");
}

std::vector<int> negative_indices(const AssemblyTopology& t, int component) {
  std::vector<int> out;
  for (const auto& v : t.vertices) {
    if (v.component == component && v.twice_index < 0) out.push_back(v.twice_index);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("admissible signatures") {
  CHECK_FALSE(admits_expansive({1, 0, 0}));
  CHECK(admits_expansive({2, 0, 0}));
  CHECK_FALSE(admits_expansive({0, 3, 0}));
  CHECK(admits_expansive({1, 1, 0}));
  CHECK(canonical({0, 1, 5}) == SurfaceSignature{2, 1, 1});
  CHECK(canonical({0, 0, 4}).euler_characteristic() == SurfaceSignature{0, 0, 4}.euler_characteristic());

  // Exclusion list: torus, and spheres, projective planes, Klein bottles with boundaries.
  for (int h = 0; h <= 3; ++h) {
    for (int b = 0; b <= 3; ++b) {
      for (int c = 0; c <= 2; ++c) {
        const bool excluded = (h == 1 && b == 0 && c == 0) || (h == 0 && c <= 2);
        CHECK(admits_expansive({h, b, c}) == !excluded);
      }
    }
  }
}

TEST_CASE("suspension pieces") {
  FlowAssembly a;
  a.add_piece(golden_rotation(), "T");
  auto t = a.topology();
  REQUIRE(t.components.size() == 1);
  CHECK(t.components[0].signature == SurfaceSignature{1, 0, 0});
  CHECK(t.components[0].orientable);
  REQUIRE(t.vertices.size() == 1);
  CHECK(t.vertices[0].fake);
  CHECK(t.vertices[0].twice_index == 0);

  a.add_piece(fixtures::golden_4321(), "G");
  t = a.topology();
  REQUIRE(t.components.size() == 2);
  CHECK(t.components[1].signature == SurfaceSignature{2, 0, 0});
  CHECK(negative_indices(t, 1) == std::vector<int>{-4});
}

TEST_CASE("without fake saddles the singular set is the negative-index set of the suspension") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 5);
    const auto perm = fixtures::random_irreducible(rng, n);
    const IntervalExchange f(fixtures::random_sqrt2_lengths(rng, n), perm);
    FlowAssembly a;
    a.add_piece(f, "P", 200);
    const auto b = remove_all_fake_saddles(a);
    const auto t = b.topology();
    const auto sc = suspend(f);
    std::multiset<int> ours, theirs;
    for (const auto& v : t.vertices) {
      if (v.singular()) ours.insert(v.twice_index);
    }
    for (const auto& r : sc.classes()) {
      if (r.index() < 0) theirs.insert(2 * r.index());
    }
    CHECK(ours == theirs);
    CHECK(t.components[0].euler_characteristic == sc.euler_characteristic());
  }
}

TEST_CASE("fake saddles: round trip, errors, verdict invariance") {
  FlowAssembly a;
  const int seg = add_torus_with_segment(a, "T");
  const int p = source_corner(a, seg);
  const auto with = add_fake_saddle(a, p);
  CHECK_FALSE(with == a);
  CHECK(remove_fake_saddle(with, p) == a);
  CHECK_THROWS_AS(add_fake_saddle(with, p), InvalidSite);
  CHECK_THROWS_AS(remove_fake_saddle(a, p), InvalidSite);

  // The irrational torus with an extra fake saddle is still not expansive.
  auto v = assemble_and_decide(with);
  REQUIRE(v.size() == 1);
  CHECK(v[0].certificate.verdict == Verdict::No);
  CHECK(assemble_and_decide(a)[0].certificate.verdict == Verdict::No);

  FlowAssembly g;
  g.add_piece(fixtures::golden_4321(), "G");
  CHECK_THROWS_AS(remove_fake_saddle(g, 0), NotRemovable);
  const auto gv = assemble_and_decide(g);
  const int gseg = g.mark_segment(0, 2);
  const auto gf = add_fake_saddle(g, source_corner(g, gseg));
  CHECK(assemble_and_decide(gf)[0].certificate.verdict == gv[0].certificate.verdict);
  CHECK(gv[0].certificate.verdict != Verdict::Unknown);
}

TEST_CASE("cut and glue") {
  FlowAssembly a;
  const int seg = add_torus_with_segment(a, "T");
  // A segment between regular points is not a saddle connection.
  CHECK_THROWS_AS(a.cut(seg), InvalidSite);

  auto ct = cut_torus(a, seg);
  auto t = ct.a.topology();
  REQUIRE(t.components.size() == 1);
  CHECK(t.components[0].signature == SurfaceSignature{1, 1, 0});
  CHECK(negative_indices(t, 0) == std::vector<int>{-1, -1});
  CHECK_THROWS_AS(ct.a.cut(ct.side1), NotInterior);
  CHECK_THROWS_AS(ct.a.glue(ct.side1, ct.side1), IncompatibleArcs);

  // Glue the two arcs of the cut back.
  auto back = glue_saddle_connections(ct.a, ct.side1, ct.side2);
  auto closed = a;
  closed.add_fake_saddle(source_corner(a, seg));
  closed.add_fake_saddle(sink_corner(a, seg));
  CHECK(back == closed);
  CHECK(back.topology().components[0].signature == SurfaceSignature{1, 0, 0});
  // Glue then cut is the identity as well.
  CHECK(cut_saddle_connection(back, ct.side1) == ct.a);
}

TEST_CASE("two tori cut and glued give the bi-torus") {
  auto bt = bitorus();
  auto t = bt.a.topology();
  REQUIRE(t.components.size() == 1);
  CHECK(t.components[0].signature == SurfaceSignature{2, 0, 0});
  CHECK(t.components[0].orientable);
  CHECK(t.components[0].euler_characteristic == -2);
  CHECK(negative_indices(t, 0) == std::vector<int>{-2, -2});
  CHECK(admits_expansive(t.components[0].signature));
  auto v = assemble_and_decide(bt.a, true);
  REQUIRE(v.size() == 1);
  CHECK(v[0].certificate.verdict == Verdict::Yes);
  CHECK(v[0].certificate.conditional);

  // One cut leaves a connected surface with a boundary; the second separates.
  auto one = cut_saddle_connection(bt.a, bt.g1);
  auto t1 = one.topology();
  REQUIRE(t1.components.size() == 1);
  CHECK(t1.components[0].boundaries == 1);
  CHECK_THROWS_AS(assemble_and_decide(one, true), UnresolvedBoundary);
  auto two = cut_saddle_connection(one, bt.g1p);
  auto t2 = two.topology();
  REQUIRE(t2.components.size() == 2);
  for (const auto& c : t2.components) CHECK(c.signature == SurfaceSignature{1, 1, 0});

  // Re-gluing each torus to itself gives two tori, each not expansive.
  auto tori = glue_saddle_connections(glue_saddle_connections(two, bt.g1, bt.g1p), bt.g2, bt.g2p);
  auto tv = assemble_and_decide(tori, true);
  REQUIRE(tv.size() == 2);
  for (const auto& c : tv) {
    CHECK(c.signature == SurfaceSignature{1, 0, 0});
    CHECK(c.certificate.verdict == Verdict::No);
  }

  // Both pairings reversed: the second copy is reflected as a whole.
  auto ct = cut_saddle_connection(cut_saddle_connection(bt.a, bt.g1), bt.g1p);
  auto twisted = glue_saddle_connections(glue_saddle_connections(ct, bt.g1, bt.g2), bt.g1p, bt.g2p);
  auto tt = twisted.topology();
  REQUIRE(tt.components.size() == 1);
  CHECK(tt.components[0].orientable);
  CHECK(tt.components[0].signature == SurfaceSignature{2, 0, 0});
}

TEST_CASE("adding boundaries") {
  FlowAssembly a;
  const int seg = add_torus_with_segment(a, "T");
  const int seg2 = a.mark_segment(1, 5);
  auto b = add_boundary(a, seg);
  auto t = b.topology();
  REQUIRE(t.components.size() == 1);
  CHECK(t.components[0].signature == SurfaceSignature{1, 1, 0});
  CHECK(admits_expansive(t.components[0].signature));

  // Two arcs, running X -> Y and Y -> X between the two singular points.
  REQUIRE(t.boundaries.size() == 1);
  std::vector<Arc> arcs;
  std::set<int> covered;
  for (int h : t.boundaries[0]) {
    if (covered.count(h)) continue;
    arcs.push_back(b.arc_through(t, h));
    covered.insert(arcs.back().edges.begin(), arcs.back().edges.end());
  }
  REQUIRE(arcs.size() == 2);
  CHECK(arcs[0].source == arcs[1].sink);
  CHECK(arcs[0].sink == arcs[1].source);
  CHECK(arcs[0].source != arcs[0].sink);
  std::vector<int> idx{t.vertices[arcs[0].source].twice_index, t.vertices[arcs[0].sink].twice_index};
  std::sort(idx.begin(), idx.end());
  CHECK(idx == std::vector<int>{-2, 0});

  auto bb = add_boundary(b, seg2);
  CHECK(bb.topology().components[0].signature == SurfaceSignature{1, 2, 0});
  CHECK(assemble_and_decide(bb)[0].certificate.verdict == Verdict::Yes);

  // A boundary glued to itself along its two arcs makes a cross-cap.
  auto cc = glue_saddle_connections(b, arcs[0].edges.front(), arcs[1].edges.front());
  auto tc = cc.topology();
  CHECK_FALSE(tc.components[0].orientable);
  CHECK(tc.components[0].signature == SurfaceSignature{1, 0, 1});
  CHECK(assemble_and_decide(cc, true)[0].certificate.verdict == Verdict::Yes);

  // Two boundaries glued to each other make a handle.
  auto tb = bb.topology();
  REQUIRE(tb.boundaries.size() == 2);
  auto arcs_of = [&](const std::vector<int>& cyc) {
    std::vector<Arc> out;
    std::set<int> seen;
    for (int h : cyc) {
      if (seen.count(h)) continue;
      out.push_back(bb.arc_through(tb, h));
      seen.insert(out.back().edges.begin(), out.back().edges.end());
    }
    return out;
  };
  auto A = arcs_of(tb.boundaries[0]), B = arcs_of(tb.boundaries[1]);
  REQUIRE(A.size() == 2);
  REQUIRE(B.size() == 2);
  auto handle = glue_saddle_connections(glue_saddle_connections(bb, A[0].edges.front(), B[0].edges.front()),
                                        A[1].edges.front(), B[1].edges.front());
  auto th = handle.topology();
  REQUIRE(th.components.size() == 1);
  CHECK(th.components[0].boundaries == 0);
  CHECK(th.components[0].euler_characteristic == -2);
}

TEST_CASE("collapsing boundaries") {
  FlowAssembly a;
  const int seg = add_torus_with_segment(a, "T");
  auto ct = cut_torus(a, seg);
  auto closed = collapse_boundary(ct.a, ct.side1);
  auto t = closed.topology();
  REQUIRE(t.components.size() == 1);
  CHECK(t.components[0].signature == SurfaceSignature{1, 0, 0});
  for (const auto& v : t.vertices) CHECK(v.twice_index == 0);
  auto bare = remove_all_fake_saddles(closed).topology();
  for (const auto& v : bare.vertices) CHECK_FALSE(v.singular());

  auto b = add_boundary(a, seg);
  const int bedge = b.topology().boundaries[0].front();
  auto c = collapse_boundary(b, bedge);
  CHECK(c.topology().components[0].signature == SurfaceSignature{1, 0, 0});
  CHECK(replay(c.transcript()) == c);

  // Collapse, then add a boundary again at a fresh segment.
  auto again = add_boundary(c, fresh_segment(c));
  CHECK(again.topology().components[0].signature == b.topology().components[0].signature);

  // Structure: cut every interior connection of the bi-torus, collapse each boundary.
  auto bt = bitorus();
  auto pieces = cut_saddle_connection(cut_saddle_connection(bt.a, bt.g1), bt.g1p);
  auto tp = pieces.topology();
  REQUIRE(tp.boundaries.size() == 2);
  const int e1 = tp.boundaries[0].front(), e2 = tp.boundaries[1].front();
  auto minimal = remove_all_fake_saddles(collapse_boundary(collapse_boundary(pieces, e1), e2));
  auto tm = minimal.topology();
  REQUIRE(tm.components.size() == 2);
  for (const auto& comp : tm.components) CHECK(comp.signature == SurfaceSignature{1, 0, 0});
  for (const auto& v : tm.vertices) CHECK_FALSE(v.singular());
}

TEST_CASE("transcripts replay exactly") {
  auto bt = bitorus();
  auto r = replay(bt.a.transcript());
  CHECK(r.half_edges() == bt.a.half_edges());
  CHECK(r == bt.a);
  CHECK(r.transcript() == bt.a.transcript());

  FlowAssembly a;
  const int seg = add_torus_with_segment(a, "T");
  auto b = add_boundary(a, seg);
  CHECK(replay(b.transcript()).half_edges() == b.half_edges());
}

TEST_CASE("random operation sequences keep the bookkeeping consistent") {
  std::mt19937_64 rng(21);
  int applied = 0;
  for (int run = 0; run < 12; ++run) {
    FlowAssembly a = bitorus().a;
    add_torus_with_segment(a, "C");
    for (int step = 0; step < 25; ++step) {
      const auto t = a.topology();
      const auto& he = a.half_edges();
      const int H = static_cast<int>(he.size());
      const int e = static_cast<int>(rng() % H);
      FlowAssembly next = a;
      try {
        switch (rng() % 7) {
          case 0: next.add_fake_saddle(e); break;
          case 1: next.remove_fake_saddle(e); break;
          case 2: next.cut(e); break;
          case 3: next.glue(e, static_cast<int>(rng() % H)); break;
          case 4: next = add_boundary(next, e); break;
          case 5: next = collapse_boundary(next, e); break;
          default: {
            const int f = he[e].face;
            int o = e;
            for (int k = 0, m = 2 + static_cast<int>(rng() % 3); k < m; ++k) o = he[o].next;
            if (he[o].face == f && o != e) next.mark_segment(e, o);
          }
        }
      } catch (const std::invalid_argument&) {
        continue;
      }
      const auto nt = next.topology();
      for (const auto& c : nt.components) {
        CHECK(c.euler_characteristic == canonical(c.signature).euler_characteristic());
      }
      for (const auto& v : assemble_and_decide(next)) {
        if (v.signature.is_torus()) CHECK(v.certificate.verdict == Verdict::No);
        if (v.certificate.verdict == Verdict::Yes) CHECK(admits_expansive(v.signature));
      }
      a = std::move(next);
      ++applied;
    }
    CHECK(replay(a.transcript()) == a);
  }
  CHECK(applied > 60);
}

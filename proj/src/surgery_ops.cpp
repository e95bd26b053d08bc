#include <algorithm>
#include <set>

#include "sflow/surgery.hpp"

namespace sflow {

void FlowAssembly::add_fake_saddle(int corner) {
  if (corner < 0 || corner >= static_cast<int>(he_.size())) throw InvalidSite("no corner " + std::to_string(corner));
  const auto t = topology();
  const auto& v = t.vertices[t.vertex_of[corner]];
  if (v.singular()) throw InvalidSite("corner " + std::to_string(corner) + " is already a singular point");
  record({"add_fake_saddle", {corner}, {}});
  for (int c : v.corners) he_[c].fake = true;
}

void FlowAssembly::remove_fake_saddle(int corner) {
  if (corner < 0 || corner >= static_cast<int>(he_.size())) throw InvalidSite("no corner " + std::to_string(corner));
  const auto t = topology();
  const auto& v = t.vertices[t.vertex_of[corner]];
  if (v.twice_index != 0) {
    throw NotRemovable("singular point at corner " + std::to_string(corner) + " has index " +
                       std::to_string(v.twice_index) + "/2");
  }
  if (v.broken_flow) throw NotRemovable("the flow does not pass through corner " + std::to_string(corner));
  if (!v.fake) throw InvalidSite("corner " + std::to_string(corner) + " is a regular point");
  record({"remove_fake_saddle", {corner}, {}});
  for (int c : v.corners) he_[c].fake = false;
}

std::pair<int, int> FlowAssembly::cut(int e) {
  if (e < 0 || e >= static_cast<int>(he_.size())) throw InvalidSite("no half-edge " + std::to_string(e));
  const auto t = topology();
  const Arc a = arc_through(t, e);
  if (a.boundary) throw NotInterior("half-edge " + std::to_string(e) + " is already on the boundary");
  if (!t.vertices[a.source].singular() || !t.vertices[a.sink].singular()) {
    throw InvalidSite("orbit segment through half-edge " + std::to_string(e) + " does not end at singular points");
  }
  record({"cut", {e}, {}});
  const int partner = he_[e].twin;
  for (int x : a.edges) {
    const int y = he_[x].twin;
    he_[x].twin = he_[y].twin = -1;
    he_[x].flip = he_[y].flip = false;
  }
  return {e, partner};
}

void FlowAssembly::glue(int e1, int e2) {
  const int H = static_cast<int>(he_.size());
  for (int e : {e1, e2}) {
    if (e < 0 || e >= H) throw IncompatibleArcs("no half-edge " + std::to_string(e));
    if (he_[e].twin >= 0 || he_[e].kind != EdgeKind::Orbit) {
      throw IncompatibleArcs("half-edge " + std::to_string(e) + " is not a boundary orbit edge");
    }
  }
  const auto t = topology();
  Arc A = arc_through(t, e1), B = arc_through(t, e2);
  for (const Arc* x : {&A, &B}) {
    if (!t.vertices[x->source].singular() || !t.vertices[x->sink].singular()) {
      throw IncompatibleArcs("boundary arc does not end at singular points");
    }
  }
  if (std::find(A.edges.begin(), A.edges.end(), B.edges.front()) != A.edges.end()) {
    throw IncompatibleArcs("an arc cannot be glued to itself");
  }
  record({"glue", {e1, e2}, {}});
  {
    QuietScope quiet(*this);
    // Equal edge counts, subdividing the last edge of the shorter arc.
    auto lengthen = [&](Arc& x, std::size_t n) {
      while (x.edges.size() < n) {
        const int last = x.edges.back();
        const int nw = subdivide(last);
        if (he_[last].dir > 0) {
          x.edges.push_back(nw);
        } else {
          x.edges.back() = nw;
          x.edges.push_back(last);
        }
      }
    };
    lengthen(A, B.edges.size());
    lengthen(B, A.edges.size());
  }
  for (std::size_t i = 0; i < A.edges.size(); ++i) {
    const int a = A.edges[i], b = B.edges[i];
    pair(a, b, he_[a].dir == he_[b].dir);
  }
}

FlowAssembly add_fake_saddle(const FlowAssembly& a, int corner) {
  FlowAssembly c = a;
  c.add_fake_saddle(corner);
  return c;
}

FlowAssembly remove_fake_saddle(const FlowAssembly& a, int corner) {
  FlowAssembly c = a;
  c.remove_fake_saddle(corner);
  return c;
}

FlowAssembly cut_saddle_connection(const FlowAssembly& a, int e) {
  FlowAssembly c = a;
  c.cut(e);
  return c;
}

FlowAssembly glue_saddle_connections(const FlowAssembly& a, int e1, int e2) {
  FlowAssembly c = a;
  c.glue(e1, e2);
  return c;
}

FlowAssembly remove_all_fake_saddles(const FlowAssembly& a) {
  FlowAssembly c = a;
  for (;;) {
    const auto t = c.topology();
    auto it = std::find_if(t.vertices.begin(), t.vertices.end(),
                           [](const AssemblyVertex& v) { return v.fake && v.twice_index == 0 && !v.broken_flow; });
    if (it == t.vertices.end()) return c;
    c.remove_fake_saddle(it->corners.front());
  }
}

FlowAssembly add_boundary(const FlowAssembly& a, int segment) {
  const auto& he = a.half_edges();
  if (segment < 0 || segment >= static_cast<int>(he.size()) || he[segment].kind != EdgeKind::Orbit ||
      he[segment].twin < 0) {
    throw InvalidSite("add_boundary needs an interior orbit edge");
  }
  const auto t = a.topology();
  const int p = a.source_vertex(t, segment), q = a.sink_vertex(t, segment);
  if (p == q || t.vertices[p].singular() || t.vertices[q].singular()) {
    throw InvalidSite("add_boundary needs an orbit segment between two distinct regular points");
  }
  const bool fwd = he[segment].dir > 0;
  const int p_corner = fwd ? segment : he[segment].next;
  const int q_corner = fwd ? he[segment].next : segment;

  FlowAssembly c = a;
  c.add_fake_saddle(p_corner);
  c.add_fake_saddle(q_corner);
  const auto [g, g2] = c.cut(segment);
  // Two fake saddles r, s on g so that it reads p -> r -> s -> q.
  int pr, r_corner, s_corner;
  if (fwd) {
    const int r2 = c.subdivide(g);
    const int s2 = c.subdivide(r2);
    pr = g;
    r_corner = r2;
    s_corner = s2;
  } else {
    const int r2 = c.subdivide(g);
    const int s2 = c.subdivide(g);
    pr = r2;
    r_corner = r2;
    s_corner = s2;
  }
  c.add_fake_saddle(r_corner);
  c.add_fake_saddle(s_corner);
  c.glue(pr, g2);
  return c;
}

namespace {

// Cuts along a new separatrix of boundary vertex v that leaves the boundary
// side at angle pi. On success the first-split part of v is regular.
bool separatrix_cut(FlowAssembly& c, const AssemblyTopology& t, int v) {
  const auto& he = c.half_edges();
  std::vector<std::pair<int, int>> starts;  // (corner, entered side)
  for (int h : t.vertices[v].corners) {
    if (he[h].twin < 0) starts.push_back({h, h});
    if (he[he[h].prev].twin < 0) starts.push_back({h, he[h].prev});
  }
  for (auto [h0, side0] : starts) {
    const bool beta_out = side0 == h0 ? he[h0].dir > 0 : he[side0].dir < 0;
    int h = h0, in_side = side0;
    BigRational acc = 0;
    for (std::size_t guard = 0; guard <= t.vertices[v].corners.size(); ++guard) {
      const BigRational a = he[h].angle;
      const int out_side = in_side == h ? he[h].prev : h;
      if (acc + a > 1) {
        BigRational share = in_side == h ? BigRational(1 - acc) : BigRational(a - (1 - acc));
        share.canonicalize();
        const int dirv = beta_out ? -1 : 1;
        for (int T = he[h].next; T != he[h].prev; T = he[T].next) {
          FlowAssembly trial = c;
          try {
            const int m = trial.subdivide(T);
            const int d2 = trial.split_face(h, m, EdgeKind::Orbit, dirv, share);
            trial.add_fake_saddle(m);
            trial.cut(d2);
          } catch (const InvalidSite&) {
            continue;
          }
          c = std::move(trial);
          return true;
        }
        break;
      }
      if (acc + a == 1) {
        const int X = out_side;
        if (he[X].kind != EdgeKind::Orbit || he[X].twin < 0) break;
        const bool x_out = X == h ? he[X].dir > 0 : he[X].dir < 0;
        if (x_out == beta_out) break;
        const int q_corner = X == h ? he[X].next : X;
        FlowAssembly trial = c;
        try {
          const auto tt = trial.topology();
          if (!tt.vertices[tt.vertex_of[q_corner]].singular()) trial.add_fake_saddle(q_corner);
          trial.cut(X);
        } catch (const InvalidSite&) {
          break;
        }
        c = std::move(trial);
        return true;
      }
      acc += a;
      const int y = he[out_side].twin;
      if (y < 0) break;
      if (out_side == h) {
        h = he[y].flip ? y : he[y].next;
      } else {
        h = he[y].flip ? he[y].next : y;
      }
      in_side = y;
    }
  }
  return false;
}

}  // namespace

FlowAssembly collapse_boundary(const FlowAssembly& a, int e) {
  const auto& he0 = a.half_edges();
  if (e < 0 || e >= static_cast<int>(he0.size()) || he0[e].twin >= 0) {
    throw InvalidSite("half-edge " + std::to_string(e) + " is not on the boundary");
  }
  FlowAssembly c = a;
  std::vector<int> hint{e};
  const std::size_t limit = 64 + 16 * he0.size();
  for (std::size_t round = 0;; ++round) {
    if (round > limit) throw std::logic_error("collapse_boundary did not terminate");
    const auto t = c.topology();
    const auto& he = c.half_edges();
    const std::vector<int>* B = nullptr;
    for (const auto& cyc : t.boundaries) {
      for (int h : hint) {
        if (std::find(cyc.begin(), cyc.end(), h) != cyc.end()) B = &cyc;
      }
      if (B) break;
    }
    if (!B) return c;
    hint = *B;

    std::set<int> verts;
    for (int h : *B) {
      verts.insert(t.vertex_of[h]);
      verts.insert(t.vertex_of[he[h].next]);
    }
    bool removed = false;
    for (int v : verts) {
      const auto& x = t.vertices[v];
      if (x.fake && x.twice_index == 0 && !x.broken_flow) {
        c.remove_fake_saddle(x.corners.front());
        removed = true;
        break;
      }
    }
    if (removed) continue;

    std::vector<Arc> arcs;
    std::set<int> covered;
    for (int h : *B) {
      if (covered.count(h)) continue;
      Arc arc = c.arc_through(t, h);
      covered.insert(arc.edges.begin(), arc.edges.end());
      arcs.push_back(std::move(arc));
    }
    bool folded = false;
    for (std::size_t i = 0; i < arcs.size() && !folded; ++i) {
      for (std::size_t j = i + 1; j < arcs.size() && !folded; ++j) {
        if (arcs[i].source == arcs[j].source || arcs[i].sink == arcs[j].sink) {
          c.glue(arcs[i].edges.front(), arcs[j].edges.front());
          folded = true;
        }
      }
    }
    if (folded) continue;

    std::vector<int> order(verts.begin(), verts.end());
    std::stable_sort(order.begin(), order.end(),
                     [&](int x, int y) { return t.vertices[x].twice_index < t.vertices[y].twice_index; });
    bool done = false;
    for (int v : order) {
      if (t.vertices[v].angle <= 1) continue;
      if (separatrix_cut(c, t, v)) {
        done = true;
        break;
      }
    }
    if (!done) throw std::runtime_error("collapse_boundary: no separatrix can be cut at this boundary");
  }
}

std::vector<ComponentVerdict> assemble_and_decide(const FlowAssembly& a, bool closed) {
  const auto t = a.topology();
  std::vector<ComponentVerdict> out;
  for (std::size_t ci = 0; ci < t.components.size(); ++ci) {
    const auto& comp = t.components[ci];
    if (closed && comp.boundaries > 0) {
      throw UnresolvedBoundary("component " + std::to_string(ci) + " has " + std::to_string(comp.boundaries) +
                               " unpaired boundary component(s)");
    }
    ComponentVerdict r;
    r.component = static_cast<int>(ci);
    r.signature = comp.signature;
    r.orientable = comp.orientable;
    r.pieces = comp.pieces;
    for (const auto& v : t.vertices) {
      if (v.component == static_cast<int>(ci) && v.singular()) r.singular_indices.push_back(v.twice_index);
    }
    std::sort(r.singular_indices.begin(), r.singular_indices.end());

    const AssemblyPiece* periodic = nullptr;
    std::uint64_t depth = 0;
    for (int p : comp.pieces) {
      const auto& pc = a.pieces()[p];
      if (pc.periodic.verdict == Verdict::Yes && !periodic) periodic = &pc;
      if (pc.periodic.verdict == Verdict::Unknown) depth = std::max(depth, pc.periodic.depth);
    }
    if (periodic) {
      r.certificate = Certificate::no("piece " + periodic->label + " has a periodic orbit");
      r.certificate.periodic = periodic->periodic.periodic;
    } else if (comp.signature.is_torus()) {
      r.certificate = Certificate::no("component is the torus");
    } else if (!admits_expansive(comp.signature)) {
      r.certificate = Certificate::no(to_string(comp.signature) + " admits no expansive flow");
    } else {
      r.certificate = Certificate::yes("minimal pieces joined by basic operations on " + to_string(comp.signature));
      r.certificate.conditional = true;
      r.certificate.depth = depth;
    }
    out.push_back(std::move(r));
  }
  return out;
}

void apply_step(FlowAssembly& c, const SurgeryStep& s) {
  auto arg = [&](std::size_t i) {
    if (i >= s.args.size()) throw std::invalid_argument("step '" + s.op + "' is missing arguments");
    return s.args[i];
  };
  if (s.op == "piece") {
    if (s.text.size() < 4) throw std::invalid_argument("piece step needs label, field, budget and lengths");
    const std::int64_t d = std::stoll(s.text[1]);
    std::vector<QuadExtScalar> lengths;
    for (std::size_t i = 3; i < s.text.size(); ++i) lengths.push_back(QuadExtScalar::parse(s.text[i], d));
    c.add_piece(IntervalExchange(std::move(lengths), s.args), s.text[0], std::stoull(s.text[2]));
  } else if (s.op == "subdivide") {
    c.subdivide(arg(0));
  } else if (s.op == "split_face") {
    std::optional<BigRational> share;
    if (!s.text.empty()) share = parse_rational(s.text[0]);
    c.split_face(arg(0), arg(1), arg(2) ? EdgeKind::Orbit : EdgeKind::Transverse, arg(3), share);
  } else if (s.op == "add_fake_saddle") {
    c.add_fake_saddle(arg(0));
  } else if (s.op == "remove_fake_saddle") {
    c.remove_fake_saddle(arg(0));
  } else if (s.op == "cut") {
    c.cut(arg(0));
  } else if (s.op == "glue") {
    c.glue(arg(0), arg(1));
  } else {
    throw std::invalid_argument("unknown surgery step '" + s.op + "'");
  }
}

FlowAssembly replay(const std::vector<SurgeryStep>& steps) {
  FlowAssembly c;
  for (const auto& s : steps) apply_step(c, s);
  return c;
}

}  // namespace sflow

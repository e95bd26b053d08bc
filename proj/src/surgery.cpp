#include "sflow/surgery.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

#include "sflow/suspension.hpp"

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

BigRational frac(long p, long q) {
  BigRational r(p, q);
  r.canonicalize();
  return r;
}

}  // namespace

SurfaceSignature canonical(SurfaceSignature s) {
  while (s.c >= 3) {
    s.c -= 2;
    s.h += 1;
  }
  return s;
}

bool admits_expansive(const SurfaceSignature& s) {
  const auto t = canonical(s);
  return t.h > 0 && t.h + t.b + t.c > 1;
}

std::string to_string(const SurfaceSignature& s) {
  return "S^{" + std::to_string(s.h) + "," + std::to_string(s.b) + "," + std::to_string(s.c) + "}";
}

int FlowAssembly::new_half_edge(const HalfEdge& h) {
  he_.push_back(h);
  return static_cast<int>(he_.size()) - 1;
}

void FlowAssembly::pair(int a, int b, bool flip) {
  he_[a].twin = b;
  he_[b].twin = a;
  he_[a].flip = he_[b].flip = flip;
}

int FlowAssembly::add_piece(const IntervalExchange& f, std::string label, std::uint64_t budget) {
  const SuspensionComplex sc = suspend(f);
  const int n = f.n();
  const auto& pi = f.permutation();
  const int face = static_cast<int>(faces_.size());
  const int piece = static_cast<int>(pieces_.size());

  // Counterclockwise: bottom edges Q_{j-1} -> Q_j, then top edges P_i -> P_{i-1}.
  std::vector<int> cls;
  for (int j = 1; j <= n; ++j) cls.push_back(sc.bottom_class(j - 1));
  for (int i = n; i >= 1; --i) cls.push_back(sc.top_class(i));
  std::map<int, int> corners_in_class;
  for (int c : cls) ++corners_in_class[c];

  const int first = static_cast<int>(he_.size());
  const int m = 2 * n;
  for (int k = 0; k < m; ++k) {
    HalfEdge h;
    h.face = face;
    h.next = first + (k + 1) % m;
    h.prev = first + (k + m - 1) % m;
    const auto& rec = sc.classes()[cls[k]];
    h.angle = frac(2 * rec.k, corners_in_class[cls[k]]);
    h.fake = rec.index() == 0;
    new_half_edge(h);
  }
  auto bottom = [&](int j) { return first + j - 1; };
  auto top = [&](int i) { return first + n + (n - i); };
  for (int i = 1; i <= n; ++i) pair(top(i), bottom(pi[i - 1]), false);

  faces_.push_back(first);
  face_piece_.push_back(piece);
  pieces_.push_back({label, f, detect_periodic(f, budget)});

  SurgeryStep s{"piece", pi, {label, std::to_string(f.field()), std::to_string(budget)}};
  for (const auto& l : f.lengths()) s.text.push_back(l.str());
  record(std::move(s));
  return piece;
}

namespace {

// Vertex end of a half-edge, normalised to the smaller id of its pair.
struct EndKey {
  int he;
  bool tail;
  auto operator<=>(const EndKey&) const = default;
};

EndKey end_key(const std::vector<HalfEdge>& he, int x, bool tail) {
  const int t = he[x].twin;
  if (t < 0 || x < t) return {x, tail};
  return {t, he[x].flip ? tail : !tail};
}

}  // namespace

AssemblyTopology FlowAssembly::topology() const {
  const int H = static_cast<int>(he_.size());
  AssemblyTopology t;
  UnionFind uf(H);
  for (int a = 0; a < H; ++a) {
    const int b = he_[a].twin;
    if (b < a) continue;
    if (he_[a].flip) {
      uf.unite(a, b);
      uf.unite(he_[a].next, he_[b].next);
    } else {
      uf.unite(a, he_[b].next);
      uf.unite(he_[a].next, b);
    }
  }
  t.vertex_of.assign(H, -1);
  std::map<int, int> root_id;
  for (int e = 0; e < H; ++e) {
    const int r = uf.find(e);
    auto [it, fresh] = root_id.emplace(r, static_cast<int>(t.vertices.size()));
    if (fresh) t.vertices.emplace_back();
    t.vertex_of[e] = it->second;
    t.vertices[it->second].corners.push_back(e);
  }

  // Components of faces.
  const int F = static_cast<int>(faces_.size());
  UnionFind fuf(F);
  for (int a = 0; a < H; ++a) {
    if (he_[a].twin >= 0) fuf.unite(he_[a].face, he_[he_[a].twin].face);
  }
  t.component_of_face.assign(F, -1);
  std::map<int, int> comp_id;
  for (int f = 0; f < F; ++f) {
    auto [it, fresh] = comp_id.emplace(fuf.find(f), static_cast<int>(t.components.size()));
    if (fresh) t.components.emplace_back();
    t.component_of_face[f] = it->second;
    t.components[it->second].faces.push_back(f);
  }

  for (auto& v : t.vertices) {
    v.component = t.component_of_face[he_[v.corners.front()].face];
    std::set<EndKey> ends;
    int in = 0, out = 0;
    for (int c : v.corners) {
      v.angle += he_[c].angle;
      v.fake = v.fake || he_[c].fake;
      const int p = he_[c].prev;
      if (he_[c].twin < 0 || he_[p].twin < 0) v.boundary = true;
      for (auto [x, tail] : {std::pair{c, true}, std::pair{p, false}}) {
        if (he_[x].kind != EdgeKind::Orbit) continue;
        if (!ends.insert(end_key(he_, x, tail)).second) continue;
        ((he_[x].dir > 0) == tail ? out : in) += 1;
      }
    }
    v.broken_flow = in >= 2 || out >= 2;
    const BigRational twice = v.boundary ? BigRational(1) - v.angle : BigRational(2) - v.angle;
    if (twice.get_den() != 1) throw std::logic_error("vertex angle is not a multiple of pi");
    v.twice_index = static_cast<int>(twice.get_num().get_si());
  }

  // Boundary cycles: every boundary vertex meets exactly two unpaired ends.
  std::map<int, std::vector<std::pair<int, bool>>> bends;
  for (int e = 0; e < H; ++e) {
    if (he_[e].twin >= 0) continue;
    bends[t.vertex_of[e]].push_back({e, true});
    bends[t.vertex_of[he_[e].next]].push_back({e, false});
  }
  for (const auto& [v, list] : bends) {
    if (list.size() != 2) throw std::logic_error("boundary vertex is pinched");
  }
  std::vector<char> seen(H, 0);
  for (int e0 = 0; e0 < H; ++e0) {
    if (he_[e0].twin >= 0 || seen[e0]) continue;
    std::vector<int> cyc;
    int e = e0;
    bool enter_tail = true;
    do {
      seen[e] = 1;
      cyc.push_back(e);
      const int w = t.vertex_of[enter_tail ? he_[e].next : e];
      const auto& l = bends[w];
      const std::pair<int, bool> here{e, !enter_tail};
      const auto nxt = l[0] == here ? l[1] : l[0];
      e = nxt.first;
      enter_tail = nxt.second;
    } while (e != e0);
    t.boundaries.push_back(std::move(cyc));
  }

  // Orientability by signed traversal.
  std::vector<int> sign(F, 0);
  std::vector<char> orientable(t.components.size(), 1);
  for (int f0 = 0; f0 < F; ++f0) {
    if (sign[f0] != 0) continue;
    sign[f0] = 1;
    std::queue<int> q;
    q.push(f0);
    while (!q.empty()) {
      const int f = q.front();
      q.pop();
      int e = faces_[f];
      do {
        const int tw = he_[e].twin;
        if (tw >= 0) {
          const int g = he_[tw].face;
          const int want = he_[e].flip ? -sign[f] : sign[f];
          if (sign[g] == 0) {
            sign[g] = want;
            q.push(g);
          } else if (sign[g] != want) {
            orientable[t.component_of_face[f]] = 0;
          }
        }
        e = he_[e].next;
      } while (e != faces_[f]);
    }
  }

  for (std::size_t ci = 0; ci < t.components.size(); ++ci) {
    auto& c = t.components[ci];
    std::set<int> pieces;
    for (int f : c.faces) pieces.insert(face_piece_[f]);
    c.pieces.assign(pieces.begin(), pieces.end());
    c.orientable = orientable[ci];
  }
  for (int e = 0; e < H; ++e) {
    auto& c = t.components[t.component_of_face[he_[e].face]];
    if (he_[e].twin < 0 || e < he_[e].twin) c.edges += 1;
  }
  for (const auto& v : t.vertices) t.components[v.component].vertices += 1;
  for (const auto& b : t.boundaries) t.components[t.component_of_face[he_[b.front()].face]].boundaries += 1;

  std::vector<int> index_sum(t.components.size(), 0);
  for (const auto& v : t.vertices) index_sum[v.component] += v.twice_index;
  for (std::size_t ci = 0; ci < t.components.size(); ++ci) {
    auto& c = t.components[ci];
    c.euler_characteristic = c.vertices - c.edges + static_cast<int>(c.faces.size());
    if (index_sum[ci] != 2 * c.euler_characteristic) {
      throw std::logic_error("index sum disagrees with the Euler characteristic");
    }
    const int rest = 2 - c.euler_characteristic - c.boundaries;
    if (c.orientable) {
      c.signature = {rest / 2, c.boundaries, 0};
    } else {
      const int cc = rest % 2 == 1 ? 1 : 2;
      c.signature = {(rest - cc) / 2, c.boundaries, cc};
    }
  }
  return t;
}

int FlowAssembly::source_vertex(const AssemblyTopology& t, int e) const {
  return t.vertex_of[he_[e].dir > 0 ? e : he_[e].next];
}

int FlowAssembly::sink_vertex(const AssemblyTopology& t, int e) const {
  return t.vertex_of[he_[e].dir > 0 ? he_[e].next : e];
}

Arc FlowAssembly::arc_through(const AssemblyTopology& t, int e) const {
  if (he_[e].kind != EdgeKind::Orbit) throw InvalidSite("half-edge " + std::to_string(e) + " is not an orbit edge");
  auto rep = [&](int x) { return he_[x].twin >= 0 ? std::min(x, he_[x].twin) : x; };
  // The orbit edge leaving (or entering) regular vertex v other than `from`.
  auto continuation = [&](int v, int from, bool want_out) {
    std::set<EndKey> ends;
    for (int c : t.vertices[v].corners) {
      const int p = he_[c].prev;
      for (auto [x, tail] : {std::pair{c, true}, std::pair{p, false}}) {
        if (he_[x].kind != EdgeKind::Orbit) continue;
        if (!ends.insert(end_key(he_, x, tail)).second) continue;
        if (((he_[x].dir > 0) == tail) == want_out && rep(x) != from) return rep(x);
      }
    }
    return -1;
  };
  Arc a;
  const int r0 = rep(e);
  a.boundary = he_[r0].twin < 0;
  std::vector<int> fwd{r0}, back;
  int cur = r0;
  for (;;) {
    const int w = sink_vertex(t, cur);
    if (t.vertices[w].singular()) break;
    const int nx = continuation(w, cur, true);
    if (nx < 0) break;
    if (nx == r0) throw InvalidSite("orbit through half-edge " + std::to_string(e) + " is closed and regular");
    fwd.push_back(cur = nx);
  }
  cur = r0;
  for (;;) {
    const int w = source_vertex(t, cur);
    if (t.vertices[w].singular()) break;
    const int pv = continuation(w, cur, false);
    if (pv < 0) break;
    back.push_back(cur = pv);
  }
  a.edges.assign(back.rbegin(), back.rend());
  a.edges.insert(a.edges.end(), fwd.begin(), fwd.end());
  a.source = source_vertex(t, a.edges.front());
  a.sink = sink_vertex(t, a.edges.back());
  return a;
}

int FlowAssembly::subdivide(int e) {
  if (e < 0 || e >= static_cast<int>(he_.size())) throw InvalidSite("no half-edge " + std::to_string(e));
  record({"subdivide", {e}, {}});
  auto split = [&](int x) {
    HalfEdge h = he_[x];
    h.angle = 1;
    h.fake = false;
    h.twin = -1;
    h.prev = x;
    const int y = new_half_edge(h);
    he_[he_[x].next].prev = y;
    he_[x].next = y;
    return y;
  };
  const int t = he_[e].twin;
  const int e2 = split(e);
  if (t >= 0) {
    const int t2 = split(t);
    if (he_[e].flip) {
      pair(e, t, true);
      pair(e2, t2, true);
    } else {
      pair(e, t2, false);
      pair(e2, t, false);
    }
  }
  return e2;
}

int FlowAssembly::split_face(int x, int y, EdgeKind kind, int dir, std::optional<BigRational> x_share) {
  const int H = static_cast<int>(he_.size());
  if (x < 0 || y < 0 || x >= H || y >= H) throw InvalidSite("no such half-edge");
  if (he_[x].face != he_[y].face || x == y || he_[x].next == y || he_[y].next == x) {
    throw InvalidSite("split_face needs two non-adjacent corners of one face");
  }
  // Face A: x .. prev(y) closed by d (tail(y) -> tail(x)); face B: y .. prev(x) closed by d2.
  int kA = 1;
  BigRational rest = 0;
  for (int e = he_[x].next; e != y; e = he_[e].next) {
    rest += he_[e].angle;
    ++kA;
  }
  ++kA;
  const BigRational alpha = he_[x].angle, beta = he_[y].angle;
  const BigRational target = BigRational(kA - 2) - rest;
  BigRational ax = x_share ? *x_share : BigRational(target * alpha / (alpha + beta));
  BigRational by = target - ax;
  ax.canonicalize();
  by.canonicalize();
  if (sgn(ax) <= 0 || ax >= alpha || sgn(by) <= 0 || by >= beta) {
    throw InvalidSite("the new edge does not fit the corner angles");
  }
  {
    SurgeryStep s{"split_face", {x, y, kind == EdgeKind::Orbit ? 1 : 0, dir}, {}};
    if (x_share) s.text.push_back(sflow::to_string(*x_share));
    record(std::move(s));
  }

  const int px = he_[x].prev, py = he_[y].prev;
  HalfEdge d;
  d.face = he_[x].face;
  d.kind = kind;
  d.dir = kind == EdgeKind::Orbit ? -dir : 0;
  d.angle = by;
  d.fake = he_[y].fake;
  d.next = x;
  d.prev = py;
  HalfEdge d2;
  d2.kind = kind;
  d2.dir = kind == EdgeKind::Orbit ? dir : 0;
  d2.angle = alpha - ax;
  d2.fake = he_[x].fake;
  d2.next = y;
  d2.prev = px;
  const int id = new_half_edge(d);
  const int id2 = new_half_edge(d2);
  he_[py].next = id;
  he_[x].prev = id;
  he_[px].next = id2;
  he_[y].prev = id2;
  he_[x].angle = ax;
  he_[y].angle = beta - by;
  pair(id, id2, false);

  const int fB = static_cast<int>(faces_.size());
  faces_[he_[x].face] = x;
  faces_.push_back(y);
  face_piece_.push_back(face_piece_[he_[x].face]);
  int e = y;
  do {
    he_[e].face = fB;
    e = he_[e].next;
  } while (e != y);
  return id2;
}

int FlowAssembly::mark_segment(int from, int to) {
  const int H = static_cast<int>(he_.size());
  if (from < 0 || to < 0 || from >= H || to >= H || from == to || he_[from].face != he_[to].face) {
    throw InvalidSite("mark_segment needs two different sides of one face");
  }
  const int a = subdivide(from);
  const int b = subdivide(to);
  return split_face(a, b, EdgeKind::Orbit, 1);
}

std::string FlowAssembly::canonical_form() const {
  const int H = static_cast<int>(he_.size());
  const int F = static_cast<int>(faces_.size());
  UnionFind fuf(F);
  for (int a = 0; a < H; ++a) {
    if (he_[a].twin >= 0) fuf.unite(he_[a].face, he_[he_[a].twin].face);
  }
  std::map<int, std::vector<int>> comp_edges;
  for (int e = 0; e < H; ++e) comp_edges[fuf.find(he_[e].face)].push_back(e);

  auto encode_from = [&](int s) {
    std::map<int, int> label;
    std::vector<int> order;
    std::queue<int> q;
    label[s] = 0;
    order.push_back(s);
    q.push(s);
    while (!q.empty()) {
      const int h = q.front();
      q.pop();
      for (int nb : {he_[h].next, he_[h].prev, he_[h].twin}) {
        if (nb < 0 || label.count(nb)) continue;
        label[nb] = static_cast<int>(order.size());
        order.push_back(nb);
        q.push(nb);
      }
    }
    std::ostringstream os;
    for (int h : order) {
      const auto& x = he_[h];
      os << label[x.next] << ',' << (x.twin >= 0 ? label[x.twin] : -1) << ',' << x.flip << ','
         << (x.kind == EdgeKind::Orbit) << ',' << x.dir << ',' << x.angle.get_str() << ',' << x.fake << ','
         << pieces_[face_piece_[x.face]].label << ';';
    }
    return os.str();
  };

  std::vector<std::string> parts;
  for (const auto& [root, edges] : comp_edges) {
    std::string best;
    for (int s : edges) {
      auto code = encode_from(s);
      if (best.empty() || code < best) best = std::move(code);
    }
    parts.push_back(std::move(best));
  }
  std::sort(parts.begin(), parts.end());
  std::string out;
  for (const auto& p : parts) out += p + "|";
  return out;
}

}  // namespace sflow

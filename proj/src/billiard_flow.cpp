#include <algorithm>
#include <cfenv>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "sflow/billiard.hpp"

namespace sflow {

const char* to_string(TraceEnd e) {
  switch (e) {
    case TraceEnd::Budget: return "Budget";
    case TraceEnd::Corner: return "Corner";
    case TraceEnd::Periodic: return "Periodic";
    case TraceEnd::PrecisionExhausted: return "PrecisionExhausted";
  }
  return "Budget";
}

namespace {

Vec2 side_vector(const RationalPolygon& p, int k) {
  const int n = p.size();
  return p.vertices[(k + 1) % n] - p.vertices[k];
}

struct Hit {
  int side = -1;
  QuadExtScalar t, s;
};

// First side hit by the ray p + t u (t > 0), skipping side `from`.
std::optional<Hit> next_hit(const RationalPolygon& poly, const Vec2& p, const Vec2& u, int from) {
  std::optional<Hit> best;
  for (int j = 0; j < poly.size(); ++j) {
    if (j == from) continue;
    const Vec2 e = side_vector(poly, j);
    const QuadExtScalar den = cross(u, e);
    if (den.is_zero()) continue;
    const Vec2 w = poly.vertices[j] - p;
    QuadExtScalar t = cross(w, e) / den;
    if (t.sign() <= 0) continue;
    QuadExtScalar s = cross(w, u) / den;
    if (s.sign() < 0 || s > QuadExtScalar::integer(1, s.d())) continue;
    if (!best || t < best->t) best = Hit{j, std::move(t), std::move(s)};
  }
  return best;
}

std::string state_key(int side, int g, const Vec2& q) {
  return std::to_string(side) + "|" + std::to_string(g) + "|" + q.x.str() + "|" + q.y.str();
}

}  // namespace

Trajectory trace(const DirectionalFlow& flow, const Vec2& start, int g, std::uint64_t budget) {
  const auto& poly = flow.polygon();
  const auto& cx = flow.complex();
  const int n = poly.size();
  for (const auto& v : poly.vertices) {
    if (v == start) throw CornerStart("trajectory starts at a corner");
  }
  int cur = -1;
  for (int j = 0; j < n; ++j) {
    const Vec2 e = side_vector(poly, j);
    if (cross(e, start - poly.vertices[j]).is_zero()) {
      const QuadExtScalar s = dot(start - poly.vertices[j], e) / dot(e, e);
      if (s.sign() > 0 && s < QuadExtScalar::integer(1, s.d())) cur = j;
    }
  }
  Trajectory tr;
  tr.start = start;
  tr.g_start = g;
  std::unordered_map<std::string, std::uint64_t> seen;
  if (cur >= 0) seen[state_key(cur, g, start)] = 0;
  Vec2 p = start;
  while (tr.bounces.size() < budget) {
    const Vec2 u = flow.table_direction(g);
    auto hit = next_hit(poly, p, u, cur);
    if (!hit) throw std::logic_error("ray leaves the polygon");
    const int j = hit->side;
    if (hit->s.is_zero() || hit->s == QuadExtScalar::integer(1, hit->s.d())) {
      tr.end = TraceEnd::Corner;
      tr.corner = hit->s.is_zero() ? j : (j + 1) % n;
      tr.corner_singular = poly.angles[tr.corner].m > 1;
      return tr;
    }
    p = p + hit->t * u;
    g = cx.mult[cx.generator[j]][g];
    cur = j;
    tr.bounces.push_back({j, p, g});
    const std::uint64_t idx = tr.bounces.size();
    auto [it, inserted] = seen.emplace(state_key(j, g, p), idx);
    if (!inserted) {
      tr.end = TraceEnd::Periodic;
      tr.period = idx - it->second;
      tr.cycle_start = it->second;
      return tr;
    }
  }
  tr.end = TraceEnd::Budget;
  return tr;
}

namespace {

// Closed interval with outward rounding.
struct Iv {
  double lo, hi;
  static Iv point(double v) { return {v, v}; }
  bool contains_zero() const { return lo <= 0.0 && hi >= 0.0; }
  bool positive() const { return lo > 0.0; }
  bool negative() const { return hi < 0.0; }
};

double down(double v) { return std::nextafter(v, -INFINITY); }
double up(double v) { return std::nextafter(v, INFINITY); }

Iv operator+(Iv a, Iv b) { return {down(a.lo + b.lo), up(a.hi + b.hi)}; }
Iv operator-(Iv a, Iv b) { return {down(a.lo - b.hi), up(a.hi - b.lo)}; }
Iv operator*(Iv a, Iv b) {
  const double c[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
  return {down(*std::min_element(c, c + 4)), up(*std::max_element(c, c + 4))};
}
Iv operator/(Iv a, Iv b) {
  if (b.contains_zero()) return {-INFINITY, INFINITY};
  const double c[4] = {a.lo / b.lo, a.lo / b.hi, a.hi / b.lo, a.hi / b.hi};
  return {down(*std::min_element(c, c + 4)), up(*std::max_element(c, c + 4))};
}

struct IVec {
  Iv x, y;
};
IVec operator-(const IVec& p, const IVec& q) { return {p.x - q.x, p.y - q.y}; }
Iv icross(const IVec& p, const IVec& q) { return p.x * q.y - p.y * q.x; }

}  // namespace

ApproxTrajectory trace_approx(const RationalPolygon& poly, std::array<double, 2> start, std::array<double, 2> v,
                              std::uint64_t budget) {
  const int n = poly.size();
  std::vector<IVec> verts;
  if (!poly.approx_vertices.empty()) {
    for (const auto& a : poly.approx_vertices) verts.push_back({Iv::point(a[0]), Iv::point(a[1])});
  } else {
    // Exact coordinates rounded outward by one ulp either side.
    for (const auto& a : poly.vertices) {
      const double x = a.x.approx(), y = a.y.approx();
      verts.push_back({{down(down(x)), up(up(x))}, {down(down(y)), up(up(y))}});
    }
  }
  if (static_cast<int>(verts.size()) != n) throw std::invalid_argument("polygon needs vertex coordinates");
  ApproxTrajectory out;
  IVec p{Iv::point(start[0]), Iv::point(start[1])};
  IVec u{Iv::point(v[0]), Iv::point(v[1])};
  int cur = -1;
  const Iv one = Iv::point(1.0);
  while (out.bounces < budget) {
    int best = -1;
    Iv best_t{0, 0};
    for (int j = 0; j < n; ++j) {
      if (j == cur) continue;
      const IVec e = verts[(j + 1) % n] - verts[j];
      const Iv den = icross(u, e);
      if (den.contains_zero()) {
        out.end = TraceEnd::PrecisionExhausted;
        return out;
      }
      const IVec w = verts[j] - p;
      const Iv t = icross(w, e) / den;
      const Iv s = icross(w, u) / den;
      if (t.negative() || s.negative() || (s - one).positive()) continue;
      if (!t.positive() || !s.positive() || !(s - one).negative()) {
        out.end = TraceEnd::PrecisionExhausted;
        return out;
      }
      if (best < 0 || t.hi < best_t.lo) {
        best = j;
        best_t = t;
      } else if (!(best_t.hi < t.lo)) {
        out.end = TraceEnd::PrecisionExhausted;
        return out;
      }
    }
    if (best < 0) {
      out.end = TraceEnd::PrecisionExhausted;
      return out;
    }
    p = {p.x + best_t * u.x, p.y + best_t * u.y};
    const IVec e = verts[(best + 1) % n] - verts[best];
    const Iv n2 = e.x * e.x + e.y * e.y;
    const Iv two = Iv::point(2.0);
    const Iv a = (e.x * e.x - e.y * e.y) / n2, b = two * e.x * e.y / n2;
    u = {a * u.x + b * u.y, b * u.x - a * u.y};
    cur = best;
    out.sides.push_back(best);
    ++out.bounces;
  }
  out.end = TraceEnd::Budget;
  return out;
}

namespace {

struct Beam {
  Vec2 a, b;             // endpoints on the current side
  QuadExtScalar src_a, src_b;  // source flux coordinates
  int side;
  int g;
  std::uint64_t flights;
};

struct ReturnPiece {
  int src_piece;
  QuadExtScalar src_lo, src_hi;
  int dst_piece;
  QuadExtScalar dst_lo, dst_hi;
};

// Parameter of point x along side k (0 at V_k, 1 at V_k+1).
QuadExtScalar side_param(const RationalPolygon& poly, int k, const Vec2& x) {
  const Vec2 e = side_vector(poly, k);
  return dot(x - poly.vertices[k], e) / dot(e, e);
}

}  // namespace

FirstReturn first_return_iem(const DirectionalFlow& flow, std::vector<int> section_sides, std::uint64_t budget) {
  const auto& poly = flow.polygon();
  const auto& cx = flow.complex();
  const int n = poly.size();
  const int G = cx.order();
  const std::int64_t d = poly.field_d;
  if (!flow.convex()) throw std::invalid_argument("first-return construction supports convex polygons only");
  if (section_sides.empty()) {
    int best = 0;
    for (int k = 1; k < n; ++k) {
      const Vec2 e = side_vector(poly, k), eb = side_vector(poly, best);
      if (dot(e, e) > dot(eb, eb)) best = k;
    }
    section_sides = {best};
  }
  std::sort(section_sides.begin(), section_sides.end());
  section_sides.erase(std::unique(section_sides.begin(), section_sides.end()), section_sides.end());
  std::vector<char> in_section(n, 0);
  for (int k : section_sides) {
    if (k < 0 || k >= n) throw std::invalid_argument("section side out of range");
    in_section[k] = 1;
  }

  FirstReturn fr{IntervalExchange({QuadExtScalar::integer(1, d)}, {1}), {}, section_sides, QuadExtScalar(d)};
  // piece_of[k][g] = index into fr.pieces or -1.
  std::vector<std::vector<int>> piece_of(n, std::vector<int>(G, -1));
  std::vector<QuadExtScalar> flux_width;
  QuadExtScalar total(d);
  for (int k : section_sides) {
    const Vec2 e = side_vector(poly, k);
    for (int g = 0; g < G; ++g) {
      const QuadExtScalar c = cross(e, flow.table_direction(g));
      if (c.is_zero()) throw NotTransverse("direction is parallel to section side " + std::to_string(k));
      if (c.sign() < 0) continue;
      piece_of[k][g] = static_cast<int>(fr.pieces.size());
      fr.pieces.push_back({k, g, !cx.group[g].reflection, total, c});
      flux_width.push_back(c);
      total += c;
    }
  }
  fr.total_flux = total;

  auto flux_coord = [&](int piece, const Vec2& x) {
    const auto& pc = fr.pieces[piece];
    const QuadExtScalar s = side_param(poly, pc.side, x);
    return pc.from_start_vertex ? flux_width[piece] * s : flux_width[piece] * (QuadExtScalar::integer(1, d) - s);
  };

  std::vector<ReturnPiece> returns;
  std::vector<Beam> work;
  for (int i = 0; i < static_cast<int>(fr.pieces.size()); ++i) {
    const auto& pc = fr.pieces[i];
    const Vec2 a = poly.vertices[pc.side], b = poly.vertices[(pc.side + 1) % n];
    work.push_back({a, b, flux_coord(i, a), flux_coord(i, b), pc.side, pc.g, 0});
    while (!work.empty()) {
      Beam beam = std::move(work.back());
      work.pop_back();
      if (beam.flights > budget) {
        throw SectionMissesOrbits("a beam from the section did not return within " + std::to_string(budget) + " flights");
      }
      const Vec2 u = flow.table_direction(beam.g);
      const int j = beam.side;
      const Vec2 ej = side_vector(poly, j);
      const QuadExtScalar sa = side_param(poly, j, beam.a), sb = side_param(poly, j, beam.b);
      // Split where backward rays from vertices meet the beam.
      std::vector<QuadExtScalar> cuts;
      for (int k = 0; k < n; ++k) {
        if (k == j || k == (j + 1) % n) continue;
        const QuadExtScalar den = cross(u, ej);
        const QuadExtScalar t = cross(poly.vertices[k] - poly.vertices[j], ej) / den;
        if (t.sign() <= 0) continue;
        const Vec2 x = poly.vertices[k] - t * u;
        const QuadExtScalar s = side_param(poly, j, x);
        if ((s > std::min(sa, sb)) && (s < std::max(sa, sb))) cuts.push_back(s);
      }
      cuts.push_back(sa);
      cuts.push_back(sb);
      std::sort(cuts.begin(), cuts.end());
      cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
      if (sb < sa) std::reverse(cuts.begin(), cuts.end());
      auto point_at = [&](const QuadExtScalar& s) { return poly.vertices[j] + s * ej; };
      auto src_at = [&](const QuadExtScalar& s) { return beam.src_a + (s - sa) / (sb - sa) * (beam.src_b - beam.src_a); };
      for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        const Vec2 xa = point_at(cuts[c]), xb = point_at(cuts[c + 1]);
        const QuadExtScalar half = QuadExtScalar(BigRational(1, 2), 0, d);
        const Vec2 mid = half * (xa + xb);
        auto hit = next_hit(poly, mid, u, j);
        if (!hit) throw std::logic_error("beam leaves the polygon");
        const int k = hit->side;
        const Vec2 ek = side_vector(poly, k);
        const QuadExtScalar den = cross(u, ek);
        auto land = [&](const Vec2& x) { return x + (cross(poly.vertices[k] - x, ek) / den) * u; };
        const Vec2 ya = land(xa), yb = land(xb);
        const int g2 = cx.mult[cx.generator[k]][beam.g];
        const QuadExtScalar s_a = src_at(cuts[c]), s_b = src_at(cuts[c + 1]);
        if (in_section[k]) {
          const int dst = piece_of[k][g2];
          if (dst < 0) throw std::logic_error("return lands on a non-section sheet");
          QuadExtScalar da = flux_coord(dst, ya), db = flux_coord(dst, yb);
          if ((s_b - s_a).sign() != (db - da).sign()) throw std::logic_error("first-return map reverses orientation");
          if (s_a < s_b) {
            returns.push_back({i, s_a, s_b, dst, da, db});
          } else {
            returns.push_back({i, s_b, s_a, dst, db, da});
          }
        } else {
          work.push_back({ya, yb, s_a, s_b, k, g2, beam.flights + 1});
        }
      }
    }
  }

  // Lay the returns out along the section.
  struct Seg {
    QuadExtScalar lo, hi, dlo;
  };
  std::vector<Seg> segs;
  for (const auto& r : returns) {
    segs.push_back({fr.pieces[r.src_piece].offset + r.src_lo, fr.pieces[r.src_piece].offset + r.src_hi,
                    fr.pieces[r.dst_piece].offset + r.dst_lo});
  }
  std::sort(segs.begin(), segs.end(), [](const Seg& x, const Seg& y) { return x.lo < y.lo; });
  std::vector<int> order(segs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) { return segs[x].dlo < segs[y].dlo; });
  std::vector<int> perm(segs.size());
  for (std::size_t r = 0; r < order.size(); ++r) perm[order[r]] = static_cast<int>(r) + 1;
  std::vector<QuadExtScalar> lengths;
  QuadExtScalar acc(d);
  for (const auto& s : segs) {
    if (s.lo != acc) throw std::logic_error("first-return domain pieces do not tile the section");
    lengths.push_back((s.hi - s.lo) / total);
    acc = s.hi;
  }
  for (auto& pc : fr.pieces) {
    pc.offset /= total;
    pc.width /= total;
  }
  fr.iem = merge_adjacent(IntervalExchange(std::move(lengths), std::move(perm)));
  return fr;
}

std::optional<QuadExtScalar> section_coordinate(const DirectionalFlow& flow, const FirstReturn& fr, int side,
                                                const Vec2& point, int g) {
  const auto& poly = flow.polygon();
  for (const auto& pc : fr.pieces) {
    if (pc.side != side || pc.g != g) continue;
    const QuadExtScalar s = side_param(poly, side, point);
    const QuadExtScalar f = pc.from_start_vertex ? s : QuadExtScalar::integer(1, s.d()) - s;
    return pc.offset + f * pc.width;
  }
  return std::nullopt;
}

std::pair<SectionPiece, Vec2> section_point(const DirectionalFlow& flow, const FirstReturn& fr,
                                            const QuadExtScalar& x) {
  const auto& poly = flow.polygon();
  for (const auto& pc : fr.pieces) {
    if (x < pc.offset || !(x < pc.offset + pc.width)) continue;
    QuadExtScalar f = (x - pc.offset) / pc.width;
    if (!pc.from_start_vertex) f = QuadExtScalar::integer(1, f.d()) - f;
    return {pc, poly.vertices[pc.side] + f * side_vector(poly, pc.side)};
  }
  throw std::out_of_range("section coordinate outside [0, 1)");
}

BilliardVerdict is_expansive_billiard(const RationalPolygon& p, const Vec2& v, std::uint64_t budget) {
  BilliardVerdict out;
  if (is_torus_polygon(p)) {
    out.certificate = Certificate::no("torus");
    out.reason = "torus";
    return out;
  }
  DirectionalFlow flow(p, v);
  const int n = p.size();
  FirstReturn fr = [&] {
    try {
      return first_return_iem(flow, {}, budget);
    } catch (const SectionMissesOrbits&) {
      std::vector<int> all(n);
      std::iota(all.begin(), all.end(), 0);
      return first_return_iem(flow, all, budget);
    }
  }();
  out.section_sides = fr.section_sides;
  out.iem_side = is_expansive_iem(fr.iem, budget);

  // Direct search: trace from every side midpoint on every sheet entering there.
  const auto& cx = flow.complex();
  std::vector<std::pair<int, int>> starts;
  for (int k = 0; k < n; ++k) {
    for (int g = 0; g < cx.order(); ++g) {
      if (cross(side_vector(p, k), flow.table_direction(g)).sign() > 0) starts.emplace_back(k, g);
    }
  }
  const std::uint64_t per_start = std::max<std::uint64_t>(64, budget / std::max<std::size_t>(1, starts.size()));
  const QuadExtScalar half(BigRational(1, 2), 0, p.field_d);
  for (auto [k, g] : starts) {
    const Vec2 mid = half * (p.vertices[k] + p.vertices[(k + 1) % n]);
    Trajectory tr = trace(flow, mid, g, per_start);
    if (tr.end == TraceEnd::Periodic) {
      out.periodic_trajectory = std::move(tr);
      break;
    }
  }

  if (out.iem_side->verdict == Verdict::No) {
    out.certificate = *out.iem_side;
    out.reason = "first-return map: " + out.iem_side->reason;
  } else if (out.periodic_trajectory) {
    out.certificate = Certificate::no("periodic billiard trajectory");
    out.certificate.depth = out.periodic_trajectory->bounces.size();
    out.reason = "periodic billiard trajectory";
  } else {
    out.certificate = *out.iem_side;
    out.reason = "first-return map: " + out.iem_side->reason;
  }
  return out;
}

}  // namespace sflow

#include "sflow/billiard.hpp"

#include <map>
#include <numeric>
#include <queue>

namespace sflow {

Vec2 operator+(const Vec2& p, const Vec2& q) { return {p.x + q.x, p.y + q.y}; }
Vec2 operator-(const Vec2& p, const Vec2& q) { return {p.x - q.x, p.y - q.y}; }
Vec2 operator*(const QuadExtScalar& s, const Vec2& p) { return {s * p.x, s * p.y}; }
QuadExtScalar cross(const Vec2& p, const Vec2& q) { return p.x * q.y - p.y * q.x; }
QuadExtScalar dot(const Vec2& p, const Vec2& q) { return p.x * q.x + p.y * q.y; }

Mat2 reflection_along(const Vec2& e) {
  const QuadExtScalar n2 = dot(e, e);
  const QuadExtScalar xx = e.x * e.x, yy = e.y * e.y, xy = e.x * e.y;
  const QuadExtScalar two = QuadExtScalar::integer(2, n2.d());
  return {(xx - yy) / n2, two * xy / n2, two * xy / n2, (yy - xx) / n2};
}

RationalPolygon unit_square() {
  RationalPolygon p;
  p.angles.assign(4, {1, 2});
  auto I = [](long v) { return QuadExtScalar::integer(v, 2); };
  p.vertices = {{I(0), I(0)}, {I(1), I(0)}, {I(1), I(1)}, {I(0), I(1)}};
  p.field_d = 2;
  return p;
}

RationalPolygon genus2_triangle() {
  RationalPolygon p;
  p.angles = {{1, 2}, {1, 8}, {3, 8}};
  auto I = [](long v) { return QuadExtScalar::integer(v, 2); };
  // tan(pi/8) = sqrt2 - 1
  p.vertices = {{I(0), I(0)}, {I(1), I(0)}, {I(0), QuadExtScalar(BigRational(-1), BigRational(1), 2)}};
  p.field_d = 2;
  return p;
}

namespace {

int mod(int a, int m) { return ((a % m) + m) % m; }

DihedralElem compose(const DihedralElem& x, const DihedralElem& y, int N) {
  const int M = 2 * N;
  if (!x.reflection && !y.reflection) return {false, mod(x.a + y.a, M)};
  if (!x.reflection && y.reflection) return {true, mod(x.a + y.a, M)};
  if (x.reflection && !y.reflection) return {true, mod(x.a - y.a, M)};
  return {false, mod(x.a - y.a, M)};
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int x, int y) { parent[find(x)] = find(y); }
};

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) { return cross(q - p, r - p).sign(); };
  auto on_segment = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    return std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) && std::min(p.y, q.y) <= r.y &&
           r.y <= std::max(p.y, q.y);
  };
  const int o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
  if (o1 * o2 < 0 && o3 * o4 < 0) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

void validate_angles(const RationalPolygon& p) {
  const int n = p.size();
  if (n < 3) throw NotRational("a polygon needs at least three vertices");
  BigRational total = 0;
  for (const auto& a : p.angles) {
    if (a.m <= 0 || a.n <= 0 || std::gcd(a.m, a.n) != 1) {
      throw NotRational("angle fraction " + std::to_string(a.m) + "/" + std::to_string(a.n) + " is not reduced");
    }
    if (a.m >= 2 * a.n || a.m == a.n) {
      throw NotRational("angle " + std::to_string(a.m) + "pi/" + std::to_string(a.n) + " is out of range");
    }
    total += BigRational(a.m, a.n);
  }
  if (total != n - 2) throw NotRational("angles sum to " + total.get_str() + " pi, expected " + std::to_string(n - 2) + " pi");
}

void validate_vertices(const RationalPolygon& p) {
  const int n = p.size();
  if (static_cast<int>(p.vertices.size()) != n) throw NonSimplePolygon("vertex count does not match angle count");
  for (const auto& v : p.vertices) {
    if (v.x.d() != p.field_d || v.y.d() != p.field_d) throw MismatchedField("vertex outside the polygon's field");
  }
  QuadExtScalar area2(p.field_d);
  for (int k = 0; k < n; ++k) area2 += cross(p.vertices[k], p.vertices[(k + 1) % n]);
  if (area2.sign() <= 0) throw NonSimplePolygon("vertices are not in counterclockwise order");
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_intersect(p.vertices[i], p.vertices[(i + 1) % n], p.vertices[j], p.vertices[(j + 1) % n])) {
        throw NonSimplePolygon("sides " + std::to_string(i) + " and " + std::to_string(j) + " intersect");
      }
    }
  }
}

}  // namespace

std::vector<ConeClass> UnfoldingComplex::cone_points() const {
  std::vector<ConeClass> out;
  for (const auto& c : classes) {
    if (c.multiplicity > 1) out.push_back(c);
  }
  return out;
}

UnfoldingComplex unfold(const RationalPolygon& p) {
  validate_angles(p);
  if (p.has_exact_vertices()) validate_vertices(p);
  const int n = p.size();
  UnfoldingComplex cx;
  cx.N = 1;
  for (const auto& a : p.angles) cx.N = std::lcm(cx.N, a.n);
  const int N = cx.N;

  // Direction of side k in units of pi/N, relative to side 0.
  std::vector<int> side_angle(n, 0);
  for (int k = 1; k < n; ++k) {
    const auto& a = p.angles[k];
    side_angle[k] = mod(side_angle[k - 1] + N - N / a.n * a.m, 2 * N);
  }
  std::vector<DihedralElem> gens;
  for (int k = 0; k < n; ++k) gens.push_back({true, mod(2 * side_angle[k], 2 * N)});

  // Closure under left multiplication by the generators.
  std::map<std::pair<bool, int>, int> index;
  auto key = [](const DihedralElem& e) { return std::make_pair(e.reflection, e.a); };
  cx.group.push_back({false, 0});
  index[key(cx.group[0])] = 0;
  std::queue<int> todo;
  todo.push(0);
  while (!todo.empty()) {
    const int g = todo.front();
    todo.pop();
    for (const auto& s : gens) {
      DihedralElem h = compose(s, cx.group[g], N);
      if (!index.count(key(h))) {
        index[key(h)] = static_cast<int>(cx.group.size());
        cx.group.push_back(h);
        todo.push(index[key(h)]);
      }
    }
  }
  const int G = cx.order();
  for (const auto& s : gens) cx.generator.push_back(index.at(key(s)));
  cx.mult.assign(G, std::vector<int>(G));
  for (int x = 0; x < G; ++x) {
    for (int y = 0; y < G; ++y) cx.mult[x][y] = index.at(key(compose(cx.group[x], cx.group[y], N)));
  }

  // Corner (k, g) meets sides k-1 and k.
  UnionFind uf(n * G);
  for (int k = 0; k < n; ++k) {
    const int prev = cx.generator[(k + n - 1) % n], cur = cx.generator[k];
    for (int g = 0; g < G; ++g) {
      uf.unite(k * G + g, k * G + cx.mult[prev][g]);
      uf.unite(k * G + g, k * G + cx.mult[cur][g]);
    }
  }
  std::map<int, int> root_to_class;
  cx.corner_class.assign(n, std::vector<int>(G));
  for (int k = 0; k < n; ++k) {
    for (int g = 0; g < G; ++g) {
      const int r = uf.find(k * G + g);
      if (!root_to_class.count(r)) {
        root_to_class[r] = static_cast<int>(cx.classes.size());
        cx.classes.push_back({k, 0, {}});
      }
      const int c = root_to_class[r];
      cx.corner_class[k][g] = c;
      cx.classes[c].faces.push_back(g);
    }
  }
  for (auto& c : cx.classes) {
    // Cone angle = corners * m pi / n = 2 pi * multiplicity.
    const auto& a = p.angles[c.corner];
    const int num = static_cast<int>(c.faces.size()) * a.m;
    if (num % (2 * a.n) != 0) throw std::logic_error("vertex class with fractional cone angle");
    c.multiplicity = num / (2 * a.n);
  }
  cx.V = static_cast<int>(cx.classes.size());
  cx.E = n * G / 2;
  cx.F = G;
  cx.chi_corner_formula = 0;
  for (const auto& a : p.angles) cx.chi_corner_formula += (N / a.n) * (1 - a.m);
  return cx;
}

bool is_torus_polygon(const RationalPolygon& p) {
  validate_angles(p);
  for (const auto& a : p.angles) {
    if (a.m != 1) return false;
  }
  return true;
}

DirectionalFlow::DirectionalFlow(RationalPolygon p, Vec2 v) : poly_(std::move(p)), v_(std::move(v)) {
  if (!poly_.has_exact_vertices()) throw std::invalid_argument("exact tracing needs exact vertex coordinates");
  cx_ = unfold(poly_);
  if (v_.x.d() != poly_.field_d || v_.y.d() != poly_.field_d) throw MismatchedField("direction outside the polygon's field");
  if (v_.x.is_zero() && v_.y.is_zero()) throw std::invalid_argument("zero direction");
  const int n = poly_.size();
  for (int k = 0; k < n; ++k) {
    side_refl_.push_back(reflection_along(poly_.vertices[(k + 1) % n] - poly_.vertices[k]));
    const Vec2 e0 = poly_.vertices[k] - poly_.vertices[(k + n - 1) % n];
    const Vec2 e1 = poly_.vertices[(k + 1) % n] - poly_.vertices[k];
    if (cross(e0, e1).sign() <= 0) convex_ = false;
  }
  const int G = cx_.order();
  const auto zero = QuadExtScalar(poly_.field_d), one = QuadExtScalar::integer(1, poly_.field_d);
  mats_.assign(G, Mat2{zero, zero, zero, zero});
  std::vector<char> seen(G, 0);
  mats_[0] = {one, zero, zero, one};
  seen[0] = 1;
  std::queue<int> todo;
  todo.push(0);
  while (!todo.empty()) {
    const int g = todo.front();
    todo.pop();
    for (int k = 0; k < n; ++k) {
      const int h = cx_.mult[cx_.generator[k]][g];
      const Mat2 m = side_refl_[k] * mats_[g];
      if (!seen[h]) {
        seen[h] = 1;
        mats_[h] = m;
        todo.push(h);
      } else if (!(mats_[h] == m)) {
        throw NotRational("vertex coordinates disagree with the angle data");
      }
    }
  }
}

}  // namespace sflow

#pragma once

// Rational polygonal billiards: unfolding, directional flow, tracing.

#include <array>
#include <optional>
#include <stdexcept>
#include <vector>

#include "sflow/certificate.hpp"
#include "sflow/exactnum.hpp"
#include "sflow/iem.hpp"

namespace sflow {

class NotRational : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
class NonSimplePolygon : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
class CornerStart : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
class NotTransverse : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
class SectionMissesOrbits : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Vec2 {
  QuadExtScalar x, y;
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

Vec2 operator+(const Vec2& p, const Vec2& q);
Vec2 operator-(const Vec2& p, const Vec2& q);
Vec2 operator*(const QuadExtScalar& s, const Vec2& p);
QuadExtScalar cross(const Vec2& p, const Vec2& q);
QuadExtScalar dot(const Vec2& p, const Vec2& q);

/// Row-major 2x2 matrix.
struct Mat2 {
  QuadExtScalar a, b, c, d;
  Vec2 operator*(const Vec2& v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
  Mat2 operator*(const Mat2& m) const {
    return {a * m.a + b * m.c, a * m.b + b * m.d, c * m.a + d * m.c, c * m.b + d * m.d};
  }
  friend bool operator==(const Mat2&, const Mat2&) = default;
};

/// Reflection across a line parallel to e.
Mat2 reflection_along(const Vec2& e);

/// Interior angle m*pi/n, reduced, 0 < m/n < 2, m/n != 1.
struct AngleFraction {
  int m = 1, n = 2;
  friend bool operator==(const AngleFraction&, const AngleFraction&) = default;
};

struct RationalPolygon {
  /// angles[k] is the angle at vertex k; side k joins vertex k to k+1 (counterclockwise).
  std::vector<AngleFraction> angles;
  /// Exact coordinates in Q(sqrt field_d); required for tracing.
  std::vector<Vec2> vertices;
  std::int64_t field_d = 2;
  /// Approximate coordinates for the interval tracer when no exact form exists.
  std::vector<std::array<double, 2>> approx_vertices;

  int size() const { return static_cast<int>(angles.size()); }
  bool has_exact_vertices() const { return !vertices.empty(); }
};

/// Unit square, right triangle (pi/2, pi/8, 3pi/8) etc.
RationalPolygon unit_square();
RationalPolygon genus2_triangle();

/// Element of the dihedral group of order 2N; angles in units of pi/N.
/// rot(a): rotation by a*pi/N. ref(a): reflection across the line at angle a*pi/(2N).
struct DihedralElem {
  bool reflection = false;
  int a = 0;
  friend bool operator==(const DihedralElem&, const DihedralElem&) = default;
};

struct ConeClass {
  int corner = 0;        // polygon vertex index
  int multiplicity = 1;  // m: cone angle 2 pi m
  std::vector<int> faces;  // group element indices of the corners in this class
  int index() const { return 1 - multiplicity; }
};

class UnfoldingComplex {
 public:
  int N = 1;
  std::vector<DihedralElem> group;
  /// generator[k]: group index of the reflection S_k parallel to side k.
  std::vector<int> generator;
  /// mult[x][y]: index of group[x] * group[y].
  std::vector<std::vector<int>> mult;
  /// corner_class[k][g]: vertex class of corner k of face g.
  std::vector<std::vector<int>> corner_class;
  std::vector<ConeClass> classes;
  int V = 0, E = 0, F = 0;
  int chi_corner_formula = 0;

  int chi_faces() const { return V - E + F; }
  int identity() const { return 0; }
  int order() const { return static_cast<int>(group.size()); }
  /// Cone points with multiplicity > 1.
  std::vector<ConeClass> cone_points() const;
  int genus() const { return (2 - chi_faces()) / 2; }
};

/// Validates angle data (and exact vertices when given) and builds P x G / ~.
UnfoldingComplex unfold(const RationalPolygon& p);
bool is_torus_polygon(const RationalPolygon& p);

/// Billiard flow in direction v on the unfolded surface.
class DirectionalFlow {
 public:
  DirectionalFlow(RationalPolygon p, Vec2 v);

  const RationalPolygon& polygon() const { return poly_; }
  const UnfoldingComplex& complex() const { return cx_; }
  const Vec2& direction() const { return v_; }
  /// Exact matrix of each group element.
  const Mat2& matrix(int g) const { return mats_[g]; }
  /// Direction in the table on sheet g.
  Vec2 table_direction(int g) const { return mats_[g] * v_; }
  /// Sides' reflection matrices.
  const Mat2& side_reflection(int k) const { return side_refl_[k]; }
  bool convex() const { return convex_; }

 private:
  RationalPolygon poly_;
  UnfoldingComplex cx_;
  Vec2 v_;
  std::vector<Mat2> mats_;
  std::vector<Mat2> side_refl_;
  bool convex_ = true;
};

struct Bounce {
  int side = 0;
  Vec2 point;
  int g_after = 0;  // sheet after reflecting off `side`
};

enum class TraceEnd { Budget, Corner, Periodic, PrecisionExhausted };
const char* to_string(TraceEnd e);

struct Trajectory {
  Vec2 start;
  int g_start = 0;
  std::vector<Bounce> bounces;
  TraceEnd end = TraceEnd::Budget;
  int corner = -1;              // vertex hit, for Corner
  bool corner_singular = false;  // that vertex is a cone point
  std::uint64_t period = 0;     // reflections per period, for Periodic
  /// First bounce index of the periodic cycle.
  std::uint64_t cycle_start = 0;
};

/// Exact straight-line tracing. `start` is interior or on a side (not a corner);
/// g is the starting sheet. Stops at budget bounces, an exact corner hit, or an
/// exact return to a previous (side, point, sheet).
Trajectory trace(const DirectionalFlow& flow, const Vec2& start, int g, std::uint64_t budget);

/// Interval-arithmetic tracing for inexact data. Never returns Periodic or
/// Corner (equalities cannot be certified); PrecisionExhausted as soon as a
/// branch decision straddles the error bound.
struct ApproxTrajectory {
  TraceEnd end = TraceEnd::Budget;
  std::uint64_t bounces = 0;
  std::vector<int> sides;
};
ApproxTrajectory trace_approx(const RationalPolygon& p, std::array<double, 2> start, std::array<double, 2> v,
                              std::uint64_t budget);

/// One piece of the section: side `side` on sheet g (direction pointing inward).
struct SectionPiece {
  int side = 0;
  int g = 0;
  bool from_start_vertex = true;  // parameterized from V_side, else from V_side+1
  QuadExtScalar offset;           // start within the normalized section
  QuadExtScalar width;            // normalized flux width
};

struct FirstReturn {
  IntervalExchange iem;
  std::vector<SectionPiece> pieces;
  std::vector<int> section_sides;
  /// Normalization: flux units per unit of section coordinate.
  QuadExtScalar total_flux;
};

/// Section = the listed sides across all sheets where the flow enters.
/// Empty list selects the longest side. Exact mode, convex polygons.
FirstReturn first_return_iem(const DirectionalFlow& flow, std::vector<int> section_sides = {},
                             std::uint64_t budget = kDefaultBudget);

/// Section coordinate of a point on a section side on sheet g (g inward).
std::optional<QuadExtScalar> section_coordinate(const DirectionalFlow& flow, const FirstReturn& fr, int side,
                                                const Vec2& point, int g);
/// Inverse of section_coordinate.
std::pair<SectionPiece, Vec2> section_point(const DirectionalFlow& flow, const FirstReturn& fr,
                                            const QuadExtScalar& x);

struct BilliardVerdict {
  Certificate certificate;
  /// is_expansive_iem on the first-return map (absent for torus polygons).
  std::optional<Certificate> iem_side;
  std::optional<Trajectory> periodic_trajectory;
  std::vector<int> section_sides;
  std::string reason;
};

BilliardVerdict is_expansive_billiard(const RationalPolygon& p, const Vec2& v, std::uint64_t budget = kDefaultBudget);

}  // namespace sflow

#pragma once

// Basic-operation calculus on flow assemblies: add/remove fake saddles,
// cut/glue saddle connections, and the boundary recipes built from them.
//
// An assembly is a complex of polygons glued along half-edges. Orbit edges
// carry the flow direction; transverse edges only hold the cells together.
// Every corner carries an angle in units of pi, so a vertex with total angle
// t has index 1 - t/2 in the interior and (1 - t)/2 on the boundary.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sflow/certificate.hpp"
#include "sflow/iem.hpp"

namespace sflow {

class InvalidSite : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
class NotRemovable : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
class NotInterior : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
class IncompatibleArcs : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
class UnresolvedBoundary : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// S^{h,b,c}: sphere with h handles, b boundaries and c cross-caps.
struct SurfaceSignature {
  int h = 0, b = 0, c = 0;
  int euler_characteristic() const { return 2 - 2 * h - b - c; }
  bool is_torus() const { return h == 1 && b == 0 && c == 0; }
  friend bool operator==(const SurfaceSignature&, const SurfaceSignature&) = default;
};

/// Reduces c below 3 with S^{h,b,c} = S^{h+1,b,c-2}.
SurfaceSignature canonical(SurfaceSignature s);
bool admits_expansive(const SurfaceSignature& s);
std::string to_string(const SurfaceSignature& s);

enum class EdgeKind { Orbit, Transverse };

struct HalfEdge {
  int face = -1;
  int next = -1, prev = -1;
  int twin = -1;      // -1 on the boundary
  bool flip = false;  // the pairing reverses orientation
  EdgeKind kind = EdgeKind::Transverse;
  int dir = 0;  // orbit edges: +1 when the flow runs tail to head
  BigRational angle;  // corner at the tail, in units of pi
  bool fake = false;  // corner belongs to a marked fake saddle
  friend bool operator==(const HalfEdge&, const HalfEdge&) = default;
};

struct AssemblyPiece {
  std::string label;
  IntervalExchange base;
  Certificate periodic;  // detect_periodic on the base
};

struct AssemblyVertex {
  std::vector<int> corners;  // half-edges whose tail is this vertex
  BigRational angle;
  bool boundary = false;
  bool fake = false;
  /// Orbit edges meeting here do not continue one another.
  bool broken_flow = false;
  int twice_index = 0;
  int component = -1;
  bool singular() const { return fake || twice_index != 0 || broken_flow; }
};

struct AssemblyComponent {
  std::vector<int> faces;
  std::vector<int> pieces;
  int vertices = 0, edges = 0;
  int euler_characteristic = 0;
  int boundaries = 0;
  bool orientable = true;
  SurfaceSignature signature;
};

struct AssemblyTopology {
  std::vector<AssemblyVertex> vertices;
  std::vector<int> vertex_of;  // per half-edge, vertex of its tail
  std::vector<AssemblyComponent> components;
  std::vector<int> component_of_face;
  /// Boundary cycles as lists of unpaired half-edges in walking order.
  std::vector<std::vector<int>> boundaries;
};

/// A saddle connection or boundary arc: a chain of orbit half-edges in flow
/// order between singular vertices.
struct Arc {
  std::vector<int> edges;
  int source = -1, sink = -1;  // vertex ids
  bool boundary = false;
};

/// One primitive step; re-running the steps of a transcript rebuilds the
/// assembly exactly.
struct SurgeryStep {
  std::string op;
  std::vector<int> args;
  std::vector<std::string> text;
  friend bool operator==(const SurgeryStep&, const SurgeryStep&) = default;
};

class FlowAssembly {
 public:
  FlowAssembly() = default;

  /// Adds the suspension 2n-gon of f as a new closed piece. Index-0 vertex
  /// classes are marked as fake saddles. Returns the piece id.
  int add_piece(const IntervalExchange& f, std::string label, std::uint64_t budget = kDefaultBudget);

  const std::vector<HalfEdge>& half_edges() const { return he_; }
  /// One half-edge per face.
  const std::vector<int>& faces() const { return faces_; }
  const std::vector<AssemblyPiece>& pieces() const { return pieces_; }
  int piece_of_face(int f) const { return face_piece_[f]; }
  const std::vector<SurgeryStep>& transcript() const { return transcript_; }

  AssemblyTopology topology() const;
  /// Maximal orbit chain through half-edge e (or its boundary arc).
  Arc arc_through(const AssemblyTopology& t, int e) const;
  /// Vertex ids at the flow source and sink of orbit half-edge e.
  int source_vertex(const AssemblyTopology& t, int e) const;
  int sink_vertex(const AssemblyTopology& t, int e) const;

  // Refinements: they change the cells, not the flow or the surface.

  /// Splits half-edge e (and its twin) at a new regular point. Returns the
  /// half-edge of the second half on e's side.
  int subdivide(int e);
  /// Splits the face of x and y by a new edge from tail(x) to tail(y).
  /// `x_share` is the part of x's corner kept next to x; by default the
  /// corners are split in proportion. Returns the new half-edge running
  /// from tail(x) to tail(y); `dir` is the flow along it.
  int split_face(int x, int y, EdgeKind kind, int dir, std::optional<BigRational> x_share = std::nullopt);
  /// Subdivides `from` and `to` (two sides of one face) and joins the new
  /// points by an orbit edge running from the first to the second.
  int mark_segment(int from, int to);

  // Basic operations in place. Each records its step in the transcript.

  void add_fake_saddle(int corner);
  void remove_fake_saddle(int corner);
  /// Cuts the interior saddle connection through e. Returns the two new
  /// boundary half-edges that came from e.
  std::pair<int, int> cut(int e);
  /// Glues the boundary arcs through e1 and e2, source to source.
  void glue(int e1, int e2);

  /// Structural form independent of half-edge numbering.
  std::string canonical_form() const;

  friend bool operator==(const FlowAssembly& a, const FlowAssembly& b) {
    return a.canonical_form() == b.canonical_form();
  }

  /// Steps run inside another step are not recorded.
  void record(SurgeryStep s) {
    if (quiet_ == 0) transcript_.push_back(std::move(s));
  }

 private:
  friend struct QuietScope;
  int new_half_edge(const HalfEdge& h);
  void pair(int a, int b, bool flip);

  std::vector<HalfEdge> he_;
  std::vector<int> faces_;
  std::vector<int> face_piece_;
  std::vector<AssemblyPiece> pieces_;
  std::vector<SurgeryStep> transcript_;
  int quiet_ = 0;
};

/// Suppresses transcript recording while alive.
struct QuietScope {
  explicit QuietScope(FlowAssembly& a) : a(a) { ++a.quiet_; }
  ~QuietScope() { --a.quiet_; }
  QuietScope(const QuietScope&) = delete;
  QuietScope& operator=(const QuietScope&) = delete;
  FlowAssembly& a;
};

/// Runs one transcript step on c, recording it again.
void apply_step(FlowAssembly& c, const SurgeryStep& s);
/// Rebuilds an assembly from transcript steps.
FlowAssembly replay(const std::vector<SurgeryStep>& steps);

// Pure forms of the basic operations.
FlowAssembly add_fake_saddle(const FlowAssembly& a, int corner);
FlowAssembly remove_fake_saddle(const FlowAssembly& a, int corner);
FlowAssembly cut_saddle_connection(const FlowAssembly& a, int e);
FlowAssembly glue_saddle_connections(const FlowAssembly& a, int e1, int e2);

/// Turns the orbit segment `segment` into a new boundary component: fake
/// saddles at both ends, a cut, two fake saddles on one side, and the two
/// arcs leaving the first end glued back together.
FlowAssembly add_boundary(const FlowAssembly& a, int segment);
/// Closes the boundary component containing half-edge e by fake saddles,
/// separatrix cuts and folds of arcs that share an end.
FlowAssembly collapse_boundary(const FlowAssembly& a, int e);
/// Removes every index-0 fake saddle.
FlowAssembly remove_all_fake_saddles(const FlowAssembly& a);

struct ComponentVerdict {
  int component = -1;
  SurfaceSignature signature;
  bool orientable = true;
  std::vector<int> pieces;
  std::vector<int> singular_indices;  // twice the index, per singular point
  Certificate certificate;
};

/// Per-component decision. With `closed` set, any boundary left raises
/// UnresolvedBoundary.
std::vector<ComponentVerdict> assemble_and_decide(const FlowAssembly& a, bool closed = false);

}  // namespace sflow

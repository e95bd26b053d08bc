#include <cmath>
#include <functional>
#include <map>

#include "capi_commands.hpp"
#include "sflow/sflow.h"
#include "sflow/suspension.hpp"

struct sflow_result {
  sflow_status status = SFLOW_OK;
  std::string json;
  std::string error;
};

struct sflow_assembly {
  sflow::capi::SurgerySession session;
};

namespace sflow::capi {

json scalar_json(const QuadExtScalar& x) { return x.str(); }

std::string half_string(int twice) {
  BigRational q(twice, 2);
  q.canonicalize();
  return to_string(q);
}

sflow_status status_of(Verdict v) { return v == Verdict::Unknown ? SFLOW_UNKNOWN : SFLOW_OK; }

json certificate_json(const Certificate& c) {
  json j = {{"expansive", to_string(c.verdict)},
            {"conditional", c.conditional},
            {"depth", c.depth},
            {"reason", c.reason}};
  if (c.periodic) j["witness"] = {{"point", c.periodic->point.str()}, {"period", c.periodic->period}};
  if (c.connection) {
    j["connection"] = {{"from", c.connection->from},
                       {"side", c.connection->right_side ? "right" : "left"},
                       {"to", c.connection->to},
                       {"steps", c.connection->steps}};
  }
  return j;
}

namespace {

json iem_json(const IntervalExchange& f) {
  json lengths = json::array();
  for (const auto& l : f.lengths()) lengths.push_back(l.str());
  return {{"lengths", lengths}, {"perm", f.permutation()}, {"field", f.field()}};
}

json vec_json(const Vec2& v) {
  return {{"exact", {v.x.str(), v.y.str()}}, {"approx", {v.x.approx(), v.y.approx()}}};
}

Outcome iem_check(const View& req) {
  const auto f = iem(req.at("iem"));
  const auto c = is_expansive_iem(f, budget(req));
  Outcome out{certificate_json(c), status_of(c.verdict)};
  out.doc["schema"] = "sflow.iem.check/1";
  out.doc["iem"] = iem_json(f);
  out.doc["rational"] = f.is_rational();
  if (c.periodic || c.connection) out.doc["witness_verified"] = verify_witness(f, c);
  const auto s = singular_set(f);
  out.doc["singular_breakpoints"] = s.singular;
  out.doc["removable_breakpoints"] = s.removable;
  return out;
}

Outcome iem_orbit(const View& req) {
  const auto f = iem(req.at("iem"));
  const auto x = scalar(req.at("x"), f.field());
  const auto steps = budget(req, "steps", 10);
  const auto r = orbit(f, x, steps);
  json pts = json::array();
  for (const auto& p : r.points) pts.push_back(p.str());
  json doc = {{"schema", "sflow.iem.orbit/1"}, {"points", pts}};
  doc["hit_breakpoint"] = r.hit_breakpoint ? json(*r.hit_breakpoint) : json(nullptr);
  return {doc, SFLOW_OK};
}

Outcome iem_separate(const View& req) {
  const auto f = iem(req.at("iem"));
  const auto d = f.field();
  const auto r = separation_test(f, scalar(req.at("x"), d), scalar(req.at("y"), d), scalar(req.at("delta"), d),
                                 budget(req));
  json doc = {{"schema", "sflow.iem.separate/1"},
              {"status", to_string(r.status)},
              {"index", r.index},
              {"distance", r.distance.str()}};
  if (r.status == SeparationStatus::BreakpointHit) {
    doc["hit_point"] = r.hit_point;
    doc["hit_breakpoint"] = r.hit_breakpoint;
  }
  return {doc, r.status == SeparationStatus::NotSeparated ? SFLOW_UNKNOWN : SFLOW_OK};
}

Outcome suspend_cmd(const View& req) {
  const View iv = req.at("iem");
  const auto f = iem(iv);
  std::optional<SuspensionComplex> cx;
  try {
    cx = suspend(f);
  } catch (const ReduciblePermutation& e) {
    fail(iv.at("perm").pointer(), e.what());
  }
  const auto b = budget(req);
  const auto d = descriptor(*cx, b);
  const auto c = is_expansive_flow(d, b);
  json classes = json::array();
  for (const auto& r : cx->classes()) {
    classes.push_back({{"k", r.k}, {"index", r.index()}, {"hyperbolic_sectors", r.hyperbolic_sectors()},
                       {"top_vertices", r.top_vertices}});
  }
  json connections = json::array();
  for (const auto& w : d.saddle_connections) {
    connections.push_back({{"from", w.from}, {"side", w.right_side ? "right" : "left"}, {"to", w.to}, {"steps", w.steps}});
  }
  Outcome out{certificate_json(c), status_of(c.verdict)};
  out.doc["schema"] = "sflow.suspend/1";
  out.doc["classes"] = classes;
  out.doc["euler_characteristic"] = cx->euler_characteristic();
  out.doc["genus"] = cx->genus();
  out.doc["index_sum"] = d.index_sum();
  out.doc["surface"] = {{"orientable", d.orientable}, {"h", d.h}, {"b", d.b}, {"c", d.c}};
  out.doc["periodic"] = certificate_json(d.periodic);
  out.doc["nonwandering_full"] = d.nonwandering_full;
  out.doc["saddle_connections"] = connections;
  return out;
}

Outcome surface_admit(const View& req) {
  SurfaceSignature s{static_cast<int>(req.at("h").integer(0, 1000)), static_cast<int>(req.at("b").integer(0, 1000)),
                     static_cast<int>(req.at("c").integer(0, 1000))};
  const auto k = canonical(s);
  json doc = {{"schema", "sflow.surface.admit/1"},
              {"admits", admits_expansive(s)},
              {"surface", to_string(k)},
              {"canonical", {{"h", k.h}, {"b", k.b}, {"c", k.c}}},
              {"euler_characteristic", s.euler_characteristic()},
              {"orientable", s.c == 0}};
  return {doc, SFLOW_OK};
}

Outcome billiard_unfold(const View& req) {
  const auto p = polygon(req.at("polygon"));
  const auto u = unfold(p);
  json cones = json::array();
  for (const auto& c : u.cone_points()) {
    cones.push_back({{"corner", c.corner}, {"multiplicity", c.multiplicity}, {"index", c.index()}});
  }
  json doc = {{"schema", "sflow.billiard.unfold/1"},
              {"N", u.N},
              {"group_order", u.order()},
              {"V", u.V},
              {"E", u.E},
              {"F", u.F},
              {"chi_faces", u.chi_faces()},
              {"chi_corner_formula", u.chi_corner_formula},
              {"genus", u.genus()},
              {"cone_points", cones},
              {"torus", is_torus_polygon(p)}};
  if (p.has_exact_vertices()) {
    json vs = json::array();
    for (const auto& v : p.vertices) vs.push_back(vec_json(v));
    doc["vertices"] = vs;
  }
  return {doc, SFLOW_OK};
}

Outcome billiard_trace(const View& req) {
  const View pv = req.at("polygon");
  const auto p = polygon(pv);
  if (!p.has_exact_vertices()) fail(pv.pointer(), "tracing needs exact vertices");
  const View dv = req.at("direction"), sv = req.at("start");
  const auto v = vec2(dv, p.field_d);
  const auto start = vec2(sv, p.field_d);
  std::optional<DirectionalFlow> flow;
  try {
    flow.emplace(p, v);
  } catch (const std::invalid_argument& e) {
    fail(dv.pointer(), e.what());
  }
  int g = 0;
  if (auto gv = req.find("sheet")) g = static_cast<int>(gv->integer(0, flow->complex().order() - 1));
  Trajectory t;
  try {
    t = trace(*flow, start, g, budget(req));
  } catch (const std::invalid_argument& e) {
    fail(sv.pointer(), e.what());
  }
  json bounces = json::array();
  for (const auto& b : t.bounces) {
    json j = vec_json(b.point);
    j["side"] = b.side;
    j["sheet"] = b.g_after;
    bounces.push_back(j);
  }
  json doc = {{"schema", "sflow.billiard.trace/1"}, {"start", vec_json(t.start)}, {"sheet", t.g_start},
              {"bounces", bounces},  {"end", to_string(t.end)}};
  if (t.end == TraceEnd::Corner) {
    doc["corner"] = t.corner;
    doc["corner_singular"] = t.corner_singular;
  }
  if (t.end == TraceEnd::Periodic) {
    doc["period"] = t.period;
    doc["cycle_start"] = t.cycle_start;
  }
  json vs = json::array();
  for (const auto& x : p.vertices) vs.push_back(vec_json(x));
  doc["vertices"] = vs;
  return {doc, t.end == TraceEnd::Budget ? SFLOW_UNKNOWN : SFLOW_OK};
}

Outcome billiard_verdict(const View& req) {
  const View pv = req.at("polygon"), dv = req.at("direction");
  const auto p = polygon(pv);
  const auto v = vec2(dv, p.field_d);
  BilliardVerdict r;
  try {
    r = is_expansive_billiard(p, v, budget(req));
  } catch (const std::invalid_argument& e) {
    fail(dv.pointer(), e.what());
  }
  Outcome out{certificate_json(r.certificate), status_of(r.certificate.verdict)};
  out.doc["schema"] = "sflow.billiard.verdict/1";
  out.doc["reason"] = r.reason;
  if (r.iem_side) out.doc["first_return"] = certificate_json(*r.iem_side);
  out.doc["section_sides"] = r.section_sides;
  if (r.periodic_trajectory) {
    out.doc["periodic_trajectory"] = {{"period", r.periodic_trajectory->period},
                                      {"start", vec_json(r.periodic_trajectory->start)},
                                      {"sheet", r.periodic_trajectory->g_start}};
  }
  return out;
}

json pair_json(const PairTestResult& r) {
  json j = {{"status", to_string(r.status)}, {"returns", r.returns}, {"time", r.time.str()}, {"sup", r.sup.str()}};
  if (r.dphi) j["dphi"] = {{"value", r.dphi->value.str()}, {"same_orbit", r.dphi->same_orbit}, {"time", r.dphi->time.str()}};
  return j;
}

Outcome flow_pairtest(const View& req) {
  const auto f = iem(req.at("iem"));
  const auto d = f.field();
  SuspensionFlow fl(f);
  const View xv = req.at("x"), yv = req.at("y");
  const auto x = suspension_point(xv, d), y = suspension_point(yv, d);
  for (const auto& [p, v] : {std::pair{x, xv}, std::pair{y, yv}}) {
    try {
      fl.validate(p);
    } catch (const std::invalid_argument& e) {
      fail(v.pointer(), e.what());
    }
  }
  const auto delta = scalar(req.at("delta"), d);
  const auto horizon = budget(req, "horizon");
  json doc = {{"schema", "sflow.flow.pairtest/1"}};
  try {
    if (auto ev = req.find("eps")) {
      const auto k = kstar_pair_test(fl, x, y, delta, scalar(*ev, d), horizon);
      doc.update(pair_json(k.pair));
      if (k.witness) doc["kstar_witness"] = {{"t0", k.witness->t0.str()}, {"s", k.witness->s.str()}};
      doc["needs_budget"] = k.needs_budget;
      return {doc, k.pair.status == PairStatus::Separated || k.witness ? SFLOW_OK : SFLOW_UNKNOWN};
    }
    const auto r = expansive_pair_test(fl, x, y, delta, horizon);
    doc.update(pair_json(r));
    return {doc, r.status == PairStatus::Separated ? SFLOW_OK : SFLOW_UNKNOWN};
  } catch (const SingularHit& e) {
    doc["status"] = "SingularHit";
    doc["point"] = e.point;
    doc["breakpoint"] = e.breakpoint;
    doc["returns"] = e.returns;
    return {doc, SFLOW_UNKNOWN};
  }
}

const std::map<std::string, std::function<Outcome(const View&)>>& commands() {
  static const std::map<std::string, std::function<Outcome(const View&)>> table = {
      {"iem.check", iem_check},
      {"iem.orbit", iem_orbit},
      {"iem.separate", iem_separate},
      {"suspend", suspend_cmd},
      {"surface.admit", surface_admit},
      {"surgery.exec", surgery_exec},
      {"billiard.unfold", billiard_unfold},
      {"billiard.trace", billiard_trace},
      {"billiard.verdict", billiard_verdict},
      {"flow.pairtest", flow_pairtest},
  };
  return table;
}

std::string located(const std::string& name, const std::string& text, const InputError& e) {
  const auto pos = locate(text, e.pointer);
  std::string where = e.pointer.empty() ? "" : " at " + e.pointer;
  return name + ":" + std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " + e.what() + where;
}

// Runs body, turning exceptions into a status and message.
sflow_result* guarded(const std::string& name, const std::string& text, const std::function<Outcome()>& body) {
  auto* r = new sflow_result;
  try {
    auto out = body();
    r->status = out.status;
    r->json = out.doc.dump(2) + "\n";
  } catch (const json::parse_error& e) {
    const auto pos = position_of_offset(text, e.byte > 0 ? e.byte - 1 : 0);
    std::string msg = e.what();
    if (auto k = msg.find("parse error"); k != std::string::npos) msg = msg.substr(k);
    r->status = SFLOW_INPUT_ERROR;
    r->error = name + ":" + std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " + msg;
  } catch (const InputError& e) {
    r->status = SFLOW_INPUT_ERROR;
    r->error = located(name, text, e);
  } catch (const std::exception& e) {
    r->status = SFLOW_INTERNAL;
    r->error = name + ": internal error: " + e.what();
  }
  return r;
}

void check_schema(const View& req) {
  if (auto s = req.find("schema")) {
    if (s->str() != kRequestSchema) fail(s->pointer(), "unsupported schema \"" + s->str() + "\", expected " + kRequestSchema);
  }
}

}  // namespace

}  // namespace sflow::capi

using namespace sflow::capi;

extern "C" {

const char* sflow_version(void) { return "1.0.0"; }

sflow_status sflow_run(const char* command, const char* request_json, const char* source_name, sflow_result** out) {
  const std::string name = source_name ? source_name : "<request>";
  const std::string text = request_json ? request_json : "";
  const std::string cmd = command ? command : "";
  *out = guarded(name, text, [&]() -> Outcome {
    auto it = commands().find(cmd);
    if (it == commands().end()) fail("", "unknown command \"" + cmd + "\"");
    const json req = json::parse(text);
    const View v(req, "");
    check_schema(v);
    return it->second(v);
  });
  return (*out)->status;
}

sflow_status sflow_result_status(const sflow_result* r) { return r->status; }
const char* sflow_result_json(const sflow_result* r) { return r->json.c_str(); }
const char* sflow_result_error(const sflow_result* r) { return r->error.c_str(); }
void sflow_result_free(sflow_result* r) { delete r; }

sflow_assembly* sflow_assembly_new(void) { return new sflow_assembly; }

sflow_status sflow_assembly_step(sflow_assembly* a, const char* op_json, sflow_result** out) {
  const std::string text = op_json ? op_json : "";
  // A failed step leaves the assembly as it was.
  *out = guarded("<step>", text, [&]() -> Outcome {
    const json op = json::parse(text);
    SurgerySession next = a->session;
    next.step(View(op, ""));
    a->session = std::move(next);
    return {json{{"schema", "sflow.surgery.step/1"}, {"ok", true}}, SFLOW_OK};
  });
  return (*out)->status;
}

sflow_status sflow_assembly_describe(const sflow_assembly* a, sflow_result** out) {
  *out = guarded("<assembly>", "", [&] { return a->session.describe(); });
  return (*out)->status;
}

void sflow_assembly_free(sflow_assembly* a) { delete a; }

}

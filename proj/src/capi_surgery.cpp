#include <regex>
#include <set>

#include "capi_commands.hpp"

namespace sflow::capi {

namespace {

int source_corner(const FlowAssembly& a, int e) {
  const auto& h = a.half_edges()[e];
  return h.dir > 0 ? e : h.next;
}

int sink_corner(const FlowAssembly& a, int e) {
  const auto& h = a.half_edges()[e];
  return h.dir > 0 ? h.next : e;
}

json step_json(const SurgeryStep& s) {
  json j = {{"op", s.op}, {"args", s.args}};
  if (!s.text.empty()) j["text"] = s.text;
  return j;
}

}  // namespace

int SurgerySession::ref(const View& v) const {
  const int n = static_cast<int>(a_.half_edges().size());
  if (!v.is_string()) return static_cast<int>(v.integer(0, n - 1));
  static const std::regex re(R"(^([A-Za-z_]\w*)(?:\+(\d+))?(?:\.(source|sink))?$)");
  const std::string s = v.str();
  std::smatch m;
  if (!std::regex_match(s, m, re)) fail(v.pointer(), "bad half-edge reference \"" + s + "\" (name, name+k, name.source)");
  auto it = names_.find(m[1]);
  if (it == names_.end()) fail(v.pointer(), "unknown name \"" + m[1].str() + "\"");
  int e = it->second;
  if (m[2].matched) e += std::stoi(m[2]);
  if (e < 0 || e >= n) fail(v.pointer(), "reference \"" + s + "\" is out of range");
  if (m[3].matched) {
    if (a_.half_edges()[e].kind != EdgeKind::Orbit) fail(v.pointer(), "\"" + s + "\" needs an orbit edge");
    e = m[3] == "source" ? source_corner(a_, e) : sink_corner(a_, e);
  }
  return e;
}

void SurgerySession::bind(const View& op, const std::string& key, int value) {
  if (auto nv = op.find(key)) {
    const std::string name = nv->str();
    static const std::regex re(R"(^[A-Za-z_]\w*$)");
    if (!std::regex_match(name, re)) fail(nv->pointer(), "names are identifiers");
    names_[name] = value;
  }
}

void SurgerySession::step(const View& op) {
  const std::string kind = op.at("op").str();
  try {
    if (op.has("args")) {
      SurgeryStep s{kind, {}, {}};
      const View av = op.at("args");
      for (std::size_t i = 0; i < av.size(); ++i) s.args.push_back(static_cast<int>(av.at(i).integer()));
      if (auto tv = op.find("text")) {
        for (std::size_t i = 0; i < tv->size(); ++i) s.text.push_back(tv->at(i).str());
      }
      if (kind != "piece") {
        const int n = static_cast<int>(a_.half_edges().size());
        const std::size_t edges = kind == "split_face" ? 2 : s.args.size();
        for (std::size_t i = 0; i < edges && i < s.args.size(); ++i) {
          if (s.args[i] < 0 || s.args[i] >= n) fail(av.at(i).pointer(), "half-edge out of range");
        }
      }
      apply_step(a_, s);
      return;
    }
    if (kind == "piece") {
      const int base = static_cast<int>(a_.half_edges().size());
      std::string label = "P" + std::to_string(a_.pieces().size());
      if (auto nv = op.find("name")) label = nv->str();
      if (auto lv = op.find("label")) label = lv->str();
      a_.add_piece(iem(op.at("iem")), label, budget(op));
      bind(op, "name", base);
    } else if (kind == "segment") {
      bind(op, "name", a_.mark_segment(ref(op.at("from")), ref(op.at("to"))));
    } else if (kind == "add_fake_saddle") {
      a_.add_fake_saddle(ref(op.at("at")));
    } else if (kind == "remove_fake_saddle") {
      a_.remove_fake_saddle(ref(op.at("at")));
    } else if (kind == "cut") {
      auto [x, y] = a_.cut(ref(op.at("edge")));
      if (auto nv = op.find("names")) {
        if (nv->size() != 2) fail(nv->pointer(), "cut binds two names");
        names_[nv->at(0).str()] = x;
        names_[nv->at(1).str()] = y;
      }
    } else if (kind == "glue") {
      const View ev = op.at("edges");
      if (ev.size() != 2) fail(ev.pointer(), "glue takes two edges");
      a_.glue(ref(ev.at(0)), ref(ev.at(1)));
    } else if (kind == "add_boundary") {
      a_ = add_boundary(a_, ref(op.at("segment")));
    } else if (kind == "collapse_boundary") {
      a_ = collapse_boundary(a_, ref(op.at("edge")));
    } else if (kind == "remove_all_fake_saddles") {
      a_ = remove_all_fake_saddles(a_);
    } else {
      fail(op.at("op").pointer(), "unknown operation \"" + kind + "\"");
    }
  } catch (const std::invalid_argument& e) {
    fail(op.pointer(), e.what());
  } catch (const std::domain_error& e) {
    fail(op.pointer(), e.what());
  }
}

Outcome SurgerySession::describe() const {
  Outcome out;
  json& d = out.doc;
  d["schema"] = "sflow.surgery/1";
  d["transcript"] = json::array();
  for (const auto& s : a_.transcript()) d["transcript"].push_back(step_json(s));
  d["canonical_form"] = a_.canonical_form();
  d["replay_identical"] = replay(a_.transcript()) == a_;
  d["names"] = names_;

  const auto t = a_.topology();
  d["components"] = json::array();
  for (std::size_t k = 0; k < t.components.size(); ++k) {
    const auto& c = t.components[k];
    json points = json::array();
    for (const auto& v : t.vertices) {
      if (v.component != static_cast<int>(k) || !v.singular()) continue;
      points.push_back({{"index", half_string(v.twice_index)},
                        {"fake", v.fake},
                        {"boundary", v.boundary},
                        {"corners", v.corners}});
    }
    json labels = json::array();
    for (int p : c.pieces) labels.push_back(a_.pieces()[p].label);
    d["components"].push_back({{"signature", {{"h", c.signature.h}, {"b", c.signature.b}, {"c", c.signature.c}}},
                               {"surface", to_string(c.signature)},
                               {"orientable", c.orientable},
                               {"euler_characteristic", c.euler_characteristic},
                               {"boundaries", c.boundaries},
                               {"admits_expansive", admits_expansive(c.signature)},
                               {"pieces", labels},
                               {"singular_points", points}});
  }
  d["verdicts"] = json::array();
  for (const auto& v : assemble_and_decide(a_)) {
    json j = certificate_json(v.certificate);
    j["component"] = v.component;
    j["singular_indices"] = json::array();
    for (int twice : v.singular_indices) j["singular_indices"].push_back(half_string(twice));
    d["verdicts"].push_back(j);
    if (v.certificate.verdict == Verdict::Unknown) out.status = SFLOW_UNKNOWN;
  }
  return out;
}

Outcome surgery_exec(const View& req) {
  SurgerySession s;
  const View script = req.raw().is_array() ? req : req.at("script");
  for (std::size_t i = 0; i < script.size(); ++i) s.step(script.at(i));
  return s.describe();
}

}  // namespace sflow::capi

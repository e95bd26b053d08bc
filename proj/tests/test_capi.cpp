#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <sstream>

#include "iem_fixtures.hpp"
#include "json.hpp"
#include "sflow/billiard.hpp"
#include "sflow/metricflow.hpp"
#include "sflow/sflow.h"
#include "sflow/surgery.hpp"
#include "sflow/suspension.hpp"

using namespace sflow;
using json = nlohmann::json;
using fixtures::Q;

namespace {

struct Run {
  sflow_status status;
  json doc;
  std::string error;
};

Run run(const std::string& cmd, const std::string& text) {
  sflow_result* r = nullptr;
  const auto st = sflow_run(cmd.c_str(), text.c_str(), "req.json", &r);
  Run out{st, {}, sflow_result_error(r)};
  const std::string body = sflow_result_json(r);
  if (!body.empty()) out.doc = json::parse(body);
  sflow_result_free(r);
  return out;
}

Run run(const std::string& cmd, const json& req) { return run(cmd, req.dump()); }

json iem_req(const IntervalExchange& f) {
  json lengths = json::array();
  for (const auto& l : f.lengths()) lengths.push_back(l.str());
  return {{"lengths", lengths}, {"perm", f.permutation()}, {"field", f.field()}};
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("iem check matches the library") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 20; ++t) {
    const int n = 2 + static_cast<int>(rng() % 4);
    IntervalExchange f(fixtures::random_rational_lengths(rng, n, 60), fixtures::random_irreducible(rng, n));
    auto r = run("iem.check", json{{"schema", "sflow.request/1"}, {"iem", iem_req(f)}, {"budget", 5000}});
    const auto c = is_expansive_iem(f, 5000);
    CHECK(r.doc["expansive"] == to_string(c.verdict));
    CHECK(r.doc["depth"] == c.depth);
    CHECK(r.status == (c.verdict == Verdict::Unknown ? SFLOW_UNKNOWN : SFLOW_OK));
    CHECK(r.doc["reason"] == c.reason);
    if (c.periodic) {
      CHECK(r.doc["witness"]["period"] == c.periodic->period);
      CHECK(r.doc["witness"]["point"] == c.periodic->point.str());
      CHECK(r.doc["witness_verified"] == true);
    }
  }
  auto g = run("iem.check", json{{"iem", iem_req(fixtures::golden_321())}, {"budget", 2000}});
  CHECK(g.doc["expansive"] == to_string(is_expansive_iem(fixtures::golden_321(), 2000).verdict));
}

TEST_CASE("suspend and billiard commands match the library") {
  const auto f = fixtures::golden_4321();
  auto s = run("suspend", json{{"iem", iem_req(f)}});
  const auto cx = suspend(f);
  CHECK(s.doc["genus"] == cx.genus());
  CHECK(s.doc["euler_characteristic"] == cx.euler_characteristic());
  CHECK(s.doc["classes"].size() == cx.classes().size());
  CHECK(s.doc["expansive"] == to_string(is_expansive_flow(descriptor(cx)).verdict));

  auto u = run("billiard.unfold", json{{"polygon", "genus2_triangle"}});
  const auto cx2 = unfold(genus2_triangle());
  CHECK(u.doc["group_order"] == cx2.order());
  CHECK(u.doc["chi_faces"] == -2);
  CHECK(u.doc["chi_corner_formula"] == -2);
  CHECK(u.doc["cone_points"].size() == 1);
  CHECK(u.doc["cone_points"][0]["multiplicity"] == 3);

  auto explicit_square = run("billiard.unfold", json{{"polygon", {{"angles", {{1, 2}, {1, 2}, {1, 2}, {1, 2}}}}}});
  CHECK(explicit_square.doc["torus"] == true);
  CHECK(explicit_square.doc["chi_faces"] == 0);

  auto v = run("billiard.verdict", json{{"polygon", "square"}, {"direction", {1, 0}}});
  CHECK(v.status == SFLOW_OK);
  CHECK(v.doc["expansive"] == "No");
  CHECK(v.doc["reason"] == "torus");

  const Vec2 dir{QuadExtScalar::integer(1, 2), QuadExtScalar::rational(BigRational(1, 3), 2)};
  auto w = run("billiard.verdict", json{{"polygon", "genus2_triangle"}, {"direction", {"1", "1/3"}}, {"budget", 2000}});
  const auto lib = is_expansive_billiard(genus2_triangle(), dir, 2000);
  CHECK(w.doc["expansive"] == to_string(lib.certificate.verdict));
  CHECK(w.doc["reason"] == lib.reason);
}

TEST_CASE("surface admit") {
  for (int h = 0; h <= 3; ++h) {
    for (int b = 0; b <= 3; ++b) {
      for (int c = 0; c <= 2; ++c) {
        auto r = run("surface.admit", json{{"h", h}, {"b", b}, {"c", c}});
        CHECK(r.doc["admits"] == admits_expansive({h, b, c}));
      }
    }
  }
  CHECK(run("surface.admit", json{{"h", 1}, {"b", 0}, {"c", 0}}).doc["admits"] == false);
}

TEST_CASE("pair test and orbit commands") {
  const auto f = fixtures::golden_321();
  auto r = run("flow.pairtest", json{{"iem", iem_req(f)},
                                     {"x", {{"base", "1/3"}, {"height", "0"}}},
                                     {"y", {{"base", "1001/3000"}, {"height", "0"}}},
                                     {"delta", (QuadExtScalar::rational(BigRational(3, 10), 5) * f.lengths()[0]).str()},
                                     {"horizon", 100000}});
  SuspensionFlow fl(f);
  auto lib = expansive_pair_test(fl, {Q("1/3", 5), Q("0", 5)}, {Q("1001/3000", 5), Q("0", 5)},
                                 QuadExtScalar::rational(BigRational(3, 10), 5) * f.lengths()[0], 100000);
  CHECK(r.doc["status"] == to_string(lib.status));
  CHECK(r.doc["returns"] == lib.returns);
  CHECK(r.status == SFLOW_OK);

  auto o = run("iem.orbit", json{{"iem", iem_req(f)}, {"x", "1/7"}, {"steps", 5}});
  auto lo = orbit(f, Q("1/7", 5), 5);
  REQUIRE(o.doc["points"].size() == lo.points.size());
  for (std::size_t i = 0; i < lo.points.size(); ++i) CHECK(o.doc["points"][i] == lo.points[i].str());
}

TEST_CASE("input errors carry line and column") {
  const std::string text = "{\n  \"iem\": {\n    \"lengths\": [\"1/2\",\n      \"1/q\"],\n    \"perm\": [2, 1]\n  }\n}\n";
  auto r = run("iem.check", text);
  CHECK(r.status == SFLOW_INPUT_ERROR);
  CHECK(r.error.rfind("req.json:4:7: ", 0) == 0);
  CHECK(r.error.find("/iem/lengths/1") != std::string::npos);

  auto syntax = run("iem.check", std::string("{\n  \"iem\": {\n    \"perm\": [2 1]\n  }\n}\n"));
  CHECK(syntax.status == SFLOW_INPUT_ERROR);
  CHECK(syntax.error.rfind("req.json:3:16: ", 0) == 0);

  auto missing = run("iem.check", std::string("{\n  \"iem\": {\"perm\": [1]}\n}"));
  CHECK(missing.error.rfind("req.json:2:10: missing member \"lengths\"", 0) == 0);

  CHECK(run("iem.check", json{{"iem", {{"lengths", {0.5, 0.5}}, {"perm", {2, 1}}}}}).error.find("not exact") !=
        std::string::npos);
  CHECK(run("nope", json::object()).status == SFLOW_INPUT_ERROR);
  CHECK(run("surface.admit", json{{"schema", "sflow.request/9"}, {"h", 1}, {"b", 0}, {"c", 0}}).status ==
        SFLOW_INPUT_ERROR);
  CHECK(run("billiard.unfold", json{{"polygon", {{"angles", {{1, 2}, {1, 2}, {1, 3}}}}}}).status == SFLOW_INPUT_ERROR);
  CHECK(run("suspend", json{{"iem", {{"lengths", {"1/2", "1/2"}}, {"perm", {1, 2}}}}}).error.find("/iem/perm") !=
        std::string::npos);
}

TEST_CASE("surgery scripts are reproducible") {
  const std::string script = slurp(SFLOW_TEST_DATA "/bitorus.json");
  auto r = run("surgery.exec", script);
  REQUIRE(r.status == SFLOW_OK);
  REQUIRE(r.doc["components"].size() == 1);
  CHECK(r.doc["components"][0]["surface"] == "S^{2,0,0}");
  CHECK(r.doc["verdicts"][0]["expansive"] == "Yes");
  CHECK(r.doc["verdicts"][0]["conditional"] == true);
  CHECK(r.doc["replay_identical"] == true);

  // The transcript is itself a script.
  auto again = run("surgery.exec", json{{"script", r.doc["transcript"]}});
  CHECK(again.doc["canonical_form"] == r.doc["canonical_form"]);
  CHECK(again.doc["transcript"] == r.doc["transcript"]);
  CHECK(run("surgery.exec", r.doc["transcript"]).doc == again.doc);

  // Same steps through the handle API.
  sflow_assembly* a = sflow_assembly_new();
  const json parsed = json::parse(script);
  for (const auto& op : parsed["script"]) {
    sflow_result* s = nullptr;
    CHECK(sflow_assembly_step(a, op.dump().c_str(), &s) == SFLOW_OK);
    sflow_result_free(s);
  }
  sflow_result* bad = nullptr;
  CHECK(sflow_assembly_step(a, R"({"op": "cut", "edge": "nowhere"})", &bad) == SFLOW_INPUT_ERROR);
  CHECK(std::string(sflow_result_error(bad)).find("unknown name") != std::string::npos);
  sflow_result_free(bad);
  sflow_result* d = nullptr;
  sflow_assembly_describe(a, &d);
  auto doc = json::parse(sflow_result_json(d));
  CHECK(doc["canonical_form"] == r.doc["canonical_form"]);
  sflow_result_free(d);
  sflow_assembly_free(a);
}

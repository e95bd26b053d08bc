// sflow command-line front end. Talks to the library only through sflow.h.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sflow/sflow.h"

using json = nlohmann::json;

namespace {

struct Options {
  std::string input;  // request file; "-" for stdin
  std::string inline_json;
  std::string format = "json";
  std::string out;
  std::uint64_t budget = 0;
};

struct IemFlags {
  std::vector<std::string> lengths;
  std::vector<int> perm;
  int field = 0;
};

json iem_request(const IemFlags& f) {
  json j = {{"lengths", f.lengths}, {"perm", f.perm}};
  if (f.field) j["field"] = f.field;
  return j;
}

// "a,b" to a JSON pair of exact strings.
json pair_of(const std::vector<std::string>& v) { return json(v); }

std::string read_all(std::istream& in) {
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string svg_of(const std::string& command, const json& doc) {
  // Fixed viewBox: the table is scaled into the unit square with a margin.
  std::vector<std::pair<double, double>> poly;
  for (const auto& v : doc.value("vertices", json::array())) poly.emplace_back(v["approx"][0], v["approx"][1]);
  if (poly.empty()) return {};
  double lo_x = poly[0].first, hi_x = lo_x, lo_y = poly[0].second, hi_y = lo_y;
  for (auto [x, y] : poly) {
    lo_x = std::min(lo_x, x), hi_x = std::max(hi_x, x);
    lo_y = std::min(lo_y, y), hi_y = std::max(hi_y, y);
  }
  const double s = 0.9 / std::max(hi_x - lo_x, hi_y - lo_y);
  auto X = [&](double x) { return 0.05 + (x - lo_x) * s; };
  auto Y = [&](double y) { return 0.95 - (y - lo_y) * s; };
  std::ostringstream o;
  o.precision(6);
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 1 1\" width=\"600\" height=\"600\">\n";
  o << "<polygon fill=\"none\" stroke=\"black\" stroke-width=\"0.004\" points=\"";
  for (auto [x, y] : poly) o << X(x) << ',' << Y(y) << ' ';
  o << "\"/>\n";
  if (command == "billiard.trace") {
    o << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"0.002\" points=\"";
    o << X(doc["start"]["approx"][0]) << ',' << Y(doc["start"]["approx"][1]) << ' ';
    for (const auto& b : doc["bounces"]) o << X(b["approx"][0]) << ',' << Y(b["approx"][1]) << ' ';
    o << "\"/>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string csv_of(const std::string& command, const json& doc) {
  std::ostringstream o;
  if (command == "iem.orbit") {
    o << "step,point\n";
    std::size_t k = 0;
    for (const auto& p : doc["points"]) o << k++ << ',' << p.get<std::string>() << '\n';
  } else if (command == "billiard.trace") {
    o << "bounce,side,sheet,x,y\n";
    std::size_t k = 0;
    for (const auto& b : doc["bounces"]) {
      o << k++ << ',' << b["side"] << ',' << b["sheet"] << ',' << b["exact"][0].get<std::string>() << ','
        << b["exact"][1].get<std::string>() << '\n';
    }
  }
  return o.str();
}

int emit(const std::string& command, const std::string& text, const std::string& source, const Options& opt) {
  sflow_result* r = nullptr;
  const sflow_status st = sflow_run(command.c_str(), text.c_str(), source.c_str(), &r);
  int code = st == SFLOW_OK ? 0 : st == SFLOW_UNKNOWN ? 2 : st == SFLOW_INPUT_ERROR ? 1 : 3;
  if (st == SFLOW_INPUT_ERROR || st == SFLOW_INTERNAL) {
    std::cerr << "error: " << sflow_result_error(r) << '\n';
    sflow_result_free(r);
    return code;
  }
  std::string body = sflow_result_json(r);
  sflow_result_free(r);
  if (opt.format != "json") {
    const json doc = json::parse(body);
    body = opt.format == "svg" ? svg_of(command, doc) : csv_of(command, doc);
    if (body.empty()) {
      std::cerr << "error: " << command << " has no " << opt.format << " output\n";
      return 1;
    }
  }
  if (opt.out.empty()) {
    std::cout << body;
  } else {
    std::ofstream f(opt.out, std::ios::binary);
    f << body;
    if (!f) {
      std::cerr << "error: cannot write " << opt.out << '\n';
      return 1;
    }
  }
  return code;
}

// A request comes from --input, --json, or the flags, in that order.
int dispatch(const std::string& command, json from_flags, const Options& opt) {
  if (!opt.input.empty()) {
    std::string text;
    if (opt.input == "-") {
      text = read_all(std::cin);
    } else {
      std::ifstream f(opt.input, std::ios::binary);
      if (!f) {
        std::cerr << "error: cannot read " << opt.input << '\n';
        return 1;
      }
      text = read_all(f);
    }
    return emit(command, text, opt.input == "-" ? "<stdin>" : opt.input, opt);
  }
  if (!opt.inline_json.empty()) return emit(command, opt.inline_json, "<--json>", opt);
  from_flags["schema"] = "sflow.request/1";
  if (opt.budget) from_flags["budget"] = opt.budget;
  return emit(command, from_flags.dump(2), "<flags>", opt);
}

void common(CLI::App* sub, Options& opt) {
  sub->add_option("-i,--input", opt.input, "JSON request file (- for stdin)");
  sub->add_option("--json", opt.inline_json, "JSON request text");
  sub->add_option("--budget", opt.budget, "Search budget")->check(CLI::PositiveNumber);
  sub->add_option("-f,--format", opt.format, "Output format")->check(CLI::IsMember({"json", "csv", "svg"}));
  sub->add_option("-o,--out", opt.out, "Output file");
}

void iem_flags(CLI::App* sub, IemFlags& f) {
  sub->add_option("--lengths", f.lengths, "Interval lengths, exact (\"1/3\", \"-1/2+1/2*sqrt(5)\")")->delimiter(',');
  sub->add_option("--perm", f.perm, "Permutation, 1-based")->delimiter(',');
  sub->add_option("--field", f.field, "d of Q(sqrt d)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Expansiveness of surface flows: interval exchanges, suspensions, surgery, billiards"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(sflow_version()));
  Options opt;
  IemFlags iem;
  json req;

  std::string x, y, delta, eps;
  std::uint64_t steps = 10, horizon = 0;
  std::vector<std::string> xs, ys, direction, start;
  int h = -1, b = -1, c = -1, sheet = 0;
  std::string polygon = "square", script;
  std::string command;

  auto* iem_cmd = app.add_subcommand("iem", "Interval exchange maps");
  iem_cmd->require_subcommand(1);
  auto* check = iem_cmd->add_subcommand("check", "Decide expansiveness");
  auto* orbit = iem_cmd->add_subcommand("orbit", "Exact forward orbit");
  auto* separate = iem_cmd->add_subcommand("separate", "Separation test for two points");
  for (auto* s : {check, orbit, separate}) {
    common(s, opt);
    iem_flags(s, iem);
  }
  orbit->add_option("--x", x, "Start point");
  orbit->add_option("--steps", steps, "Iterates")->check(CLI::PositiveNumber);
  separate->add_option("--x", x, "First point");
  separate->add_option("--y", y, "Second point");
  separate->add_option("--delta", delta, "Separation threshold");

  auto* suspend = app.add_subcommand("suspend", "Suspension surface, singularities and verdict");
  common(suspend, opt);
  iem_flags(suspend, iem);

  auto* surface = app.add_subcommand("surface", "Surface admissibility");
  surface->require_subcommand(1);
  auto* admit = surface->add_subcommand("admit", "Does S^{h,b,c} carry an expansive flow");
  admit->set_help_flag("--help", "Print this help message and exit");
  common(admit, opt);
  admit->add_option("--h", h, "Handles");
  admit->add_option("--b", b, "Boundary components");
  admit->add_option("--c", c, "Cross-caps");

  auto* surgery = app.add_subcommand("surgery", "Flow assemblies");
  surgery->require_subcommand(1);
  auto* exec = surgery->add_subcommand("exec", "Run a surgery script");
  common(exec, opt);
  exec->add_option("script", script, "Script file (JSON)");

  auto* billiard = app.add_subcommand("billiard", "Rational polygonal billiards");
  billiard->require_subcommand(1);
  auto* unfold = billiard->add_subcommand("unfold", "Unfolded surface");
  auto* trace = billiard->add_subcommand("trace", "Exact trajectory");
  auto* verdict = billiard->add_subcommand("verdict", "Decide expansiveness in a direction");
  for (auto* s : {unfold, trace, verdict}) {
    common(s, opt);
    s->add_option("--polygon", polygon, "square or genus2_triangle");
  }
  for (auto* s : {trace, verdict}) s->add_option("--direction", direction, "vx,vy")->delimiter(',')->expected(2);
  trace->add_option("--start", start, "x,y")->delimiter(',')->expected(2);
  trace->add_option("--sheet", sheet, "Starting sheet");

  auto* flow = app.add_subcommand("flow", "Suspension flows with roof 1");
  flow->require_subcommand(1);
  auto* pairtest = flow->add_subcommand("pairtest", "Pair test under the canonical pairing");
  common(pairtest, opt);
  iem_flags(pairtest, iem);
  pairtest->add_option("--x", xs, "base,height")->delimiter(',')->expected(2);
  pairtest->add_option("--y", ys, "base,height")->delimiter(',')->expected(2);
  pairtest->add_option("--delta", delta, "Separation threshold");
  pairtest->add_option("--eps", eps, "Shift bound; enables the k* test");
  pairtest->add_option("--horizon", horizon, "Section returns")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  auto put = [&](const char* key, const std::string& v) {
    if (!v.empty()) req[key] = v;
  };
  if (*check || *orbit || *separate || *suspend || *pairtest) req["iem"] = iem_request(iem);
  if (*check) command = "iem.check";
  if (*orbit) {
    command = "iem.orbit";
    put("x", x);
    req["steps"] = steps;
  }
  if (*separate) {
    command = "iem.separate";
    put("x", x);
    put("y", y);
    put("delta", delta);
  }
  if (*suspend) command = "suspend";
  if (*admit) {
    command = "surface.admit";
    if (h >= 0) req["h"] = h;
    if (b >= 0) req["b"] = b;
    if (c >= 0) req["c"] = c;
  }
  if (*exec) {
    command = "surgery.exec";
    if (opt.input.empty() && opt.inline_json.empty()) {
      if (script.empty()) {
        std::cerr << "error: surgery exec needs a script file\n";
        return 1;
      }
      opt.input = script;
    }
  }
  if (*unfold || *trace || *verdict) {
    req["polygon"] = polygon;
    if (!direction.empty()) req["direction"] = pair_of(direction);
  }
  if (*unfold) command = "billiard.unfold";
  if (*trace) {
    command = "billiard.trace";
    if (!start.empty()) req["start"] = pair_of(start);
    req["sheet"] = sheet;
  }
  if (*verdict) command = "billiard.verdict";
  if (*pairtest) {
    command = "flow.pairtest";
    if (!xs.empty()) req["x"] = {{"base", xs[0]}, {"height", xs[1]}};
    if (!ys.empty()) req["y"] = {{"base", ys[0]}, {"height", ys[1]}};
    put("delta", delta);
    put("eps", eps);
    if (horizon) req["horizon"] = horizon;
  }
  return dispatch(command, req, opt);
}

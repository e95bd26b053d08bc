#include "capi_request.hpp"

#include <cctype>
#include <cstring>
#include <map>
#include <regex>

namespace sflow::capi {

void fail(const std::string& pointer, const std::string& msg) { throw InputError(pointer, msg); }

TextPosition position_of_offset(const std::string& text, std::size_t offset) {
  TextPosition p;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++p.line;
      p.column = 1;
    } else {
      ++p.column;
    }
  }
  return p;
}

namespace {

std::string escape_token(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') out += "~0";
    else if (c == '/') out += "~1";
    else out += c;
  }
  return out;
}

// Records the offset of every value, keyed by pointer. The text is already
// known to be valid JSON.
class Scanner {
 public:
  explicit Scanner(const std::string& t) : t_(t) {}

  void value(const std::string& ptr) {
    skip();
    at_[ptr] = i_;
    if (i_ >= t_.size()) return;
    if (t_[i_] == '{') {
      ++i_;
      skip();
      if (peek() == '}') {
        ++i_;
        return;
      }
      for (;;) {
        skip();
        const std::string key = string();
        skip();
        ++i_;  // ':'
        value(ptr + "/" + escape_token(key));
        skip();
        if (peek() == ',') {
          ++i_;
          continue;
        }
        ++i_;  // '}'
        return;
      }
    }
    if (t_[i_] == '[') {
      ++i_;
      skip();
      if (peek() == ']') {
        ++i_;
        return;
      }
      for (std::size_t k = 0;; ++k) {
        value(ptr + "/" + std::to_string(k));
        skip();
        if (peek() == ',') {
          ++i_;
          continue;
        }
        ++i_;  // ']'
        return;
      }
    }
    if (t_[i_] == '"') {
      string();
      return;
    }
    while (i_ < t_.size() && !std::strchr(",]} \t\r\n", t_[i_])) ++i_;
  }

  const std::map<std::string, std::size_t>& offsets() const { return at_; }

 private:
  char peek() const { return i_ < t_.size() ? t_[i_] : '\0'; }
  void skip() {
    while (i_ < t_.size() && std::isspace(static_cast<unsigned char>(t_[i_]))) ++i_;
  }
  // Raw key text; escapes other than \" and \\ are kept as written.
  std::string string() {
    std::string out;
    ++i_;
    while (i_ < t_.size() && t_[i_] != '"') {
      if (t_[i_] == '\\' && i_ + 1 < t_.size()) {
        ++i_;
        if (t_[i_] != '"' && t_[i_] != '\\') out += '\\';
      }
      out += t_[i_++];
    }
    ++i_;
    return out;
  }

  const std::string& t_;
  std::size_t i_ = 0;
  std::map<std::string, std::size_t> at_;
};

}  // namespace

TextPosition locate(const std::string& text, const std::string& pointer) {
  Scanner s(text);
  s.value("");
  std::string p = pointer;
  for (;;) {
    auto it = s.offsets().find(p);
    if (it != s.offsets().end()) return position_of_offset(text, it->second);
    if (p.empty()) return {};
    p.erase(p.rfind('/'));
  }
}

bool View::has(const std::string& key) const { return j_->is_object() && j_->contains(key); }

View View::at(const std::string& key) const {
  if (!j_->is_object()) fail(ptr_, "expected an object");
  auto it = j_->find(key);
  if (it == j_->end()) fail(ptr_, "missing member \"" + key + "\"");
  return View(*it, ptr_ + "/" + escape_token(key));
}

std::optional<View> View::find(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return at(key);
}

View View::at(std::size_t i) const {
  if (!j_->is_array()) fail(ptr_, "expected an array");
  if (i >= j_->size()) fail(ptr_, "array too short");
  return View((*j_)[i], ptr_ + "/" + std::to_string(i));
}

std::size_t View::size() const {
  if (!j_->is_array()) fail(ptr_, "expected an array");
  return j_->size();
}

std::string View::str() const {
  if (!j_->is_string()) fail(ptr_, "expected a string");
  return j_->get<std::string>();
}

std::int64_t View::integer() const {
  if (!j_->is_number_integer()) fail(ptr_, "expected an integer");
  return j_->get<std::int64_t>();
}

std::int64_t View::integer(std::int64_t lo, std::int64_t hi) const {
  const auto v = integer();
  if (v < lo || v > hi) fail(ptr_, "integer " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " +
                                       std::to_string(hi) + "]");
  return v;
}

bool View::boolean() const {
  if (!j_->is_boolean()) fail(ptr_, "expected true or false");
  return j_->get<bool>();
}

QuadExtScalar scalar(const View& v, std::int64_t d) {
  const json& j = v.raw();
  if (j.is_number_integer()) return QuadExtScalar::integer(j.get<long>(), d);
  if (j.is_number_float()) fail(v.pointer(), "floating-point numbers are not exact; write \"p/q\"");
  if (!j.is_string()) fail(v.pointer(), "expected a number or a \"p/q+r/s*sqrt(d)\" string");
  try {
    return QuadExtScalar::parse(j.get<std::string>(), d);
  } catch (const std::exception& e) {
    fail(v.pointer(), e.what());
  }
}

std::int64_t field_of(const View& obj, const View& values) {
  if (auto f = obj.find("field")) return f->integer(2, 1000000);
  static const std::regex sqrt_re(R"(sqrt\(\s*(\d+)\s*\))");
  const json& arr = values.raw();
  if (arr.is_array()) {
    for (const auto& x : arr) {
      std::smatch m;
      if (x.is_string()) {
        const std::string s = x.get<std::string>();
        if (std::regex_search(s, m, sqrt_re)) return std::stoll(m[1]);
      }
    }
  }
  return QuadExtScalar::kDefaultField;
}

IntervalExchange iem(const View& v) {
  const View lv = v.at("lengths"), pv = v.at("perm");
  const std::int64_t d = field_of(v, lv);
  std::vector<QuadExtScalar> lengths;
  for (std::size_t i = 0; i < lv.size(); ++i) lengths.push_back(scalar(lv.at(i), d));
  std::vector<int> perm;
  for (std::size_t i = 0; i < pv.size(); ++i) perm.push_back(static_cast<int>(pv.at(i).integer(1, 1000000)));
  try {
    return IntervalExchange(std::move(lengths), std::move(perm));
  } catch (const std::exception& e) {
    fail(v.pointer(), e.what());
  }
}

std::uint64_t budget(const View& req, const std::string& key, std::uint64_t dflt) {
  if (auto b = req.find(key)) return static_cast<std::uint64_t>(b->integer(1, std::int64_t{1} << 40));
  return dflt;
}

RationalPolygon polygon(const View& v) {
  RationalPolygon p;
  if (v.is_string()) {
    const auto name = v.str();
    if (name == "square") return unit_square();
    if (name == "genus2_triangle") return genus2_triangle();
    fail(v.pointer(), "unknown polygon \"" + name + "\" (square, genus2_triangle)");
  }
  const View av = v.at("angles");
  for (std::size_t i = 0; i < av.size(); ++i) {
    const View a = av.at(i);
    if (a.size() != 2) fail(a.pointer(), "angle is [m, n] for m*pi/n");
    p.angles.push_back({static_cast<int>(a.at(0).integer(1, 1000)), static_cast<int>(a.at(1).integer(1, 1000))});
  }
  if (auto vv = v.find("vertices")) {
    std::vector<json> coords;
    for (std::size_t i = 0; i < vv->size(); ++i) {
      for (const auto& c : vv->at(i).raw()) coords.push_back(c);
    }
    const std::int64_t d = field_of(v, View(json(coords), vv->pointer()));
    p.field_d = d;
    for (std::size_t i = 0; i < vv->size(); ++i) p.vertices.push_back(vec2(vv->at(i), d));
    if (p.vertices.size() != p.angles.size()) fail(vv->pointer(), "one vertex per angle is required");
  }
  try {
    unfold(p);
  } catch (const std::exception& e) {
    fail(v.pointer(), e.what());
  }
  return p;
}

Vec2 vec2(const View& v, std::int64_t d) {
  if (v.size() != 2) fail(v.pointer(), "expected [x, y]");
  return {scalar(v.at(0), d), scalar(v.at(1), d)};
}

SuspensionPoint suspension_point(const View& v, std::int64_t d) {
  return {scalar(v.at("base"), d), scalar(v.at("height"), d)};
}

}  // namespace sflow::capi

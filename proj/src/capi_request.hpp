#pragma once

// Reading JSON requests with errors that point back into the source text.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "sflow/billiard.hpp"
#include "sflow/iem.hpp"
#include "sflow/metricflow.hpp"

namespace sflow::capi {

using json = nlohmann::json;

/// Validation failure at a JSON pointer into the request.
class InputError : public std::runtime_error {
 public:
  InputError(std::string pointer, const std::string& msg) : std::runtime_error(msg), pointer(std::move(pointer)) {}
  std::string pointer;
};

[[noreturn]] void fail(const std::string& pointer, const std::string& msg);

struct TextPosition {
  int line = 1, column = 1;
};

TextPosition position_of_offset(const std::string& text, std::size_t offset);
/// Start of the value at `pointer` in `text`; the deepest existing prefix
/// when the pointer names a missing member.
TextPosition locate(const std::string& text, const std::string& pointer);

/// A JSON value with its pointer.
class View {
 public:
  View(const json& j, std::string pointer) : j_(&j), ptr_(std::move(pointer)) {}

  const json& raw() const { return *j_; }
  const std::string& pointer() const { return ptr_; }

  bool has(const std::string& key) const;
  View at(const std::string& key) const;
  std::optional<View> find(const std::string& key) const;
  View at(std::size_t i) const;
  std::size_t size() const;  // arrays only

  bool is_string() const { return j_->is_string(); }
  std::string str() const;
  std::int64_t integer() const;
  std::int64_t integer(std::int64_t lo, std::int64_t hi) const;
  bool boolean() const;

 private:
  const json* j_;
  std::string ptr_;
};

/// Exact number: an integer or a "p/q" / "p/q+r/s*sqrt(d)" string.
QuadExtScalar scalar(const View& v, std::int64_t d);
/// Field named by "field", else by the first sqrt(d) among `values`, else 2.
std::int64_t field_of(const View& obj, const View& values);

/// {"lengths": [...], "perm": [...], "field": d}
IntervalExchange iem(const View& v);
/// Positive integer member, or the default.
std::uint64_t budget(const View& req, const std::string& key = "budget", std::uint64_t dflt = kDefaultBudget);

/// "square", "genus2_triangle", or {"angles": [[m, n], ...], "vertices": [[x, y], ...], "field": d}.
RationalPolygon polygon(const View& v);
Vec2 vec2(const View& v, std::int64_t d);
SuspensionPoint suspension_point(const View& v, std::int64_t d);

}  // namespace sflow::capi

#pragma once

#include <map>
#include <string>

#include "capi_request.hpp"
#include "sflow/sflow.h"
#include "sflow/surgery.hpp"

namespace sflow::capi {

inline constexpr const char* kRequestSchema = "sflow.request/1";

struct Outcome {
  json doc;
  sflow_status status = SFLOW_OK;
};

json certificate_json(const Certificate& c);
sflow_status status_of(Verdict v);
json scalar_json(const QuadExtScalar& x);
/// twice/2 as "p/q".
std::string half_string(int twice);

/// Assembly under construction by a surgery script, with named half-edges.
class SurgerySession {
 public:
  /// One script operation: a named high-level op or a transcript step.
  void step(const View& op);
  Outcome describe() const;
  const FlowAssembly& assembly() const { return a_; }

 private:
  int ref(const View& v) const;
  void bind(const View& op, const std::string& key, int value);

  FlowAssembly a_;
  std::map<std::string, int> names_;
};

Outcome surgery_exec(const View& req);

}  // namespace sflow::capi

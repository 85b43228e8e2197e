#include "brepchain/io.hpp"

#include <json.hpp>

#include <cstdio>

namespace brepchain {

std::vector<std::pair<std::string, double>> report_entries(const EvaluationReport& r) {
  std::vector<std::pair<std::string, double>> e;
  auto fscore = [&](const std::string& group, const FScore& f) {
    e.emplace_back(group + "_precision", f.precision);
    e.emplace_back(group + "_recall", f.recall);
    e.emplace_back(group + "_fscore", f.f);
  };
  fscore("corner", r.corner);
  fscore("curve", r.curve);
  fscore("patch", r.patch);
  auto optional = [&](const char* key, const std::optional<double>& v) {
    if (v) e.emplace_back(key, *v);
  };
  optional("curve_type_accuracy", r.types.curve_type);
  optional("curve_openness_accuracy", r.types.curve_openness);
  optional("patch_type_accuracy", r.types.patch_type);
  optional("patch_closedness_accuracy", r.types.patch_closedness);
  e.emplace_back("topology_error_fe", r.topology_error_fe);
  e.emplace_back("topology_error_ev", r.topology_error_ev);
  e.emplace_back("topology_error_fv", r.topology_error_fv);
  e.emplace_back("topology_error_ff", r.topology_error_ff);
  e.emplace_back("inconsistency_manifold", r.inconsistency.manifold);
  e.emplace_back("inconsistency_endpoint", r.inconsistency.endpoint);
  e.emplace_back("inconsistency_closure", r.inconsistency.closure);
  e.emplace_back("patch_residual", r.patch_residual);
  e.emplace_back("patch_recall", r.recall);
  optional("p_coverage", r.p_coverage);
  e.emplace_back("validity_ratio", r.validity_ratio);
  return e;
}

std::string report_json(const EvaluationReport& r, const Metadata& extra) {
  nlohmann::ordered_json j;
  for (const auto& [k, v] : report_entries(r)) j[k] = v;
  for (const auto& [k, v] : extra) j[k] = v;
  return j.dump(2) + "\n";
}

std::string report_text(const EvaluationReport& r) {
  std::string out;
  char buf[64];
  for (const auto& [k, v] : report_entries(r)) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += k + " = " + buf + "\n";
  }
  return out;
}

}  // namespace brepchain

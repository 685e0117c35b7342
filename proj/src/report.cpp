#include "awb/report.hpp"

#include <cmath>

#include "awb/error.hpp"
#include "json.hpp"

namespace awb {

using nlohmann::json;

std::string report_to_json(const DeadlockReport& r, const std::string& command, bool stable) {
  json j;
  j["command"] = command;
  j["system"] = r.system;
  j["algorithm"] = r.algorithm;
  j["mode"] = r.mode;
  j["explored"] = r.explored;
  j["reachable"] = r.reachable ? json(*r.reachable) : json(nullptr);
  json dl = json::array();
  for (const auto& names : r.deadlock_names) {
    json d = json::object();
    for (std::size_t c = 0; c < names.size(); ++c) d[r.component_names[c]] = names[c];
    dl.push_back(std::move(d));
  }
  j["deadlocks"] = std::move(dl);
  j["witnesses"] = r.witness_names ? json(*r.witness_names) : json(nullptr);
  j["elapsed_ms"] = stable ? 0 : static_cast<long long>(std::llround(r.elapsed_ms));
  j["complete"] = r.complete;
  return j.dump(2) + "\n";
}

std::vector<std::map<std::string, std::string>> report_deadlocks(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw InputError(std::string("report is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("deadlocks") || !j["deadlocks"].is_array())
    throw InputError("report has no 'deadlocks' array");
  std::vector<std::map<std::string, std::string>> out;
  for (const auto& d : j["deadlocks"]) {
    if (!d.is_object()) throw InputError("report deadlock entry is not an object");
    std::map<std::string, std::string> m;
    for (const auto& [k, v] : d.items()) {
      if (!v.is_string()) throw InputError("report deadlock entry '" + k + "' is not a string");
      m[k] = v.get<std::string>();
    }
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace awb

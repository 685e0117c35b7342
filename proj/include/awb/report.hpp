#pragma once

#include <map>
#include <string>
#include <vector>

#include "awb/checker.hpp"

namespace awb {

/// JSON text of a report, keys in canonical (sorted) order. `stable` zeroes
/// the wall-clock field so that output depends on the input only.
std::string report_to_json(const DeadlockReport& r, const std::string& command, bool stable = false);

/// Deadlocks of a JSON report, each as component name -> local state name.
std::vector<std::map<std::string, std::string>> report_deadlocks(const std::string& json_text);

}  // namespace awb

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "qbcast/protocols.hpp"

namespace qbcast {

struct ScenarioConfig {
  std::string scenario;
  Mode mode = Mode::Enumerate;
  std::uint64_t seed = 0;
  std::size_t trials = 1;
  nlohmann::json params = nlohmann::json::object();
};

ScenarioConfig parse_config(const nlohmann::json& j);
nlohmann::json config_to_json(const ScenarioConfig& c);

struct ScenarioInfo {
  std::string name;
  std::string description;
  nlohmann::json param_schema;  // parameter name -> short description/default
};
const std::vector<ScenarioInfo>& list_scenarios();

struct Report {
  nlohmann::json summary;
  std::vector<nlohmann::json> records;
  bool passed = false;

  /// Line-delimited records followed by the summary object.
  std::string to_jsonl() const;
};

/// Dispatch a named scenario; throws std::invalid_argument on unknown names
/// or parameter validation failures.
Report run_scenario(const ScenarioConfig& config, bool verbose_transcript = false);

}  // namespace qbcast

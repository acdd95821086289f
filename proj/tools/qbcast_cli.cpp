#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qbcast/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"qbcast: entanglement-assisted broadcasting protocol simulator"};

  std::string scenario, config_path, mode = "enumerate";
  std::uint64_t seed = 0;
  std::size_t trials = 1;
  bool json_out = false, verbose_transcript = false, list = false;

  app.add_option("scenario", scenario, "Scenario name (see --list)");
  app.add_option("--config", config_path, "Config file (JSON) with scenario parameters");
  app.add_option("--seed", seed, "Master seed");
  app.add_option("--trials", trials, "Trials in sample mode")->check(CLI::PositiveNumber);
  app.add_option("--mode", mode, "enumerate|sample")
      ->check(CLI::IsMember({"enumerate", "sample"}));
  app.add_flag("--json", json_out, "Emit the line-delimited JSON report");
  app.add_flag("--verbose-transcript", verbose_transcript,
               "Include per-branch event transcripts");
  app.add_flag("--list", list, "List scenarios and parameter schemas");

  CLI11_PARSE(app, argc, argv);

  if (list) {
    for (const auto& s : qbcast::list_scenarios()) {
      std::cout << s.name << "\n  " << s.description << "\n";
      for (const auto& [k, v] : s.param_schema.items())
        std::cout << "    " << k << ": " << v.get<std::string>() << "\n";
    }
    return 0;
  }

  try {
    qbcast::ScenarioConfig cfg;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw std::invalid_argument("cannot open config file: " + config_path);
      cfg = qbcast::parse_config(nlohmann::json::parse(in));
    }
    if (!scenario.empty()) cfg.scenario = scenario;
    if (cfg.scenario.empty())
      throw std::invalid_argument("a scenario name is required (positional or in --config)");
    // Command-line flags override config-file values when given explicitly.
    if (app.count("--mode") || config_path.empty())
      cfg.mode = mode == "sample" ? qbcast::Mode::Sample : qbcast::Mode::Enumerate;
    if (app.count("--seed") || config_path.empty()) cfg.seed = seed;
    if (app.count("--trials") || config_path.empty()) cfg.trials = trials;

    qbcast::Report rep = qbcast::run_scenario(cfg, verbose_transcript);
    if (json_out) {
      std::cout << rep.to_jsonl();
    } else {
      const auto& s = rep.summary;
      std::cout << "scenario: " << s.at("scenario").get<std::string>()
                << "  mode: " << s.at("mode").get<std::string>()
                << "  seed: " << s.at("seed").get<std::uint64_t>() << "\n";
      if (s.contains("branches")) std::cout << "branches: " << s.at("branches") << "\n";
      if (s.contains("trials_run")) std::cout << "trials: " << s.at("trials_run") << "\n";
      if (s.contains("verdicts"))
        for (const auto& [name, v] : s.at("verdicts").items())
          std::cout << (v.at("pass").get<bool>() ? "  pass  " : "  FAIL  ") << name
                    << " (value " << v.at("value").dump() << ", " << v.at("op").get<std::string>()
                    << " " << v.at("threshold").dump() << ")\n";
      std::cout << (rep.passed ? "PASS" : "FAIL") << "\n";
    }
    return rep.passed ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

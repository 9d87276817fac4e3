#pragma once

#include <filesystem>

#include <json.hpp>

#include "fg/evaluate.hpp"
#include "fg/expert.hpp"
#include "fg/policy.hpp"
#include "fg/sim.hpp"

// One JSON config file covering the whole pipeline. Every field has a
// default; a config file overlays the defaults and command-line flags win
// over both. Unknown keys are rejected so typos fail loudly.

namespace fg {

struct AppConfig {
  SimConfig sim;          // collection-time stepping (5 Hz default)
  double eval_dt_s = 0.25;  // evaluation stepping (4 Hz)
  ControllerGains gains;
  DemoConfig demo;
  PolicyConfig policy;
  EvalConfig eval;
  int catalog_objects = 30;  // training catalog size
  double train_ratio = 0.9;  // train/validation episode split
  uint64_t seed = 1;
};

AppConfig app_config_from_json(const nlohmann::json& j);
nlohmann::json app_config_to_json(const AppConfig& cfg);

// Defaults when path is empty; otherwise parse + validate the file.
AppConfig load_app_config(const std::filesystem::path& path);

}  // namespace fg

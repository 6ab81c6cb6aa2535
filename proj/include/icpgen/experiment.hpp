#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "icpgen/trainer.hpp"

namespace icpgen {

// A training configuration plus everything a run directory needs.
struct ExperimentConfig {
  std::string name = "custom";
  TrainConfig train;
  std::string output_dir;               // empty: runs/<name>
  std::size_t checkpoint_interval = 0;  // 0: final checkpoint only
  std::size_t eval_sample_size = 500;
  bool record_timing = false;
  // Discrete conditioning values used by "each:k" sampling.
  std::vector<double> condition_values;
};

struct PresetInfo {
  std::string name;
  std::string description;
};

const std::vector<PresetInfo>& preset_catalog();
ExperimentConfig preset(const std::string& name);

// Keys may start from a "preset" and override any field. Unknown keys and
// wrongly typed values raise ConfigError naming the field.
ExperimentConfig experiment_from_json(const nlohmann::json& doc);
nlohmann::json experiment_to_json(const ExperimentConfig& config);

ExperimentConfig load_experiment(const std::string& path);

}  // namespace icpgen

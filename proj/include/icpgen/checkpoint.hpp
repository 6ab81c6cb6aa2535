#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "icpgen/nn.hpp"

namespace icpgen {

// One JSON document: layer_dims, row-major weights, biases, activation
// tags, Adam state, seed and epoch. `experiment` carries the resolved run
// configuration so a checkpoint alone is enough to sample or evaluate.
struct Checkpoint {
  nn::DenseNetwork net;
  nn::AdamState adam;
  std::uint64_t seed = 0;
  std::uint64_t epoch = 0;
  nlohmann::json experiment = nlohmann::json::object();
};

nlohmann::json checkpoint_to_json(const Checkpoint& checkpoint);
// Throws FormatError on missing fields or inconsistent shapes.
Checkpoint checkpoint_from_json(const nlohmann::json& doc);

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace icpgen

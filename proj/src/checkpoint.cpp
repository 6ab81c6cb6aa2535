#include "icpgen/checkpoint.hpp"

#include <fstream>

#include "icpgen/errors.hpp"

namespace icpgen {

using nlohmann::json;

json checkpoint_to_json(const Checkpoint& ckpt) {
  json layers = json::array();
  for (std::size_t l = 0; l < ckpt.net.layer_count(); ++l) {
    const auto& layer = ckpt.net.layer(l);
    layers.push_back({{"weights", layer.weights.storage()}, {"biases", layer.biases}});
  }
  const auto& adam = ckpt.adam;
  return {
      {"format", "icpgen-checkpoint-v1"},
      {"layer_dims", ckpt.net.layer_dims()},
      {"hidden_activation", nn::kHiddenActivation},
      {"output_activation", nn::kOutputActivation},
      {"layers", layers},
      {"adam",
       {{"learning_rate", adam.config.learning_rate},
        {"beta1", adam.config.beta1},
        {"beta2", adam.config.beta2},
        {"epsilon", adam.config.epsilon},
        {"step_count", adam.step_count},
        {"first_moment", adam.first_moment},
        {"second_moment", adam.second_moment}}},
      {"seed", ckpt.seed},
      {"epoch", ckpt.epoch},
      {"experiment", ckpt.experiment},
  };
}

Checkpoint checkpoint_from_json(const json& doc) {
  try {
    if (doc.at("hidden_activation").get<std::string>() != nn::kHiddenActivation ||
        doc.at("output_activation").get<std::string>() != nn::kOutputActivation) {
      throw FormatError("checkpoint: unsupported activation tags");
    }
    Checkpoint ckpt;
    ckpt.net = nn::DenseNetwork(doc.at("layer_dims").get<std::vector<std::size_t>>());
    const auto& layers = doc.at("layers");
    if (layers.size() != ckpt.net.layer_count()) {
      throw FormatError("checkpoint: layer count does not match layer_dims");
    }
    for (std::size_t l = 0; l < ckpt.net.layer_count(); ++l) {
      auto& layer = ckpt.net.layer(l);
      auto weights = layers[l].at("weights").get<std::vector<double>>();
      auto biases = layers[l].at("biases").get<std::vector<double>>();
      if (weights.size() != layer.weights.size() || biases.size() != layer.biases.size()) {
        throw FormatError("checkpoint: layer " + std::to_string(l) + " has the wrong shape");
      }
      layer.weights.storage() = std::move(weights);
      layer.biases = std::move(biases);
    }
    const auto& adam = doc.at("adam");
    ckpt.adam.config.learning_rate = adam.at("learning_rate").get<double>();
    ckpt.adam.config.beta1 = adam.at("beta1").get<double>();
    ckpt.adam.config.beta2 = adam.at("beta2").get<double>();
    ckpt.adam.config.epsilon = adam.at("epsilon").get<double>();
    ckpt.adam.step_count = adam.at("step_count").get<std::uint64_t>();
    ckpt.adam.first_moment = adam.at("first_moment").get<std::vector<double>>();
    ckpt.adam.second_moment = adam.at("second_moment").get<std::vector<double>>();
    if (ckpt.adam.first_moment.size() != ckpt.net.parameter_count() ||
        ckpt.adam.second_moment.size() != ckpt.net.parameter_count()) {
      throw FormatError("checkpoint: Adam moments do not match the parameter count");
    }
    ckpt.seed = doc.at("seed").get<std::uint64_t>();
    ckpt.epoch = doc.at("epoch").get<std::uint64_t>();
    if (doc.contains("experiment")) ckpt.experiment = doc.at("experiment");
    return ckpt;
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write checkpoint '" + path + "'");
  out << checkpoint_to_json(ckpt).dump() << '\n';
  if (!out) throw FormatError("failed writing checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open checkpoint '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw FormatError("checkpoint '" + path + "': " + e.what());
  }
  return checkpoint_from_json(doc);
}

}  // namespace icpgen

#include "icpgen/experiment.hpp"

#include <fstream>
#include <set>

#include "icpgen/errors.hpp"

namespace icpgen {

using nlohmann::json;

namespace {

ExperimentConfig low_dim_base(const std::string& name) {
  ExperimentConfig cfg;
  cfg.name = name;
  auto& t = cfg.train;
  t.origin.dim = 6;
  t.matching_batch = 500;
  t.supervised_minibatch = 100;
  t.hidden_layers = {50, 50, 50};
  t.metric = MetricSpec::squared_euclidean();
  return cfg;
}

void make_conditioned(ExperimentConfig& cfg) {
  cfg.train.conditioned = true;
  cfg.train.z_dim = 1;
  cfg.train.metric = MetricSpec::conditioned(1);
}

ExperimentConfig mnist_base(const std::string& name) {
  ExperimentConfig cfg;
  cfg.name = name;
  auto& t = cfg.train;
  t.origin.dim = 20;
  t.hidden_layers = {300, 300, 300};
  t.target.kind = TargetKind::mnist;
  t.target.images_path = "data/mnist/train-images-idx3-ubyte";
  t.target.labels_path = "data/mnist/train-labels-idx1-ubyte";
  t.matching_batch = 10000;
  t.supervised_minibatch = 100;
  t.epochs = 250;
  // At 1e-3 the label pass-through is still settling after 20 epochs.
  t.adam.learning_rate = 2e-3;
  make_conditioned(cfg);
  cfg.eval_sample_size = 1000;
  for (int d = 0; d < 10; ++d) cfg.condition_values.push_back(d);
  return cfg;
}

const std::vector<PresetInfo> kCatalog = {
    {"gmm3", "three-Gaussian mixture from 6-D mixed noise, batch 500 / minibatch 100"},
    {"gmm3-conditioned", "three-Gaussian mixture conditioned on the x coordinate"},
    {"sinusoid-conditioned", "noisy sinusoid conditioned on x in [1,5]"},
    {"sinusoid-mixed2d", "noisy sinusoid from a 2-D (one discrete, one continuous) origin"},
    {"swissroll", "2-D swiss roll from a 2-D mixed origin"},
    {"mnist-conditioned", "MNIST conditioned on the digit label, batch 10000 / minibatch 100"},
    {"mnist-smallbatch", "MNIST conditioned, matching batch and minibatch both 100"},
    {"multinoulli", "5-category Multinoulli with softmax cross-entropy distance"},
};

// Walks a JSON object, remembering which keys were read so leftovers can be
// reported as unknown fields.
class Fields {
 public:
  Fields(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError("field '" + display() + "': expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key);
  }

  template <class T>
  void read(const std::string& key, T& out) {
    if (!has(key)) return;
    try {
      out = obj_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("field '" + child(key) + "': wrong type");
    }
  }

  void read_count(const std::string& key, std::size_t& out) {
    if (!has(key)) return;
    const auto& v = obj_.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      throw ConfigError("field '" + child(key) + "': expected a nonnegative integer");
    }
    out = v.get<std::size_t>();
  }

  const json& at(const std::string& key) const { return obj_.at(key); }
  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void reject_unknown() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.count(key)) throw ConfigError("field '" + child(key) + "': unknown field");
    }
  }

 private:
  std::string display() const { return path_.empty() ? "<root>" : path_; }

  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_target(const json& doc, TargetSpec& target) {
  Fields f(doc, "target");
  if (f.has("kind")) {
    std::string kind;
    f.read("kind", kind);
    target.kind = target_kind_from_tag(kind);
  }
  if (f.has("means")) {
    std::vector<std::vector<double>> means;
    f.read("means", means);
    if (means.size() != 3) throw ConfigError("field 'target.means': need three 2-D means");
    for (std::size_t k = 0; k < 3; ++k) {
      if (means[k].size() != 2) throw ConfigError("field 'target.means': need three 2-D means");
      target.gmm3.means[k] = {means[k][0], means[k][1]};
    }
  }
  if (f.has("sigmas")) {
    std::vector<double> sigmas;
    f.read("sigmas", sigmas);
    if (sigmas.size() != 3) throw ConfigError("field 'target.sigmas': need three values");
    std::copy(sigmas.begin(), sigmas.end(), target.gmm3.sigmas.begin());
  }
  f.read("x_low", target.sinusoid.x_low);
  f.read("x_high", target.sinusoid.x_high);
  if (f.has("noise_sigma")) {
    double sigma = 0.0;
    f.read("noise_sigma", sigma);
    target.sinusoid.noise_sigma = sigma;
    target.swiss_roll.noise_sigma = sigma;
  }
  f.read("t_min", target.swiss_roll.t_min);
  f.read("t_max", target.swiss_roll.t_max);
  f.read("scale", target.swiss_roll.scale);
  f.read("probabilities", target.probabilities);
  f.read("images_path", target.images_path);
  f.read("labels_path", target.labels_path);
  f.read("normalize_label", target.normalize_label);
  f.read_count("limit", target.mnist_limit);
  f.reject_unknown();
  if (target.kind == TargetKind::multinoulli) validate_probabilities(target.probabilities);
}

json target_to_json(const TargetSpec& t) {
  json j = {{"kind", t.tag()}};
  switch (t.kind) {
    case TargetKind::gmm3: {
      json means = json::array();
      for (const auto& m : t.gmm3.means) means.push_back({m[0], m[1]});
      j["means"] = means;
      j["sigmas"] = t.gmm3.sigmas;
      break;
    }
    case TargetKind::noisy_sinusoid:
      j["x_low"] = t.sinusoid.x_low;
      j["x_high"] = t.sinusoid.x_high;
      j["noise_sigma"] = t.sinusoid.noise_sigma;
      break;
    case TargetKind::swiss_roll:
      j["t_min"] = t.swiss_roll.t_min;
      j["t_max"] = t.swiss_roll.t_max;
      j["scale"] = t.swiss_roll.scale;
      j["noise_sigma"] = t.swiss_roll.noise_sigma;
      break;
    case TargetKind::multinoulli: j["probabilities"] = t.probabilities; break;
    case TargetKind::mnist:
      j["images_path"] = t.images_path;
      j["labels_path"] = t.labels_path;
      j["normalize_label"] = t.normalize_label;
      j["limit"] = t.mnist_limit;
      break;
  }
  return j;
}

}  // namespace

const std::vector<PresetInfo>& preset_catalog() { return kCatalog; }

ExperimentConfig preset(const std::string& name) {
  if (name == "gmm3") {
    auto cfg = low_dim_base(name);
    cfg.train.target.kind = TargetKind::gmm3;
    cfg.train.epochs = 50;
    cfg.train.emd_sample_size = 200;
    return cfg;
  }
  if (name == "gmm3-conditioned") {
    auto cfg = low_dim_base(name);
    cfg.train.target.kind = TargetKind::gmm3;
    cfg.train.epochs = 100;
    make_conditioned(cfg);
    return cfg;
  }
  if (name == "sinusoid-conditioned") {
    auto cfg = low_dim_base(name);
    cfg.train.target.kind = TargetKind::noisy_sinusoid;
    cfg.train.epochs = 100;
    make_conditioned(cfg);
    return cfg;
  }
  if (name == "sinusoid-mixed2d") {
    auto cfg = low_dim_base(name);
    cfg.train.target.kind = TargetKind::noisy_sinusoid;
    cfg.train.origin.dim = 2;
    cfg.train.epochs = 100;
    cfg.train.emd_sample_size = 200;
    return cfg;
  }
  if (name == "swissroll") {
    auto cfg = low_dim_base(name);
    cfg.train.target.kind = TargetKind::swiss_roll;
    cfg.train.origin.dim = 2;
    cfg.train.epochs = 100;
    cfg.train.emd_sample_size = 200;
    return cfg;
  }
  if (name == "mnist-conditioned") return mnist_base(name);
  if (name == "mnist-smallbatch") {
    auto cfg = mnist_base(name);
    cfg.train.matching_batch = 100;
    cfg.train.supervised_minibatch = 100;
    return cfg;
  }
  if (name == "multinoulli") {
    auto cfg = low_dim_base(name);
    cfg.train.origin.dim = 20;
    cfg.train.target.kind = TargetKind::multinoulli;
    cfg.train.target.probabilities = {0.1, 0.35, 0.05, 0.2, 0.3};
    cfg.train.metric = MetricSpec::softmax_cross_entropy();
    // softmax - onehot already lies in [-1, 1]. Clipping it at 0.1 breaks
    // its zero sum and the logits drift together until the net saturates.
    cfg.train.clip_bound = 1.0;
    cfg.train.epochs = 200;
    cfg.train.pmf_sample_size = 1000;
    cfg.eval_sample_size = 1000;
    return cfg;
  }
  throw ConfigError("unknown preset '" + name + "'");
}

ExperimentConfig experiment_from_json(const json& doc) {
  Fields root(doc, "");
  ExperimentConfig cfg;
  if (root.has("preset")) {
    std::string name;
    root.read("preset", name);
    cfg = preset(name);
  }
  root.read("name", cfg.name);
  auto& t = cfg.train;

  if (root.has("variant")) {
    Fields v(root.at("variant"), "variant");
    if (v.has("matching")) {
      std::string m;
      v.read("matching", m);
      if (m == "greedy") t.matching = MatchingVariant::greedy;
      else if (m == "alternating") t.matching = MatchingVariant::alternating;
      else throw ConfigError("field 'variant.matching': expected 'greedy' or 'alternating'");
    }
    v.read("conditioned", t.conditioned);
    v.reject_unknown();
  }
  root.read_count("z_dim", t.z_dim);
  root.read_count("matching_batch", t.matching_batch);
  root.read_count("supervised_minibatch", t.supervised_minibatch);
  root.read_count("supervised_passes_per_epoch", t.supervised_passes_per_epoch);
  root.read_count("epochs", t.epochs);
  if (root.has("metric")) {
    std::string tag;
    root.read("metric", tag);
    try {
      t.metric.kind = metric_kind_from_tag(tag);
    } catch (const ConfigError&) {
      throw ConfigError("field 'metric': unknown metric '" + tag + "'");
    }
  }
  t.metric.z_dim = t.metric.kind == MetricKind::conditioned_squared_euclidean ? t.z_dim : 0;
  if (root.has("origin")) {
    Fields o(root.at("origin"), "origin");
    o.read_count("dim", t.origin.dim);
    o.read("bernoulli_p", t.origin.bernoulli_p);
    o.read("uniform_low", t.origin.uniform_low);
    o.read("uniform_high", t.origin.uniform_high);
    o.reject_unknown();
  }
  if (root.has("target")) read_target(root.at("target"), t.target);
  root.read("hidden_layers", t.hidden_layers);
  root.read("clip_bound", t.clip_bound);
  if (root.has("adam")) {
    Fields a(root.at("adam"), "adam");
    a.read("learning_rate", t.adam.learning_rate);
    a.read("beta1", t.adam.beta1);
    a.read("beta2", t.adam.beta2);
    a.read("epsilon", t.adam.epsilon);
    a.reject_unknown();
  }
  root.read("seed", t.seed);
  root.read_count("emd_sample_size", t.emd_sample_size);
  root.read_count("pmf_sample_size", t.pmf_sample_size);
  root.read("output_dir", cfg.output_dir);
  root.read_count("checkpoint_interval", cfg.checkpoint_interval);
  root.read_count("eval_sample_size", cfg.eval_sample_size);
  root.read("record_timing", cfg.record_timing);
  root.read("condition_values", cfg.condition_values);
  root.reject_unknown();

  if (!t.conditioned) t.z_dim = 0;
  t.validate();
  return cfg;
}

json experiment_to_json(const ExperimentConfig& cfg) {
  const auto& t = cfg.train;
  return {
      {"name", cfg.name},
      {"variant",
       {{"matching", t.matching == MatchingVariant::greedy ? "greedy" : "alternating"},
        {"conditioned", t.conditioned}}},
      {"z_dim", t.z_dim},
      {"matching_batch", t.matching_batch},
      {"supervised_minibatch", t.supervised_minibatch},
      {"supervised_passes_per_epoch", t.supervised_passes_per_epoch},
      {"epochs", t.epochs},
      {"metric", std::string(metric_tag(t.metric.kind))},
      {"origin",
       {{"dim", t.origin.dim},
        {"bernoulli_p", t.origin.bernoulli_p},
        {"uniform_low", t.origin.uniform_low},
        {"uniform_high", t.origin.uniform_high}}},
      {"target", target_to_json(t.target)},
      {"hidden_layers", t.hidden_layers},
      {"clip_bound", t.clip_bound},
      {"adam",
       {{"learning_rate", t.adam.learning_rate},
        {"beta1", t.adam.beta1},
        {"beta2", t.adam.beta2},
        {"epsilon", t.adam.epsilon}}},
      {"seed", t.seed},
      {"emd_sample_size", t.emd_sample_size},
      {"pmf_sample_size", t.pmf_sample_size},
      {"output_dir", cfg.output_dir},
      {"checkpoint_interval", cfg.checkpoint_interval},
      {"eval_sample_size", cfg.eval_sample_size},
      {"record_timing", cfg.record_timing},
      {"condition_values", cfg.condition_values},
  };
}

ExperimentConfig load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  try {
    return experiment_from_json(doc);
  } catch (const ConfigError& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  } catch (const DimensionError& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
}

}  // namespace icpgen

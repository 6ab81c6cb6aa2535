#include "icpgen/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "icpgen/checkpoint.hpp"
#include "icpgen/csv.hpp"
#include "icpgen/errors.hpp"
#include "icpgen/experiment.hpp"
#include "icpgen/kernels.hpp"

namespace icpgen::cli {

namespace fs = std::filesystem;

namespace {

// Side streams for exports done after training; independent of the
// training stream.
constexpr std::uint64_t kExportStream = 0xe4b0;
constexpr std::size_t kPmfReferenceRepetitions = 10000;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainOptions {
  std::string config_path;
  std::string preset_name;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::string out_dir;
  bool overwrite = false;
  bool quiet = false;
  std::size_t export_samples = 0;
  bool export_assignment = false;
};

struct SampleOptions {
  std::string checkpoint;
  std::size_t count = 1000;
  std::string conditioning;
  std::string out_csv;
  std::uint64_t seed = 0;
};

struct EvalOptions {
  std::string checkpoint;
  std::optional<std::size_t> sample_size;
  std::string metric;
  bool approx = false;
  std::uint64_t seed = 0;
};

std::vector<std::string> output_header(const ExperimentConfig& cfg, std::size_t out_dim) {
  std::vector<std::string> header;
  const std::size_t z = cfg.train.conditioned ? cfg.train.z_dim : 0;
  for (std::size_t c = 0; c < out_dim; ++c) {
    if (c < z) {
      header.push_back(z == 1 ? "z_hat" : "z_hat" + std::to_string(c));
    } else {
      header.push_back("y" + std::to_string(c - z));
    }
  }
  return header;
}

std::vector<std::string> target_header(const ExperimentConfig& cfg, std::size_t dim) {
  std::vector<std::string> header;
  const std::size_t z = cfg.train.conditioned ? cfg.train.z_dim : 0;
  for (std::size_t c = 0; c < dim; ++c) {
    if (c < z) header.push_back(z == 1 ? "z" : "z" + std::to_string(c));
    else header.push_back("y" + std::to_string(c - z));
  }
  return header;
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  body(out);
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

ExperimentConfig resolve_train_config(const TrainOptions& opt) {
  if (!opt.config_path.empty() && !opt.preset_name.empty()) {
    throw UsageError("give either --config or --preset, not both");
  }
  ExperimentConfig cfg;
  if (!opt.config_path.empty()) {
    if (!fs::exists(opt.config_path)) {
      throw ConfigError("config file '" + opt.config_path + "' does not exist");
    }
    cfg = load_experiment(opt.config_path);
  } else if (!opt.preset_name.empty()) {
    cfg = preset(opt.preset_name);
  } else {
    throw UsageError("train needs --config PATH or --preset NAME");
  }
  if (opt.seed) cfg.train.seed = *opt.seed;
  if (opt.epochs) cfg.train.epochs = *opt.epochs;
  if (!opt.out_dir.empty()) cfg.output_dir = opt.out_dir;
  if (cfg.output_dir.empty()) cfg.output_dir = (fs::path("runs") / cfg.name).string();
  cfg.train.validate();
  return cfg;
}

int cmd_train(const TrainOptions& opt, std::ostream& out) {
  const ExperimentConfig cfg = resolve_train_config(opt);
  const fs::path dir(cfg.output_dir);
  if (fs::exists(dir / "config.json") || fs::exists(dir / "convergence.csv")) {
    if (!opt.overwrite) {
      throw UsageError("run directory '" + dir.string() +
                       "' already holds run artifacts; pass --overwrite to replace them");
    }
  }
  fs::create_directories(dir);
  if (cfg.checkpoint_interval > 0) fs::create_directories(dir / "checkpoints");

  const auto resolved = experiment_to_json(cfg);
  write_file(dir / "config.json", [&](std::ostream& o) { o << resolved.dump(2) << '\n'; });

  const TargetSampler target(cfg.train.target);
  auto to_checkpoint = [&](const TrainState& state) {
    return Checkpoint{state.net, state.adam, cfg.train.seed, state.epoch, resolved};
  };
  const auto observer = [&](const TrainState& state, const EpochRecord& rec) {
    if (!opt.quiet) {
      out << "epoch " << rec.epoch << " matched_cost_mean " << csv::format_real(rec.matched_cost_mean);
      if (rec.emd) out << " emd " << csv::format_real(*rec.emd);
      if (rec.pmf_error) out << " pmf_error " << csv::format_real(*rec.pmf_error);
      out << '\n';
    }
    if (cfg.checkpoint_interval > 0 && rec.epoch % cfg.checkpoint_interval == 0) {
      char name[32];
      std::snprintf(name, sizeof(name), "epoch_%06zu.json", rec.epoch);
      save_checkpoint((dir / "checkpoints" / name).string(), to_checkpoint(state));
    }
  };
  auto result = train(cfg.train, target, observer);

  write_file(dir / "convergence.csv",
             [&](std::ostream& o) { csv::write_history(o, result.history, cfg.record_timing); });
  write_file(dir / "timing.csv", [&](std::ostream& o) {
    o << "epoch,seconds\n";
    for (const auto& rec : result.history.records) {
      o << rec.epoch << ',' << csv::format_real(rec.seconds) << '\n';
    }
  });
  save_checkpoint((dir / "model.json").string(), to_checkpoint(result.state));

  if (opt.export_samples > 0 || opt.export_assignment) {
    auto rng = derived_rng(cfg.train.seed, kExportStream);
    const std::size_t n = opt.export_samples > 0 ? opt.export_samples : cfg.train.matching_batch;
    const SampleBatch targets = target.sample(n, rng);
    const SampleBatch origin = sample_origin(cfg.train.origin, n, rng);
    const Matrix inputs = network_inputs(cfg.train, origin, targets);
    const Matrix outputs = nn::predict(result.state.net, inputs);
    if (opt.export_samples > 0) {
      write_file(dir / "target_samples.csv", [&](std::ostream& o) {
        csv::write_matrix(o, target_header(cfg, targets.cols()), targets);
      });
      write_file(dir / "generated_samples.csv", [&](std::ostream& o) {
        csv::write_matrix(o, output_header(cfg, outputs.cols()), outputs);
      });
    }
    if (opt.export_assignment) {
      const Matrix view = matching_view(cfg.train, outputs, inputs);
      const auto assignment = cfg.train.matching == MatchingVariant::greedy
                                  ? greedy_match(targets, view, cfg.train.metric, rng)
                                  : alternating_match(targets, view, cfg.train.metric, rng);
      write_file(dir / "assignment.csv",
                 [&](std::ostream& o) { csv::write_assignment(o, assignment); });
    }
  }
  out << "wrote run to " << dir.string() << '\n';
  return kExitOk;
}

struct LoadedModel {
  Checkpoint checkpoint;
  ExperimentConfig config;
};

LoadedModel load_model(const std::string& path) {
  LoadedModel m;
  try {
    m.checkpoint = load_checkpoint(path);
  } catch (const FormatError& e) {
    throw UsageError(e.what());
  }
  if (m.checkpoint.experiment.empty()) {
    throw UsageError("checkpoint '" + path + "' carries no experiment configuration");
  }
  m.config = experiment_from_json(m.checkpoint.experiment);
  const auto& t = m.config.train;
  const std::size_t expected_in = t.origin.dim + (t.conditioned ? t.z_dim : 0);
  if (m.checkpoint.net.input_dim() != expected_in) {
    throw UsageError("checkpoint network input dim " +
                     std::to_string(m.checkpoint.net.input_dim()) +
                     " does not match its configuration (" + std::to_string(expected_in) + ")");
  }
  return m;
}

Matrix parse_conditioning(const std::string& spec, const ExperimentConfig& cfg) {
  const std::size_t z_dim = cfg.train.z_dim;
  if (spec.rfind("each:", 0) == 0) {
    std::size_t per_value = 0;
    try {
      per_value = std::stoul(spec.substr(5));
    } catch (const std::exception&) {
      throw UsageError("conditioning '" + spec + "': expected each:<count>");
    }
    if (cfg.condition_values.empty()) {
      throw UsageError("conditioning 'each:k' needs discrete condition_values in the checkpoint");
    }
    if (z_dim != 1) throw UsageError("conditioning 'each:k' requires z_dim 1");
    Matrix z(per_value * cfg.condition_values.size(), 1);
    std::size_t r = 0;
    for (double v : cfg.condition_values) {
      for (std::size_t k = 0; k < per_value; ++k) z(r++, 0) = v;
    }
    return z;
  }
  std::ifstream in(spec);
  if (!in) throw UsageError("cannot open conditioning file '" + spec + "'");
  const auto table = csv::read(in);
  const Matrix all = csv::to_matrix(table);
  if (all.cols() < z_dim) throw UsageError("conditioning file has fewer than z_dim columns");
  return column_block(all, 0, z_dim);
}

int cmd_sample(const SampleOptions& opt, std::ostream& out) {
  const auto model = load_model(opt.checkpoint);
  const auto& cfg = model.config;
  const auto& net = model.checkpoint.net;
  auto rng = Rng(opt.seed);

  std::optional<Matrix> conditioning;
  if (!opt.conditioning.empty()) {
    if (!cfg.train.conditioned) {
      throw UsageError("checkpoint is unconditioned; --conditioning is not accepted");
    }
    conditioning = parse_conditioning(opt.conditioning, cfg);
  } else if (cfg.train.conditioned && opt.count > 0) {
    throw UsageError("conditioned checkpoint needs --conditioning (each:k or a CSV file)");
  }

  Matrix outputs;
  if (conditioning) {
    outputs = generate(net, cfg.train, conditioning->rows(), rng, &*conditioning);
  } else if (cfg.train.conditioned) {
    outputs = Matrix(0, net.output_dim());
  } else {
    outputs = generate(net, cfg.train, opt.count, rng);
  }

  std::vector<std::string> header;
  Matrix table = outputs;
  if (conditioning) {
    header = target_header(cfg, cfg.train.z_dim);
    table = hconcat(*conditioning, outputs);
  }
  for (auto& h : output_header(cfg, net.output_dim())) header.push_back(h);
  const bool categorical = cfg.train.target.kind == TargetKind::multinoulli;
  if (categorical) {
    const auto labels = argmax_labels(outputs);
    Matrix label_col(labels.size(), 1);
    for (std::size_t r = 0; r < labels.size(); ++r) label_col(r, 0) = static_cast<double>(labels[r]);
    table = hconcat(table, label_col);
    header.push_back("label");
  }

  if (opt.out_csv.empty() || opt.out_csv == "-") {
    csv::write_matrix(out, header, table);
  } else {
    write_file(opt.out_csv, [&](std::ostream& o) { csv::write_matrix(o, header, table); });
    out << "wrote " << table.rows() << " samples to " << opt.out_csv << '\n';
  }
  return kExitOk;
}

int cmd_eval(const EvalOptions& opt, std::ostream& out) {
  const auto model = load_model(opt.checkpoint);
  ExperimentConfig cfg = model.config;
  const auto& net = model.checkpoint.net;
  const std::size_t n = opt.sample_size.value_or(cfg.eval_sample_size);
  if (n == 0) throw UsageError("--sample-size must be positive");
  if (n > kExactEmdLimit && !opt.approx) {
    throw UsageError("exact EMD is limited to sample sizes <= " + std::to_string(kExactEmdLimit) +
                     "; pass --approx for the greedy upper bound");
  }
  if (!opt.metric.empty()) {
    auto kind = metric_kind_from_tag(opt.metric);
    cfg.train.metric = {kind, kind == MetricKind::conditioned_squared_euclidean ? cfg.train.z_dim : 0};
    cfg.train.validate();
  }
  const TargetSampler target(cfg.train.target);
  auto rng = Rng(opt.seed);

  const SampleBatch fresh = target.sample(n, rng);
  Matrix generated;
  if (cfg.train.conditioned) {
    const Matrix z = column_block(target.sample(n, rng), 0, cfg.train.z_dim);
    generated = generate(net, cfg.train, n, rng, &z);
  } else {
    generated = generate(net, cfg.train, n, rng);
  }
  const bool exact = n <= kExactEmdLimit && !opt.approx;
  const auto emd = exact ? empirical_emd(fresh, generated, cfg.train.metric)
                         : greedy_emd_upper_bound(fresh, generated, cfg.train.metric, rng);

  out << "target: " << cfg.train.target.tag() << '\n';
  out << "sample_size: " << n << '\n';
  out << (emd.exact ? "emd_exact" : "emd_greedy_upper_bound") << " (" << emd.metric
      << "): " << csv::format_real(emd.value) << '\n';
  if (target.categorical()) {
    const auto labels = argmax_labels(generated);
    const auto& probs = cfg.train.target.probabilities;
    auto ref_rng = derived_rng(opt.seed, kExportStream, 1);
    const double reference = pmf_reference_error(probs, n, kPmfReferenceRepetitions, ref_rng);
    out << "pmf_error: " << csv::format_real(pmf_error(labels, probs)) << '\n';
    out << "pmf_reference (" << kPmfReferenceRepetitions << " draws of " << n
        << " true samples): " << csv::format_real(reference) << '\n';
  }
  return kExitOk;
}

int cmd_presets(std::ostream& out) {
  for (const auto& p : preset_catalog()) {
    out << std::left << std::setw(22) << p.name << p.description << '\n';
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  kernels::apply_thread_limit_from_env();

  CLI::App app{"icpgen: iterative closest points training for generative networks", "icpgen"};
  app.require_subcommand(1);

  TrainOptions train_opt;
  auto* train_cmd = app.add_subcommand("train", "train a network and write a run directory");
  train_cmd->add_option("--config", train_opt.config_path, "experiment JSON file");
  train_cmd->add_option("--preset", train_opt.preset_name, "named experiment preset");
  train_cmd->add_option("--seed", train_opt.seed, "override the seed");
  train_cmd->add_option("--epochs", train_opt.epochs, "override the epoch count");
  train_cmd->add_option("--out", train_opt.out_dir, "run directory");
  train_cmd->add_flag("--overwrite", train_opt.overwrite, "replace an existing run directory");
  train_cmd->add_flag("--quiet", train_opt.quiet, "no per-epoch progress lines");
  train_cmd->add_option("--export-samples", train_opt.export_samples,
                        "write this many generated and target samples as CSV");
  train_cmd->add_flag("--export-assignment", train_opt.export_assignment,
                      "write a final-network matching as assignment.csv");

  SampleOptions sample_opt;
  auto* sample_cmd = app.add_subcommand("sample", "generate samples from a checkpoint");
  sample_cmd->add_option("--checkpoint", sample_opt.checkpoint, "checkpoint JSON")->required();
  sample_cmd->add_option("--count", sample_opt.count, "number of samples (unconditioned)");
  sample_cmd->add_option("--conditioning", sample_opt.conditioning,
                         "each:k or a CSV file whose first columns hold z");
  sample_cmd->add_option("--out", sample_opt.out_csv, "output CSV ('-' for stdout)");
  sample_cmd->add_option("--seed", sample_opt.seed, "noise seed");

  EvalOptions eval_opt;
  auto* eval_cmd = app.add_subcommand("eval", "empirical EMD (and pmf error) of a checkpoint");
  eval_cmd->add_option("--checkpoint", eval_opt.checkpoint, "checkpoint JSON")->required();
  eval_cmd->add_option("--sample-size", eval_opt.sample_size, "generated and target sample size");
  eval_cmd->add_option("--metric", eval_opt.metric, "sqeuclidean | conditioned | softmax_xent");
  eval_cmd->add_flag("--approx", eval_opt.approx, "greedy upper bound instead of exact EMD");
  eval_cmd->add_option("--seed", eval_opt.seed, "evaluation seed");

  app.add_subcommand("presets", "list experiment presets");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train_cmd) return cmd_train(train_opt, out);
    if (*sample_cmd) return cmd_sample(sample_opt, out);
    if (*eval_cmd) return cmd_eval(eval_opt, out);
    return cmd_presets(out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace icpgen::cli

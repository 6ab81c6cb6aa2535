#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "icpgen/checkpoint.hpp"
#include "icpgen/cli.hpp"
#include "icpgen/csv.hpp"
#include "icpgen/experiment.hpp"

using namespace icpgen;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& leaf) const { return (path / leaf).string(); }
};

void write_json(const std::string& path, const json& doc) { std::ofstream(path) << doc.dump(2); }

std::size_t line_count(const std::string& s) { return std::count(s.begin(), s.end(), '\n'); }

json tiny_gmm3() {
  return {{"preset", "gmm3"},       {"matching_batch", 60}, {"supervised_minibatch", 20},
          {"epochs", 3},            {"hidden_layers", {10}}, {"emd_sample_size", 20},
          {"checkpoint_interval", 1}, {"eval_sample_size", 50}};
}

}  // namespace

TEST_CASE("usage errors") {
  const auto missing = run({"train", "--config", "/nonexistent/exp.json"});
  CHECK(missing.code == cli::kExitUsage);
  CHECK(missing.err.find("/nonexistent/exp.json") != std::string::npos);

  CHECK(run({}).code == cli::kExitUsage);
  CHECK(run({"fly"}).code == cli::kExitUsage);
  CHECK(run({"train"}).code == cli::kExitUsage);
  CHECK(run({"train", "--preset", "gmm3", "--config", "x.json"}).code == cli::kExitUsage);
  CHECK(run({"train", "--preset", "nope"}).code == cli::kExitUsage);
  CHECK(run({"sample"}).code == cli::kExitUsage);

  TempDir tmp("icpgen_cli_usage");
  write_json(tmp / "bad.json", {{"preset", "gmm3"}, {"matching_bach", 10}});
  const auto bad = run({"train", "--config", tmp / "bad.json", "--out", tmp / "run"});
  CHECK(bad.code == cli::kExitUsage);
  CHECK(bad.err.find("matching_bach") != std::string::npos);

  std::ofstream(tmp / "broken.json") << "{ \"epochs\": ";
  const auto broken = run({"train", "--config", tmp / "broken.json"});
  CHECK(broken.code == cli::kExitUsage);
  CHECK(broken.err.find("broken.json") != std::string::npos);
}

TEST_CASE("presets lists every preset") {
  const auto r = run({"presets"});
  CHECK(r.code == 0);
  for (const char* name : {"gmm3", "gmm3-conditioned", "sinusoid-conditioned", "sinusoid-mixed2d",
                           "swissroll", "mnist-conditioned", "mnist-smallbatch", "multinoulli"}) {
    CHECK(r.out.find(name) != std::string::npos);
  }
}

TEST_CASE("train, sample and eval an unconditioned run") {
  TempDir tmp("icpgen_cli_train");
  write_json(tmp / "exp.json", tiny_gmm3());
  const std::string run_dir = tmp / "run";
  const auto trained = run({"train", "--config", tmp / "exp.json", "--out", run_dir, "--quiet",
                            "--export-samples", "40", "--export-assignment"});
  REQUIRE(trained.code == 0);
  for (const char* f : {"config.json", "convergence.csv", "timing.csv", "model.json",
                        "checkpoints/epoch_000003.json", "target_samples.csv",
                        "generated_samples.csv", "assignment.csv"}) {
    CHECK(fs::exists(fs::path(run_dir) / f));
  }
  const std::string conv = slurp(fs::path(run_dir) / "convergence.csv");
  CHECK(conv.rfind("epoch,matched_cost_sum,matched_cost_mean,emd,pmf_error,seconds\n", 0) == 0);
  CHECK(line_count(conv) == 4);
  CHECK(line_count(slurp(fs::path(run_dir) / "assignment.csv")) == 41);

  SUBCASE("the resolved config reproduces the run") {
    const auto again = run({"train", "--config", run_dir + "/config.json", "--out", tmp / "rerun",
                            "--quiet"});
    REQUIRE(again.code == 0);
    CHECK(slurp(tmp / "rerun/convergence.csv") == conv);
    auto params = [](const fs::path& p) {
      auto doc = json::parse(slurp(p));
      doc.erase("experiment");
      return doc.dump();
    };
    CHECK(params(tmp / "rerun/model.json") == params(fs::path(run_dir) / "model.json"));
  }
  SUBCASE("existing artifacts need --overwrite") {
    const auto refused = run({"train", "--config", tmp / "exp.json", "--out", run_dir, "--quiet"});
    CHECK(refused.code == cli::kExitUsage);
    CHECK(refused.err.find("--overwrite") != std::string::npos);
    const auto replaced = run({"train", "--config", tmp / "exp.json", "--out", run_dir, "--quiet",
                               "--overwrite"});
    CHECK(replaced.code == 0);
    CHECK(slurp(fs::path(run_dir) / "convergence.csv") == conv);
  }
  SUBCASE("overrides") {
    const auto r = run({"train", "--config", tmp / "exp.json", "--out", tmp / "o", "--quiet",
                        "--epochs", "2", "--seed", "77"});
    REQUIRE(r.code == 0);
    CHECK(line_count(slurp(tmp / "o/convergence.csv")) == 3);
    const auto cfg = load_experiment(tmp / "o/config.json");
    CHECK(cfg.train.seed == 77);
    CHECK(cfg.train.epochs == 2);
  }
  SUBCASE("sample") {
    const std::string model = run_dir + "/model.json";
    const auto empty = run({"sample", "--checkpoint", model, "--count", "0"});
    CHECK(empty.code == 0);
    CHECK(empty.out == "y0,y1\n");

    const auto many = run({"sample", "--checkpoint", model, "--count", "2000", "--out", tmp / "s.csv"});
    CHECK(many.code == 0);
    std::ifstream in(tmp / "s.csv");
    const auto table = csv::read(in);
    CHECK(table.rows.size() == 2000);
    CHECK(table.header.size() == 2);

    // Re-reading and re-writing reproduces the bytes.
    std::ostringstream rewritten;
    csv::write_matrix(rewritten, table.header, csv::to_matrix(table));
    CHECK(rewritten.str() == slurp(tmp / "s.csv"));

    CHECK(run({"sample", "--checkpoint", model, "--count", "5", "--conditioning", "each:2"}).code ==
          cli::kExitUsage);
    CHECK(run({"sample", "--checkpoint", tmp / "none.json"}).code == cli::kExitUsage);
  }
  SUBCASE("eval") {
    const std::string model = run_dir + "/model.json";
    const auto exact = run({"eval", "--checkpoint", model, "--sample-size", "100"});
    CHECK(exact.code == 0);
    CHECK(exact.out.find("emd_exact (sqeuclidean): ") != std::string::npos);
    CHECK(exact.out.find("pmf_error") == std::string::npos);

    const auto refused = run({"eval", "--checkpoint", model, "--sample-size", "2001"});
    CHECK(refused.code == cli::kExitUsage);
    CHECK(refused.err.find("--approx") != std::string::npos);
    const auto approx = run({"eval", "--checkpoint", model, "--sample-size", "2001", "--approx"});
    CHECK(approx.code == 0);
    CHECK(approx.out.find("emd_greedy_upper_bound") != std::string::npos);
    CHECK(run({"eval", "--checkpoint", model, "--metric", "softmax_xent"}).code == cli::kExitUsage);
  }
}

TEST_CASE("conditioned sampling with each:k") {
  TempDir tmp("icpgen_cli_cond");
  json doc = {{"preset", "sinusoid-conditioned"}, {"matching_batch", 40}, {"supervised_minibatch", 20},
              {"epochs", 1},  {"hidden_layers", {6}}, {"condition_values", {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}}};
  write_json(tmp / "exp.json", doc);
  REQUIRE(run({"train", "--config", tmp / "exp.json", "--out", tmp / "run", "--quiet"}).code == 0);
  const std::string model = tmp / "run/model.json";

  const auto r = run({"sample", "--checkpoint", model, "--conditioning", "each:10"});
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  const auto table = csv::read(in);
  CHECK(table.header == std::vector<std::string>{"z", "z_hat", "y0"});
  REQUIRE(table.rows.size() == 100);
  for (std::size_t k = 0; k < 100; ++k) CHECK(table.rows[k][0] == std::to_string(k / 10));

  std::ofstream(tmp / "z.csv") << "z\n1.5\n2.5\n";
  const auto from_file = run({"sample", "--checkpoint", model, "--conditioning", tmp / "z.csv"});
  CHECK(from_file.code == 0);
  CHECK(line_count(from_file.out) == 3);

  CHECK(run({"sample", "--checkpoint", model, "--count", "5"}).code == cli::kExitUsage);
  CHECK(run({"eval", "--checkpoint", model, "--sample-size", "50"}).code == 0);
}

TEST_CASE("categorical eval prints the reference error") {
  TempDir tmp("icpgen_cli_cat");
  write_json(tmp / "exp.json", {{"preset", "multinoulli"}, {"matching_batch", 50},
                                {"supervised_minibatch", 25}, {"epochs", 1}, {"hidden_layers", {5}},
                                {"pmf_sample_size", 50}});
  REQUIRE(run({"train", "--config", tmp / "exp.json", "--out", tmp / "run", "--quiet"}).code == 0);
  const auto r = run({"eval", "--checkpoint", tmp / "run/model.json", "--sample-size", "100"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("pmf_error: ") != std::string::npos);
  CHECK(r.out.find("pmf_reference") != std::string::npos);
  CHECK(r.out.find("emd_exact (softmax_xent)") != std::string::npos);
  const std::string conv = slurp(tmp / "run/convergence.csv");
  CHECK(conv.find(",,") != std::string::npos);

  const auto s = run({"sample", "--checkpoint", tmp / "run/model.json", "--count", "3"});
  std::istringstream in(s.out);
  CHECK(csv::read(in).header.back() == "label");
}

TEST_CASE("a zero-loss checkpoint on a replicated target evaluates to EMD 0") {
  TempDir tmp("icpgen_cli_zero");
  // One 1x2 image with pixels (0, 255) and label 3: the only target row is
  // (3, 0, 1).
  auto put = [](std::ofstream& f, std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) f.put(static_cast<char>((v >> s) & 0xff));
  };
  {
    std::ofstream img(tmp / "img", std::ios::binary), lab(tmp / "lab", std::ios::binary);
    put(img, 0x803), put(img, 1), put(img, 1), put(img, 2);
    img.put(0), img.put(static_cast<char>(255));
    put(lab, 0x801), put(lab, 1);
    lab.put(3);
  }
  ExperimentConfig cfg;
  cfg.train.target.kind = TargetKind::mnist;
  cfg.train.target.images_path = tmp / "img";
  cfg.train.target.labels_path = tmp / "lab";
  cfg.train.hidden_layers = {};
  nn::DenseNetwork net({6, 3});
  net.layer(0).biases = {3.0, 0.0, 1.0};
  save_checkpoint(tmp / "model.json",
                  {net, nn::AdamState::for_network(net), 1, 1, experiment_to_json(cfg)});
  const auto r = run({"eval", "--checkpoint", tmp / "model.json", "--sample-size", "30"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("emd_exact (sqeuclidean): 0\n") != std::string::npos);
}

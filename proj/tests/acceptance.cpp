// Runs the acceptance criteria and prints one PASS/FAIL line for each.
// Usage: icpgen_acceptance [criterion numbers...]   (default: all)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "icpgen/cli.hpp"
#include "icpgen/distances.hpp"
#include "icpgen/experiment.hpp"
#include "icpgen/matching.hpp"
#include "icpgen/nn.hpp"
#include "icpgen/trainer.hpp"
#include "oracles.hpp"

#ifndef ICPGEN_MNIST_DIR
#define ICPGEN_MNIST_DIR "data/mnist"
#endif

using namespace icpgen;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int number;
  std::string title;
  double budget_seconds;
  std::function<Outcome()> check;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), f, a, b);
  return buf;
}

// 1 ------------------------------------------------------------------------

Outcome assignment_correctness() {
  std::mt19937_64 gen(20240601);
  Rng rng(17);
  const std::size_t dims[] = {1, 2, 20};
  const auto metric = MetricSpec::squared_euclidean();
  int violations = 0, brute_checked = 0;
  for (int inst = 0; inst < 500; ++inst) {
    const std::size_t n = 1 + gen() % 50;
    const std::size_t d = dims[inst % 3];
    const Matrix t = oracle::random_matrix(n, d, gen);
    const Matrix p = oracle::random_matrix(n, d, gen);
    const auto costs = pairwise_costs(t, p, metric);
    const auto best = hungarian(costs);
    const auto greedy = greedy_match(t, p, metric, rng);
    const auto alt = alternating_match(t, p, metric, rng);
    if (!greedy.is_bijection() || !alt.is_bijection() || !best.is_bijection()) ++violations;
    if (greedy.total_cost < best.total_cost - 1e-9) ++violations;
    if (alt.total_cost < best.total_cost - 1e-9) ++violations;
    if (n <= 7) {
      ++brute_checked;
      if (std::abs(best.total_cost - oracle::brute_force_assignment(costs)) > 1e-9) ++violations;
    }
  }
  // Every size up to 7 against exhaustive search, regardless of the draw.
  for (std::size_t n = 1; n <= 7; ++n) {
    for (int rep = 0; rep < 20; ++rep) {
      const Matrix c = oracle::random_matrix(n, n, gen, 0.0, 4.0);
      ++brute_checked;
      if (std::abs(hungarian(c).total_cost - oracle::brute_force_assignment(c)) > 1e-9) ++violations;
    }
  }
  return {violations == 0, std::to_string(violations) + " violations over 500 instances, " +
                               std::to_string(brute_checked) + " exhaustive comparisons"};
}

// 2 ------------------------------------------------------------------------

Outcome emd_estimator() {
  std::mt19937_64 gen(7);
  const auto metric = MetricSpec::squared_euclidean();
  double worst = 0.0;
  const Matrix p = oracle::random_matrix(9, 3, gen);
  std::vector<std::size_t> perm{4, 2, 8, 0, 1, 7, 3, 6, 5};
  const double identical = empirical_emd(p, gather_rows(p, perm), metric).value;
  const Matrix a = oracle::random_matrix(1, 4, gen), b = oracle::random_matrix(1, 4, gen);
  const double singleton_err =
      std::abs(empirical_emd(a, b, metric).value - squared_euclidean(a.row(0), b.row(0)));
  for (int rep = 0; rep < 100; ++rep) {
    const Matrix x = oracle::random_matrix(6, 2, gen, -2, 2);
    const Matrix y = oracle::random_matrix(6, 2, gen, -2, 2);
    Matrix c(6, 6);
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t j = 0; j < 6; ++j) c(i, j) = oracle::sq_dist(x, i, y, j);
    worst = std::max(worst, std::abs(empirical_emd(x, y, metric).value -
                                     oracle::brute_force_assignment(c) / 6.0));
  }
  const bool pass = identical == 0.0 && singleton_err <= 1e-12 && worst <= 1e-9;
  return {pass, "identical " + fmt("%.3g", identical) + ", singleton err " +
                    fmt("%.3g", singleton_err) + ", max oracle err " + fmt("%.3g", worst)};
}

// 3 ------------------------------------------------------------------------

double batch_loss(const nn::DenseNetwork& net, const Matrix& x, const Matrix& y,
                  const MetricSpec& m) {
  const Matrix out = nn::predict(net, x);
  double s = 0.0;
  for (std::size_t r = 0; r < out.rows(); ++r) s += distance(m, y.row(r), out.row(r));
  return s / double(out.rows());
}

Outcome gradient_suite() {
  std::mt19937_64 gen(31);
  const double h = 1e-5;
  double worst_net = 0.0, worst_dist = 0.0;
  int nets = 0, skipped = 0;
  while (nets < 50) {
    std::vector<std::size_t> dims{1 + gen() % 5};
    const std::size_t hidden = 1 + gen() % 3;
    for (std::size_t l = 0; l < hidden; ++l) dims.push_back(2 + gen() % 8);
    dims.push_back(2 + gen() % 4);
    auto net = nn::init_network(dims, gen());
    for (std::size_t l = 0; l < net.layer_count(); ++l)
      for (double& b : net.layer(l).biases) b = std::uniform_real_distribution<double>(-0.5, 0.5)(gen);
    const Matrix x = oracle::random_matrix(4, dims.front(), gen);
    const auto fwd = nn::forward(net, x);
    // SELU has a kink at 0; a finite difference straddling it is meaningless.
    bool near_kink = false;
    for (std::size_t l = 0; l + 1 < fwd.cache.pre_activations.size(); ++l)
      for (double v : fwd.cache.pre_activations[l].storage()) near_kink |= std::abs(v) < 1e-3;
    if (near_kink) {
      ++skipped;
      continue;
    }
    for (int kind = 0; kind < 2; ++kind) {
      MetricSpec m = kind == 0 ? MetricSpec::squared_euclidean() : MetricSpec::softmax_cross_entropy();
      Matrix y = kind == 0 ? oracle::random_matrix(4, dims.back(), gen) : Matrix(4, dims.back());
      if (kind == 1)
        for (std::size_t r = 0; r < 4; ++r) y(r, gen() % dims.back()) = 1.0;
      Matrix seed(4, dims.back());
      for (std::size_t r = 0; r < 4; ++r)
        distance_gradient_into(m, y.row(r), fwd.output.row(r), seed.row(r));
      const auto grads = nn::backward(net, fwd.cache, seed);
      auto probe = [&](double& param, double analytic) {
        const double orig = param;
        param = orig + h;
        const double up = batch_loss(net, x, y, m);
        param = orig - h;
        const double down = batch_loss(net, x, y, m);
        param = orig;
        worst_net = std::max(worst_net, oracle::relative_error(analytic, (up - down) / (2 * h)));
      };
      for (std::size_t l = 0; l < net.layer_count(); ++l) {
        auto& w = net.layer(l).weights.storage();
        for (std::size_t k = 0; k < w.size(); ++k) probe(w[k], grads.weights[l].storage()[k]);
        auto& b = net.layer(l).biases;
        for (std::size_t k = 0; k < b.size(); ++k) probe(b[k], grads.biases[l][k]);
      }
    }
    ++nets;
  }
  for (int rep = 0; rep < 200; ++rep) {
    const std::vector<MetricSpec> specs{MetricSpec::squared_euclidean(), MetricSpec::conditioned(1),
                                        MetricSpec::softmax_cross_entropy()};
    const auto& m = specs[rep % 3];
    auto pred = oracle::random_matrix(1, 4, gen, -3, 3).storage();
    auto target = oracle::random_matrix(1, 4, gen).storage();
    if (m.kind == MetricKind::softmax_cross_entropy) {
      target.assign(4, 0.0);
      target[gen() % 4] = 1.0;
    }
    const auto g = distance_gradient(m, target, pred);
    for (std::size_t i = 0; i < 4; ++i) {
      const double orig = pred[i];
      pred[i] = orig + h;
      const double up = distance(m, target, pred);
      pred[i] = orig - h;
      const double down = distance(m, target, pred);
      pred[i] = orig;
      worst_dist = std::max(worst_dist, oracle::relative_error(g[i], (up - down) / (2 * h), 1e-3));
    }
  }
  return {worst_net < 1e-4 && worst_dist < 1e-6,
          "max rel err networks " + fmt("%.3g", worst_net) + " (50 nets, " +
              std::to_string(skipped) + " redrawn near the kink), distances " + fmt("%.3g", worst_dist)};
}

// 4 ------------------------------------------------------------------------

Outcome gmm3_convergence() {
  const auto cfg = preset("gmm3");
  auto train_cfg = cfg.train;
  train_cfg.emd_sample_size = 0;
  const TargetSampler target(train_cfg.target);
  const auto init = init_train_state(train_cfg, target);
  Rng eval0(901), eval1(901);
  const double emd0 = evaluate_emd(init.net, train_cfg, target, 500, eval0).value;
  const auto result = train(train_cfg, target);
  const auto& recs = result.history.records;
  const double first = recs.front().matched_cost_mean;
  const double last = recs.back().matched_cost_mean;
  const double emd_end = evaluate_emd(result.state.net, train_cfg, target, 500, eval1).value;
  const bool pass = recs.size() == 50 && last <= 0.25 * first && emd_end * 4.0 <= emd0;
  return {pass, "epoch-50/epoch-1 cost " + fmt("%.4f", last / first) + " (<= 0.25), EMD " +
                    fmt("%.4f -> %.4f", emd0, emd_end) + " (ratio " + fmt("%.2f", emd0 / emd_end) +
                    ", >= 4)"};
}

// 5 ------------------------------------------------------------------------

Outcome conditioned_sinusoid() {
  const auto cfg = preset("sinusoid-conditioned");
  const auto& tc = cfg.train;
  const TargetSampler target(tc.target);
  const auto result = train(tc, target);
  Rng rng(5150);
  std::uniform_real_distribution<double> u(1.0, 5.0);
  Matrix z(500, 1);
  for (std::size_t r = 0; r < 500; ++r) z(r, 0) = u(rng);
  const Matrix out = generate(result.state.net, tc, 500, rng, &z);
  double y_err = 0.0, z_err = 0.0;
  for (std::size_t r = 0; r < 500; ++r) {
    y_err += std::abs(out(r, 1) - std::sin(z(r, 0)));
    z_err += std::abs(out(r, 0) - z(r, 0));
  }
  y_err /= 500.0;
  z_err /= 500.0;
  const double bound = 3.0 * tc.target.sinusoid.noise_sigma;
  return {result.history.records.size() == 100 && y_err <= bound && z_err <= 0.05,
          "mean |y_hat - sin z| " + fmt("%.4f (<= %.2f)", y_err, bound) + ", mean |z_hat - z| " +
              fmt("%.4f (<= 0.05)", z_err)};
}

// 6 ------------------------------------------------------------------------

Outcome categorical() {
  auto cfg = preset("multinoulli");
  const auto& probs = cfg.train.target.probabilities;
  Rng ref_rng(6006);
  const double red_line = pmf_reference_error(probs, 1000, 10000, ref_rng);
  int passed = 0;
  std::string detail = "red line " + fmt("%.5f", red_line) + ";";
  for (std::uint64_t seed : {1, 2, 3}) {
    auto tc = cfg.train;
    tc.seed = seed;
    tc.epochs = 200;
    tc.pmf_sample_size = 1000;
    std::size_t hit = 0;
    double best = 1.0;
    train(tc, TargetSampler(tc.target), [&](const TrainState&, const EpochRecord& rec) {
      best = std::min(best, *rec.pmf_error);
      if (!hit && *rec.pmf_error < red_line) hit = rec.epoch;
    });
    passed += hit > 0;
    detail += " seed " + std::to_string(seed) +
              (hit ? " below at epoch " + std::to_string(hit) : " never below (best " + fmt("%.5f", best) + ")");
  }
  return {passed == 3, detail};
}

// 7 ------------------------------------------------------------------------

Outcome reduced_mnist() {
  const fs::path dir = std::getenv("ICPGEN_MNIST_DIR") ? std::getenv("ICPGEN_MNIST_DIR") : ICPGEN_MNIST_DIR;
  const fs::path images = dir / "train-images-idx3-ubyte";
  const fs::path labels = dir / "train-labels-idx1-ubyte";
  if (!fs::exists(images) || !fs::exists(labels)) {
    return {false, "MNIST IDX files not found under " + dir.string() +
                       " (run tools/make_mnist_subset.py or set ICPGEN_MNIST_DIR)"};
  }
  auto cfg = preset("mnist-conditioned");
  auto tc = cfg.train;
  tc.target.images_path = images.string();
  tc.target.labels_path = labels.string();
  tc.target.mnist_limit = 10000;
  tc.matching_batch = 2000;
  tc.supervised_minibatch = 100;
  tc.epochs = 20;
  const TargetSampler target(tc.target);
  if (target.dataset()->rows() < 10000) {
    return {false, "MNIST files hold only " + std::to_string(target.dataset()->rows()) +
                       " records, 10000 needed"};
  }
  const auto result = train(tc, target);
  const auto& recs = result.history.records;
  const double ratio = recs.back().matched_cost_mean / recs.front().matched_cost_mean;

  Matrix z(1000, 1);
  for (std::size_t r = 0; r < 1000; ++r) z(r, 0) = double(r / 100);
  Rng rng(7007);
  const Matrix out = generate(result.state.net, tc, 1000, rng, &z);
  std::size_t within = 0;
  for (std::size_t r = 0; r < 1000; ++r) within += std::abs(out(r, 0) - z(r, 0)) <= 0.25;
  const double frac = within / 1000.0;
  return {ratio <= 0.5 && frac >= 0.9,
          "epoch-20/epoch-1 cost " + fmt("%.4f (<= 0.5)", ratio) + ", z_hat within 0.25 of label " +
              fmt("%.3f (>= 0.9)", frac)};
}

// 8 ------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "icpgen_acceptance_determinism";
  fs::remove_all(root);
  std::string detail;
  bool pass = true;
  for (const char* name : {"gmm3", "sinusoid-mixed2d", "swissroll", "multinoulli"}) {
    std::string bytes[2];
    for (int k = 0; k < 2; ++k) {
      const fs::path out = root / (std::string(name) + "_" + std::to_string(k));
      std::ostringstream o, e;
      const int code = cli::run({"train", "--preset", name, "--out", out.string(), "--quiet"}, o, e);
      if (code != 0) return {false, std::string(name) + ": train failed: " + e.str()};
      bytes[k] = slurp(out / "convergence.csv");
    }
    const bool same = !bytes[0].empty() && bytes[0] == bytes[1];
    pass = pass && same;
    detail += std::string(detail.empty() ? "" : ", ") + name + (same ? " identical" : " DIFFERENT");
  }
  fs::remove_all(root);
  return {pass, detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "assignment correctness", 60, assignment_correctness},
      {2, "EMD estimator", 10, emd_estimator},
      {3, "gradient suite", 30, gradient_suite},
      {4, "three-Gaussian convergence", 300, gmm3_convergence},
      {5, "conditioned sinusoid", 300, conditioned_sinusoid},
      {6, "categorical learning", 300, categorical},
      {7, "reduced MNIST", 1800, reduced_mnist},
      {8, "determinism", 1e9, determinism},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.number) == selected.end())
      continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_seconds;
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::cout << "criterion " << c.number << " (" << c.title << "): " << (pass ? "PASS" : "FAIL")
              << " - " << o.detail << (in_time ? "" : " [over time budget]")
              << fmt(" [%.1fs]", secs) << std::endl;
  }
  return failures == 0 ? 0 : 1;
}

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "icpgen/errors.hpp"
#include "icpgen/matrix.hpp"
#include "icpgen/random.hpp"

namespace icpgen {

// Mixed noise: the first dim/2 coordinates are Bernoulli(bernoulli_p) in
// {0, 1}, the last dim/2 are Uniform[uniform_low, uniform_high).
struct OriginSpec {
  std::size_t dim = 6;
  double bernoulli_p = 0.5;
  double uniform_low = 0.0;
  double uniform_high = 1.0;

  void validate() const;
};

SampleBatch sample_origin(const OriginSpec& spec, std::size_t count, Rng& rng);

struct Gmm3Params {
  std::array<std::array<double, 2>, 3> means{{{1.5, 2.0}, {3.0, -1.0}, {4.5, 1.0}}};
  std::array<double, 3> sigmas{0.2, 0.2, 0.2};
};

// Uniform component choice, then an isotropic Gaussian draw. 2-D rows (x, y).
SampleBatch sample_gmm3(std::size_t count, Rng& rng, const Gmm3Params& params = {});

struct SinusoidParams {
  double x_low = 1.0;
  double x_high = 5.0;
  double noise_sigma = 0.1;
};

// x ~ Uniform[x_low, x_high], y = sin(x) + Normal(0, noise_sigma^2).
SampleBatch sample_noisy_sinusoid(std::size_t count, Rng& rng, const SinusoidParams& params = {});

struct SwissRollParams {
  double t_min = 1.5 * std::numbers::pi;
  double t_max = 4.5 * std::numbers::pi;
  double scale = 3.0;
  double noise_sigma = 0.05;
};

// (t cos t, t sin t) / scale, noise-free.
std::array<double, 2> swiss_roll_point(double t, const SwissRollParams& params = {});

SampleBatch sample_swiss_roll(std::size_t count, Rng& rng, const SwissRollParams& params = {});

// Throws ConfigError unless entries are nonnegative and sum to 1 within 1e-9.
void validate_probabilities(std::span<const double> probabilities);

// One-hot rows; category k with probability probabilities[k].
SampleBatch sample_multinoulli(std::span<const double> probabilities, std::size_t count, Rng& rng);

// ---------------------------------------------------------------------------
// MNIST IDX files

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

enum class IdxErrorKind { io, bad_magic, truncated, count_mismatch };

class IdxError : public FormatError {
 public:
  IdxError(IdxErrorKind kind, const std::string& message) : FormatError(message), kind_(kind) {}
  IdxErrorKind kind() const { return kind_; }

 private:
  IdxErrorKind kind_;
};

struct MnistDataset {
  std::size_t image_rows = 0;
  std::size_t image_cols = 0;
  std::vector<std::uint8_t> labels;
  Matrix pixels;  // count x (rows * cols), bytes scaled by 1/255

  std::size_t size() const { return labels.size(); }
};

MnistDataset load_mnist(const std::string& images_path, const std::string& labels_path);

// Rows [z; y] with z the label (divided by 9 when normalize_label is set).
Matrix mnist_conditioned_rows(const MnistDataset& data, bool normalize_label = false,
                              std::size_t limit = 0);

// ---------------------------------------------------------------------------
// Target distributions

enum class TargetKind { gmm3, noisy_sinusoid, swiss_roll, multinoulli, mnist };

struct TargetSpec {
  TargetKind kind = TargetKind::gmm3;
  Gmm3Params gmm3;
  SinusoidParams sinusoid;
  SwissRollParams swiss_roll;
  std::vector<double> probabilities{0.5, 0.3, 0.2};
  std::string images_path;
  std::string labels_path;
  bool normalize_label = false;
  std::size_t mnist_limit = 0;  // first N records only; 0 keeps all

  std::string tag() const;
};

std::string target_kind_tag(TargetKind kind);
TargetKind target_kind_from_tag(const std::string& tag);

// Draws target batches. Synthetic kinds are generated fresh; the MNIST kind
// samples rows of the loaded dataset with replacement.
class TargetSampler {
 public:
  explicit TargetSampler(TargetSpec spec);
  // Wraps a finite dataset directly (rows already in [z; y] layout).
  TargetSampler(TargetSpec spec, std::shared_ptr<const Matrix> rows);

  const TargetSpec& spec() const { return spec_; }
  std::size_t dim() const;
  bool categorical() const { return spec_.kind == TargetKind::multinoulli; }
  const Matrix* dataset() const { return rows_.get(); }

  SampleBatch sample(std::size_t count, Rng& rng) const;

 private:
  TargetSpec spec_;
  std::shared_ptr<const Matrix> rows_;
};

}  // namespace icpgen

// IDX reader for the MNIST image and label files.
//
// Layout (all header integers big-endian 32-bit):
//   images: magic 0x00000803, count, rows, cols, then count*rows*cols bytes
//   labels: magic 0x00000801, count, then count bytes

#include <fstream>
#include <iterator>

#include "icpgen/distributions.hpp"

namespace icpgen {

namespace {

std::vector<std::uint8_t> read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IdxError(IdxErrorKind::io, "cannot open IDX file '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset,
                        const std::string& path) {
  if (bytes.size() < offset + 4) {
    throw IdxError(IdxErrorKind::truncated, "IDX file '" + path + "' is truncated in its header");
  }
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void expect_magic(std::uint32_t got, std::uint32_t want, const std::string& path) {
  if (got != want) {
    throw IdxError(IdxErrorKind::bad_magic, "IDX file '" + path + "' has magic number " +
                                                std::to_string(got) + ", expected " +
                                                std::to_string(want));
  }
}

}  // namespace

MnistDataset load_mnist(const std::string& images_path, const std::string& labels_path) {
  const auto image_bytes = read_all(images_path);
  const auto label_bytes = read_all(labels_path);

  expect_magic(read_be32(image_bytes, 0, images_path), kIdxImageMagic, images_path);
  expect_magic(read_be32(label_bytes, 0, labels_path), kIdxLabelMagic, labels_path);

  const std::size_t image_count = read_be32(image_bytes, 4, images_path);
  const std::size_t rows = read_be32(image_bytes, 8, images_path);
  const std::size_t cols = read_be32(image_bytes, 12, images_path);
  const std::size_t label_count = read_be32(label_bytes, 4, labels_path);

  if (image_count != label_count) {
    throw IdxError(IdxErrorKind::count_mismatch,
                   "image count " + std::to_string(image_count) + " differs from label count " +
                       std::to_string(label_count));
  }
  const std::size_t pixels_per_image = rows * cols;
  if (image_bytes.size() < 16 + image_count * pixels_per_image) {
    throw IdxError(IdxErrorKind::truncated, "IDX file '" + images_path + "' is truncated");
  }
  if (label_bytes.size() < 8 + label_count) {
    throw IdxError(IdxErrorKind::truncated, "IDX file '" + labels_path + "' is truncated");
  }

  MnistDataset data;
  data.image_rows = rows;
  data.image_cols = cols;
  data.labels.assign(label_bytes.begin() + 8,
                     label_bytes.begin() + 8 + static_cast<std::ptrdiff_t>(label_count));
  data.pixels = Matrix(image_count, pixels_per_image);
  auto& px = data.pixels.storage();
  for (std::size_t k = 0; k < px.size(); ++k) px[k] = image_bytes[16 + k] / 255.0;
  return data;
}

Matrix mnist_conditioned_rows(const MnistDataset& data, bool normalize_label, std::size_t limit) {
  const std::size_t count = limit == 0 ? data.size() : std::min(limit, data.size());
  const std::size_t dim = data.pixels.cols();
  Matrix out(count, dim + 1);
  for (std::size_t r = 0; r < count; ++r) {
    out(r, 0) = normalize_label ? data.labels[r] / 9.0 : static_cast<double>(data.labels[r]);
    const auto src = data.pixels.row(r);
    std::copy(src.begin(), src.end(), out.row(r).begin() + 1);
  }
  return out;
}

}  // namespace icpgen

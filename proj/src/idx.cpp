#include "gcdl/idx.hpp"

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "gcdl/rng.hpp"

namespace gcdl {
namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::uint32_t read_be_u32(std::istream& in, const std::string& what) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw IngestError("truncated " + what);
  }
  return (static_cast<std::uint32_t>(b[0]) << 24) |
         (static_cast<std::uint32_t>(b[1]) << 16) |
         (static_cast<std::uint32_t>(b[2]) << 8) | static_cast<std::uint32_t>(b[3]);
}

}  // namespace

Dataset load_idx_subset(const std::string& images_path,
                        const std::string& labels_path, int class_a,
                        int class_b, std::size_t subset_m, std::uint64_t seed) {
  if (class_a == class_b) throw std::invalid_argument("class_a and class_b must differ");
  if (class_a < 0 || class_a > 255 || class_b < 0 || class_b > 255) {
    throw std::invalid_argument("classes must be byte values");
  }
  if (subset_m < 1) throw std::invalid_argument("subset_m must be at least 1");

  std::ifstream labels_in(labels_path, std::ios::binary);
  if (!labels_in) throw IngestError("cannot open labels file: " + labels_path);
  if (read_be_u32(labels_in, "labels header") != kLabelsMagic) {
    throw IngestError("bad magic in labels file: " + labels_path);
  }
  const std::uint32_t n_labels = read_be_u32(labels_in, "labels header");
  std::vector<std::uint8_t> labels(n_labels);
  if (n_labels > 0 &&
      !labels_in.read(reinterpret_cast<char*>(labels.data()), n_labels)) {
    throw IngestError("truncated labels file: " + labels_path);
  }

  std::ifstream images_in(images_path, std::ios::binary);
  if (!images_in) throw IngestError("cannot open images file: " + images_path);
  if (read_be_u32(images_in, "images header") != kImagesMagic) {
    throw IngestError("bad magic in images file: " + images_path);
  }
  const std::uint32_t n_images = read_be_u32(images_in, "images header");
  const std::uint32_t rows = read_be_u32(images_in, "images header");
  const std::uint32_t cols = read_be_u32(images_in, "images header");
  if (n_images != n_labels) {
    throw IngestError("image and label counts differ");
  }
  if (rows == 0 || cols == 0) throw IngestError("images have empty dimensions");
  const std::size_t pixels = static_cast<std::size_t>(rows) * cols;

  std::vector<std::uint32_t> candidates;
  for (std::uint32_t i = 0; i < n_labels; ++i) {
    if (labels[i] == class_a || labels[i] == class_b) candidates.push_back(i);
  }
  bool seen_a = false, seen_b = false;
  for (std::uint32_t i : candidates) {
    seen_a = seen_a || labels[i] == class_a;
    seen_b = seen_b || labels[i] == class_b;
  }
  if (!seen_a || !seen_b) throw IngestError("a requested class is absent from the labels");
  if (subset_m > candidates.size()) {
    throw IngestError("subset_m exceeds the available samples of the two classes");
  }

  // Uniform subset without replacement, deterministic in the seed.
  RngStream rng(seed, StreamPurpose::kIdxSubset);
  for (std::size_t k = 0; k < subset_m; ++k) {
    const std::size_t r =
        k + static_cast<std::size_t>(rng.next_below(candidates.size() - k));
    std::swap(candidates[k], candidates[r]);
  }

  Dataset out;
  out.samples.resize(subset_m);
  std::vector<std::uint8_t> buf(pixels);
  for (std::size_t k = 0; k < subset_m; ++k) {
    const std::uint32_t src = candidates[k];
    images_in.seekg(16 + static_cast<std::streamoff>(src) *
                             static_cast<std::streamoff>(pixels));
    if (!images_in.read(reinterpret_cast<char*>(buf.data()), pixels)) {
      throw IngestError("truncated images file: " + images_path);
    }
    DataSample& sample = out.samples[k];
    sample.index = k;
    sample.label = labels[src] == class_a ? -1.0 : 1.0;
    sample.features.resize(pixels);
    for (std::size_t px = 0; px < pixels; ++px) {
      sample.features[px] = static_cast<double>(buf[px]) / 255.0;
    }
  }
  return out;
}

}  // namespace gcdl

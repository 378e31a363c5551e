#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "gcdl/losses.hpp"

namespace testsupport {

// Independent gradient oracle: central differences of the loss with
// per-coordinate step 1e-6 * (|beta_k| + 1).
template <class LossFn>
gcdl::Vector fd_gradient(const LossFn& loss, const gcdl::Vector& beta) {
  gcdl::Vector g(beta.size());
  gcdl::Vector probe = beta;
  for (std::size_t k = 0; k < beta.size(); ++k) {
    const double h = 1e-6 * (std::fabs(beta[k]) + 1.0);
    probe[k] = beta[k] + h;
    const double hi = loss(probe);
    probe[k] = beta[k] - h;
    const double lo = loss(probe);
    probe[k] = beta[k];
    g[k] = (hi - lo) / (2.0 * h);
  }
  return g;
}

inline double rel_vec_error(const gcdl::Vector& got, const gcdl::Vector& want) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < got.size(); ++k) {
    const double d = got[k] - want[k];
    num += d * d;
    den += want[k] * want[k];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-12);
}

inline std::string temp_dir(const std::string& tag) {
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / ("gcdl-tests-" + tag);
  std::filesystem::create_directories(dir);
  return dir.string();
}

inline void write_be_u32(std::ofstream& out, std::uint32_t v) {
  const unsigned char bytes[4] = {
      static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
      static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

// Minimal IDX writers for ingestion tests.
inline void write_idx_images(const std::string& path,
                             const std::vector<std::vector<std::uint8_t>>& images,
                             std::uint32_t rows, std::uint32_t cols) {
  std::ofstream out(path, std::ios::binary);
  write_be_u32(out, 0x00000803);
  write_be_u32(out, static_cast<std::uint32_t>(images.size()));
  write_be_u32(out, rows);
  write_be_u32(out, cols);
  for (const auto& image : images) {
    out.write(reinterpret_cast<const char*>(image.data()),
              static_cast<std::streamsize>(image.size()));
  }
}

inline void write_idx_labels(const std::string& path,
                             const std::vector<std::uint8_t>& labels) {
  std::ofstream out(path, std::ios::binary);
  write_be_u32(out, 0x00000801);
  write_be_u32(out, static_cast<std::uint32_t>(labels.size()));
  out.write(reinterpret_cast<const char*>(labels.data()),
            static_cast<std::streamsize>(labels.size()));
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

}  // namespace testsupport

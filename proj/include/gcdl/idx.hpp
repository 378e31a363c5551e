#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "gcdl/losses.hpp"

namespace gcdl {

struct IngestError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Loads a two-class subset from IDX image/label files (big-endian, magics
// 0x00000803 and 0x00000801). Keeps only rows labeled class_a or class_b,
// samples subset_m of them uniformly without replacement using the seed, maps
// class_a to label -1 and class_b to +1, and flattens pixels row-major scaled
// to [0, 1].
Dataset load_idx_subset(const std::string& images_path,
                        const std::string& labels_path, int class_a,
                        int class_b, std::size_t subset_m, std::uint64_t seed);

}  // namespace gcdl

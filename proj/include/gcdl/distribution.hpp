#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace gcdl {

// Replication degrees: sample i is placed on d[i] distinct workers.
struct RedundancySpec {
  std::vector<int> d;

  static RedundancySpec homogeneous(std::size_t m, int degree) {
    return RedundancySpec{std::vector<int>(m, degree)};
  }
};

// The materialized placement. worker_sets[j] lists the sample indices held by
// worker j, sorted ascending. Immutable once built.
struct Assignment {
  std::vector<std::vector<std::uint32_t>> worker_sets;
  std::vector<int> sample_counts;  // realized replication, equals the spec
  std::size_t n = 0;
  std::size_t m = 0;
};

// Places each sample on a uniformly random d_i-subset of the n workers,
// independently across samples, via a partial Fisher-Yates shuffle on a
// per-sample keyed stream. Expected pairwise overlap is d_i * d_i' / n.
Assignment assign_uniform_random(std::size_t m, std::size_t n,
                                 const RedundancySpec& spec, std::uint64_t seed);

double average_redundancy(const RedundancySpec& spec);

// Sum of 1/d_i; minimized by the homogeneous spec among all specs with the
// same average redundancy.
double inverse_redundancy_objective(const RedundancySpec& spec);

struct OverlapStats {
  double mean_overlap = 0.0;
  double mean_target = 0.0;        // mean of d_i * d_i' / n over examined pairs
  double max_abs_deviation = 0.0;  // max |overlap - target|
  std::uint64_t pairs = 0;
  bool sampled = false;  // true when pairs were subsampled (m > 2000)
};

OverlapStats verify_pairwise_balance(const Assignment& assignment,
                                     const RedundancySpec& spec);

// One line per worker: sorted sample indices, space-separated.
std::string assignment_to_text(const Assignment& assignment);

}  // namespace gcdl

#include "gcdl/distribution.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "gcdl/rng.hpp"

namespace gcdl {
namespace {

void check_spec(std::size_t m, std::size_t n, const RedundancySpec& spec) {
  if (m == 0 || n == 0) throw std::invalid_argument("m and n must be positive");
  if (spec.d.size() != m) throw std::invalid_argument("redundancy spec length does not match m");
  for (int di : spec.d) {
    if (di < 1) throw std::invalid_argument("replication degree must be at least 1");
    if (static_cast<std::size_t>(di) > n) {
      throw std::invalid_argument("replication degree exceeds worker count");
    }
  }
}

std::size_t sorted_intersection_size(const std::vector<std::uint32_t>& a,
                                     const std::vector<std::uint32_t>& b) {
  std::size_t count = 0, ia = 0, ib = 0;
  while (ia < a.size() && ib < b.size()) {
    if (a[ia] < b[ib]) {
      ++ia;
    } else if (b[ib] < a[ia]) {
      ++ib;
    } else {
      ++count;
      ++ia;
      ++ib;
    }
  }
  return count;
}

}  // namespace

Assignment assign_uniform_random(std::size_t m, std::size_t n,
                                 const RedundancySpec& spec, std::uint64_t seed) {
  check_spec(m, n, spec);
  Assignment out;
  out.n = n;
  out.m = m;
  out.worker_sets.resize(n);
  out.sample_counts = spec.d;

  std::vector<std::uint32_t> pool(n);
  for (std::size_t i = 0; i < m; ++i) {
    std::iota(pool.begin(), pool.end(), 0u);
    RngStream rng(seed, StreamPurpose::kAssignment, 0, i);
    const std::size_t degree = static_cast<std::size_t>(spec.d[i]);
    for (std::size_t k = 0; k < degree; ++k) {
      const std::size_t r = k + static_cast<std::size_t>(rng.next_below(n - k));
      std::swap(pool[k], pool[r]);
      out.worker_sets[pool[k]].push_back(static_cast<std::uint32_t>(i));
    }
  }
  return out;
}

double average_redundancy(const RedundancySpec& spec) {
  if (spec.d.empty()) throw std::invalid_argument("redundancy spec is empty");
  double s = 0.0;
  for (int di : spec.d) s += di;
  return s / static_cast<double>(spec.d.size());
}

double inverse_redundancy_objective(const RedundancySpec& spec) {
  if (spec.d.empty()) throw std::invalid_argument("redundancy spec is empty");
  double s = 0.0;
  for (int di : spec.d) {
    if (di < 1) throw std::invalid_argument("replication degree must be at least 1");
    s += 1.0 / static_cast<double>(di);
  }
  return s;
}

OverlapStats verify_pairwise_balance(const Assignment& assignment,
                                     const RedundancySpec& spec) {
  const std::size_t m = assignment.m;
  const std::size_t n = assignment.n;
  check_spec(m, n, spec);

  // Invert worker_sets; scanning workers in order keeps each list sorted.
  std::vector<std::vector<std::uint32_t>> holders(m);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::uint32_t i : assignment.worker_sets[j]) {
      holders[i].push_back(static_cast<std::uint32_t>(j));
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (holders[i].size() != static_cast<std::size_t>(spec.d[i])) {
      throw std::invalid_argument("assignment is inconsistent with the redundancy spec");
    }
  }

  OverlapStats stats;
  double sum_overlap = 0.0, sum_target = 0.0;
  auto consider = [&](std::size_t i1, std::size_t i2) {
    const double overlap =
        static_cast<double>(sorted_intersection_size(holders[i1], holders[i2]));
    const double target = static_cast<double>(spec.d[i1]) *
                          static_cast<double>(spec.d[i2]) / static_cast<double>(n);
    sum_overlap += overlap;
    sum_target += target;
    const double dev = overlap > target ? overlap - target : target - overlap;
    if (dev > stats.max_abs_deviation) stats.max_abs_deviation = dev;
    ++stats.pairs;
  };

  if (m <= 2000) {
    for (std::size_t i1 = 0; i1 + 1 < m; ++i1) {
      for (std::size_t i2 = i1 + 1; i2 < m; ++i2) consider(i1, i2);
    }
  } else {
    stats.sampled = true;
    RngStream rng(0x6f76657275ULL, StreamPurpose::kPairSample);
    const std::uint64_t wanted = 1000000;
    while (stats.pairs < wanted) {
      const std::size_t i1 = static_cast<std::size_t>(rng.next_below(m));
      const std::size_t i2 = static_cast<std::size_t>(rng.next_below(m));
      if (i1 == i2) continue;
      consider(i1, i2);
    }
  }
  if (stats.pairs > 0) {
    stats.mean_overlap = sum_overlap / static_cast<double>(stats.pairs);
    stats.mean_target = sum_target / static_cast<double>(stats.pairs);
  }
  return stats;
}

std::string assignment_to_text(const Assignment& assignment) {
  std::string out;
  char buf[16];
  for (const auto& set : assignment.worker_sets) {
    bool first = true;
    for (std::uint32_t i : set) {
      if (!first) out += ' ';
      std::snprintf(buf, sizeof(buf), "%u", i);
      out += buf;
      first = false;
    }
    out += '\n';
  }
  return out;
}

}  // namespace gcdl

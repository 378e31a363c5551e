#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "gcdl/distribution.hpp"

using namespace gcdl;

TEST_CASE("full replication puts every sample on every worker with zero deviation") {
  const std::size_t m = 12, n = 5;
  const RedundancySpec spec = RedundancySpec::homogeneous(m, static_cast<int>(n));
  const Assignment a = assign_uniform_random(m, n, spec, 3);
  for (std::size_t j = 0; j < n; ++j) REQUIRE(a.worker_sets[j].size() == m);
  const OverlapStats stats = verify_pairwise_balance(a, spec);
  CHECK(stats.max_abs_deviation == 0.0);
  CHECK(stats.mean_overlap == doctest::Approx(static_cast<double>(n)));
}

TEST_CASE("realized counts equal the spec and placement is deterministic in the seed") {
  const std::size_t m = 60, n = 17;
  RedundancySpec spec;
  for (std::size_t i = 0; i < m; ++i) spec.d.push_back(1 + static_cast<int>(i % n));
  const Assignment a = assign_uniform_random(m, n, spec, 11);
  const Assignment b = assign_uniform_random(m, n, spec, 11);
  const Assignment c = assign_uniform_random(m, n, spec, 12);
  CHECK(a.worker_sets == b.worker_sets);
  CHECK(a.worker_sets != c.worker_sets);

  std::vector<int> counts(m, 0);
  for (std::size_t j = 0; j < n; ++j) {
    std::uint32_t prev = 0;
    bool first = true;
    for (std::uint32_t i : a.worker_sets[j]) {
      if (!first) CHECK(i > prev);  // sorted, no duplicates
      prev = i;
      first = false;
      ++counts[i];
    }
  }
  for (std::size_t i = 0; i < m; ++i) CHECK(counts[i] == spec.d[i]);
}

TEST_CASE("singleton placement keeps overlaps at zero when workers are distinct") {
  const std::size_t m = 4, n = 100;
  const RedundancySpec spec = RedundancySpec::homogeneous(m, 1);
  // seed chosen so the four samples land on four distinct workers
  const Assignment a = assign_uniform_random(m, n, spec, 1);
  std::size_t used = 0;
  for (std::size_t j = 0; j < n; ++j) used += a.worker_sets[j].size();
  REQUIRE(used == m);
  const OverlapStats stats = verify_pairwise_balance(a, spec);
  CHECK(stats.mean_overlap == 0.0);
  CHECK(stats.mean_target == doctest::Approx(1.0 / static_cast<double>(n)));
}

TEST_CASE("average redundancy of the three half-half settings is 15") {
  const std::size_t m = 1000;
  RedundancySpec s1 = RedundancySpec::homogeneous(m, 15);
  RedundancySpec s2, s3;
  for (std::size_t i = 0; i < m; ++i) {
    s2.d.push_back(i < m / 2 ? 10 : 20);
    s3.d.push_back(i < m / 2 ? 5 : 25);
  }
  CHECK(average_redundancy(s1) == doctest::Approx(15.0));
  CHECK(average_redundancy(s2) == doctest::Approx(15.0));
  CHECK(average_redundancy(s3) == doctest::Approx(15.0));
  CHECK(inverse_redundancy_objective(s1) < inverse_redundancy_objective(s2));
  CHECK(inverse_redundancy_objective(s2) < inverse_redundancy_objective(s3));
}

TEST_CASE("inverse redundancy objective basics") {
  CHECK(inverse_redundancy_objective(RedundancySpec::homogeneous(30, 6)) ==
        doctest::Approx(5.0));
  CHECK(inverse_redundancy_objective({{10, 20}}) == doctest::Approx(0.15));
  CHECK(inverse_redundancy_objective({{15, 15}}) == doctest::Approx(2.0 / 15.0));
  CHECK(inverse_redundancy_objective({{5, 25}}) == doctest::Approx(0.24));
  CHECK(inverse_redundancy_objective({{10, 20}}) >
        inverse_redundancy_objective({{15, 15}}));
  CHECK(inverse_redundancy_objective({{5, 25}}) >
        inverse_redundancy_objective({{10, 20}}));
}

TEST_CASE("homogeneous spec minimizes the objective among equal-mean integer specs") {
  // all specs d in [1, 6]^4 with sum 12 (mean D = 3), checked exhaustively
  const double best = inverse_redundancy_objective(RedundancySpec::homogeneous(4, 3));
  for (int a = 1; a <= 6; ++a) {
    for (int b = 1; b <= 6; ++b) {
      for (int c = 1; c <= 6; ++c) {
        const int d = 12 - a - b - c;
        if (d < 1 || d > 6) continue;
        const double value = inverse_redundancy_objective({{a, b, c, d}});
        CHECK(value >= best - 1e-12);
        if (!(a == 3 && b == 3 && c == 3)) CHECK(value > best);
      }
    }
  }
}

TEST_CASE("mean pairwise overlap converges to d*d'/n over seeds") {
  const std::size_t m = 200, n = 100;
  const int degree = 20;
  const RedundancySpec spec = RedundancySpec::homogeneous(m, degree);
  const double target = static_cast<double>(degree) * degree / static_cast<double>(n);

  const int num_seeds = 12;
  std::vector<double> per_seed(num_seeds);
  for (int s = 0; s < num_seeds; ++s) {
    const Assignment a = assign_uniform_random(m, n, spec, 1000 + s);
    per_seed[s] = verify_pairwise_balance(a, spec).mean_overlap;
  }
  double mean = 0.0;
  for (double v : per_seed) mean += v;
  mean /= num_seeds;
  double var = 0.0;
  for (double v : per_seed) var += (v - mean) * (v - mean);
  var /= (num_seeds - 1);
  const double se = std::sqrt(var / num_seeds);
  CHECK(std::fabs(mean - target) < 3.0 * std::max(se, 1e-3));
}

TEST_CASE("pair sampling kicks in beyond the exhaustive limit") {
  const std::size_t m = 2100, n = 10;
  const RedundancySpec spec = RedundancySpec::homogeneous(m, 2);
  const Assignment a = assign_uniform_random(m, n, spec, 5);
  const OverlapStats stats = verify_pairwise_balance(a, spec);
  CHECK(stats.sampled);
  CHECK(stats.pairs == 1000000);
  CHECK(std::fabs(stats.mean_overlap - 0.4) < 0.05);
}

TEST_CASE("invalid specs are rejected") {
  CHECK_THROWS_AS(assign_uniform_random(3, 2, RedundancySpec::homogeneous(3, 5), 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(assign_uniform_random(3, 2, RedundancySpec::homogeneous(2, 1), 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(assign_uniform_random(3, 2, {{1, 0, 1}}, 1), std::invalid_argument);
  CHECK_THROWS_AS(average_redundancy(RedundancySpec{}), std::invalid_argument);
}

TEST_CASE("assignment text form lists each worker's sorted samples") {
  RedundancySpec spec{{2, 1}};
  Assignment a;
  a.m = 2;
  a.n = 3;
  a.sample_counts = spec.d;
  a.worker_sets = {{0, 1}, {}, {0}};
  CHECK(assignment_to_text(a) == "0 1\n\n0\n");
}

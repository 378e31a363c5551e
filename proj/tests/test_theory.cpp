#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "gcdl/rng.hpp"
#include "gcdl/simulation.hpp"
#include "gcdl/theory.hpp"
#include "gcdl/verification.hpp"

using namespace gcdl;

namespace {

TheoryParams base_params() {
  TheoryParams params;
  params.C = 1.0;
  params.lambda = 2.0;
  params.S = 0.7;
  params.m = 100;
  params.n = 20;
  params.w = 50;
  params.p = 0.1;
  params.D = 5;
  params.gamma0 = 0.5 * 0.5 / 0.7;
  params.loss0 = 10.0;
  params.loss_star = 0.0;
  return params;
}

}  // namespace

TEST_CASE("second-moment bound evaluates the hand-checked case to 10") {
  TheoryParams params;
  params.C = 1.0;
  params.m = 2;
  params.n = 2;
  params.w = 2;
  params.p = 0.5;
  const RedundancySpec d = RedundancySpec::homogeneous(2, 2);
  CHECK(bound_second_moment(params, d) == doctest::Approx(10.0).epsilon(1e-14));
}

TEST_CASE("second-moment bound collapses to C m^2 when the bracket vanishes") {
  TheoryParams params;
  params.C = 3.0;
  params.m = 4;
  params.n = 5;
  params.p = 0.25;
  params.w = 0.75;  // hypothetical w = 1 - p
  const RedundancySpec d = RedundancySpec::homogeneous(4, 2);
  CHECK(bound_second_moment(params, d) == doctest::Approx(3.0 * 16.0).epsilon(1e-14));
}

TEST_CASE("second-moment bound is strictly increasing in p") {
  TheoryParams params = base_params();
  const RedundancySpec d = RedundancySpec::homogeneous(100, 5);
  double prev = 0.0;
  bool first = true;
  for (double p : {0.0, 0.1, 0.3, 0.6, 0.9}) {
    params.p = p;
    const double value = bound_second_moment(params, d);
    if (!first) CHECK(value > prev);
    prev = value;
    first = false;
  }
}

TEST_CASE("theorem 1 is 4G/(lambda^2 T), halves with doubled T, and prefers homogeneity") {
  TheoryParams params = base_params();
  const RedundancySpec d = RedundancySpec::homogeneous(100, 5);
  const double g = bound_second_moment(params, d);
  const double at10 = bound_theorem1(params, d, 10);
  CHECK(at10 == doctest::Approx(4.0 * g / (params.lambda * params.lambda * 10.0)));
  CHECK(bound_theorem1(params, d, 20) == doctest::Approx(at10 / 2.0));

  RedundancySpec skew;
  for (std::size_t i = 0; i < 100; ++i) skew.d.push_back(i < 50 ? 3 : 7);
  CHECK(average_redundancy(skew) == doctest::Approx(5.0));
  CHECK(bound_theorem1(params, d, 10) < bound_theorem1(params, skew, 10));

  params.lambda = 0.0;
  CHECK_THROWS_AS(bound_theorem1(params, d, 10), std::invalid_argument);
}

TEST_CASE("theorem 2 and 3 bounds decay toward zero and respect preconditions") {
  const TheoryParams params = base_params();

  // first theorem-2 term at T = 15 is (L0 - L*) / 2 since 16^{1/4} = 2;
  // isolate it by sending the gradient bound toward zero
  TheoryParams tiny_c = params;
  tiny_c.C = 1e-300;
  CHECK(bound_theorem2(tiny_c, 15) ==
        doctest::Approx((params.loss0 - params.loss_star) / 2.0).epsilon(1e-12));
  CHECK(bound_theorem2(params, 15) > (params.loss0 - params.loss_star) / 2.0);

  double prev2 = 0.0, prev3 = 0.0;
  bool first = true;
  for (std::uint64_t horizon : {100ull, 10000ull, 1000000ull}) {
    const double b2 = bound_theorem2(params, horizon);
    const double b3 = bound_theorem3(params, horizon);
    CHECK(std::isfinite(b2));
    CHECK(std::isfinite(b3));
    CHECK(b2 > 0.0);
    CHECK(b3 > 0.0);
    if (!first) {
      CHECK(b2 < prev2);
      CHECK(b3 < prev3);
    }
    prev2 = b2;
    prev3 = b3;
    first = false;
  }
  CHECK(bound_theorem2(params, 1000000) < 0.25 * bound_theorem2(params, 100));
  CHECK(bound_theorem3(params, 1000000) < 0.25 * bound_theorem3(params, 100));

  // T = 1 violates T > (4S)^{4/3} - 1 for S = 0.7
  CHECK_THROWS_AS(bound_theorem2(params, 1), std::invalid_argument);
  TheoryParams bad = params;
  bad.gamma0 = 1.0 / bad.S;
  CHECK_THROWS_AS(bound_theorem3(bad, 100), std::invalid_argument);
}

TEST_CASE("exact second moment closed form on degenerate inputs") {
  // single worker, p = 0: every decoded entry is +/- ||f||, so E||g||^2 = w ||f||^2
  std::vector<Vector> one = {{1.0, 0.0}};
  CHECK(exact_second_moment(one, 0.0, 2) == doctest::Approx(2.0).epsilon(1e-14));

  std::vector<Vector> zeros = {{0.0, 0.0}, {0.0, 0.0}};
  CHECK(exact_second_moment(zeros, 0.3, 2) == 0.0);
}

TEST_CASE("exact second moment is bounded below by the straggler-only term") {
  RngStream rng(21, StreamPurpose::kParamInit);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + trial % 3;
    const std::size_t w = 2 + trial % 4;
    std::vector<Vector> fs(n, Vector(w));
    Vector sum(w, 0.0);
    for (auto& f : fs) {
      for (std::size_t k = 0; k < w; ++k) {
        f[k] = rng.next_normal();
        sum[k] += f[k];
      }
    }
    const double p = 0.05 * (trial % 10);
    const double value = exact_second_moment(fs, p, w);
    CHECK(value >= (1.0 - p) * (1.0 - p) * dot(sum, sum) - 1e-12);
  }
}

TEST_CASE("monte-carlo second moment matches the closed form within one percent") {
  const FixedInstance inst = make_regression_instance(2, 2, 2, 2, 0.3, 7);
  const GhatMoments mc = mc_ghat_moments(inst, Method::kOneBitGC, 300000, 11);
  const double exact = exact_second_moment(inst.encoded, inst.p, 2);
  CHECK(std::fabs(mc.mean_norm_sq - exact) < 0.01 * exact);
}

TEST_CASE("homogeneous moment: expectation form equals the realized form when balance is exact") {
  // m = 1 on n workers with full replication: no pairwise term at all
  {
    RegressionData rd = generate_regression_data(1, 3, 1.0, 0.5, 31);
    const LossModel model{LossKind::kLinearRegression, 3};
    const RedundancySpec spec = RedundancySpec::homogeneous(1, 4);
    const Assignment a = assign_uniform_random(1, 4, spec, 31);
    const Vector beta = {0.2, -0.1, 0.4};
    const SecondMomentComparison cmp =
        exact_second_moment_homogeneous(model, rd.dataset, a, beta, 0.2, 3, 4);
    CHECK(cmp.realized_form ==
          doctest::Approx(cmp.expectation_form).epsilon(1e-12));
  }
  // m = 2 on n = 2 workers with d = 2: overlap is exactly d^2/n = 2
  {
    RegressionData rd = generate_regression_data(2, 2, 1.0, 0.5, 32);
    const LossModel model{LossKind::kLinearRegression, 2};
    const RedundancySpec spec = RedundancySpec::homogeneous(2, 2);
    const Assignment a = assign_uniform_random(2, 2, spec, 32);
    const Vector beta = {0.6, 0.3};
    const SecondMomentComparison cmp =
        exact_second_moment_homogeneous(model, rd.dataset, a, beta, 0.3, 2, 2);
    CHECK(cmp.realized_form ==
          doctest::Approx(cmp.expectation_form).epsilon(1e-12));
  }
}

TEST_CASE("homogeneous moment: random placement stays near the expectation form") {
  RegressionData rd = generate_regression_data(200, 10, 1.0, 0.5, 33);
  const LossModel model{LossKind::kLinearRegression, 10};
  const RedundancySpec spec = RedundancySpec::homogeneous(200, 20);
  Vector beta(10);
  RngStream rng(34, StreamPurpose::kParamInit);
  for (double& v : beta) v = rng.next_normal();

  double mean_realized = 0.0;
  double expectation = 0.0;
  const int num_seeds = 10;
  for (int s = 0; s < num_seeds; ++s) {
    const Assignment a = assign_uniform_random(200, 100, spec, 100 + s);
    const SecondMomentComparison cmp =
        exact_second_moment_homogeneous(model, rd.dataset, a, beta, 0.1, 10, 20);
    mean_realized += cmp.realized_form;
    expectation = cmp.expectation_form;
  }
  mean_realized /= num_seeds;
  CHECK(std::fabs(mean_realized - expectation) < 0.05 * expectation);

  const Assignment a = assign_uniform_random(200, 100, spec, 1);
  CHECK_THROWS_AS(
      exact_second_moment_homogeneous(model, rd.dataset, a, beta, 0.1, 10, 19),
      std::invalid_argument);
}

TEST_CASE("monte-carlo second moment stays below the bound at the empirical C") {
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t m = 2 + trial % 3;
    const std::size_t n = 2 + trial % 2;
    const std::size_t w = 2 + trial;
    const int degree = 1 + trial % 2;
    const FixedInstance inst =
        make_regression_instance(m, n, w, degree, 0.1 * (trial + 1), 60 + trial);
    TheoryParams params;
    params.C = max_sample_grad_norm_sq(inst.model, inst.data, inst.beta);
    params.m = static_cast<double>(m);
    params.n = static_cast<double>(n);
    params.w = static_cast<double>(w);
    params.p = inst.p;
    const double bound = bound_second_moment(params, inst.spec);
    const GhatMoments mc = mc_ghat_moments(inst, Method::kOneBitGC, 50000, 70 + trial);
    CHECK(mc.mean_norm_sq <= bound);
    CHECK(exact_second_moment(inst.encoded, inst.p, w) <= bound);
  }
}

TEST_CASE("schedule identities hold to 1e-12 relative") {
  for (double s : {0.2, 1.0, 5.0, 50.0}) {
    for (std::uint64_t horizon : {64ull, 4096ull, 1048576ull}) {
      const double target = 1.0 / std::pow(static_cast<double>(horizon) + 1.0, 0.75);
      if (4.0 * s * target >= 1.0) continue;
      const double gamma = learning_rate(LearningRateSchedule::constant_for(s, horizon), 0);
      CHECK(std::fabs(gamma - gamma * gamma * s - target) <= 1e-12 * target);
    }
    for (double frac : {0.8, 0.2}) {
      const double gamma0 = frac * 0.5 / s;
      const double q0 = gamma0 - gamma0 * gamma0 * s;
      for (std::uint64_t t : {0ull, 3ull, 777ull, 10000000ull}) {
        const double gamma = learning_rate(LearningRateSchedule::decaying(s, gamma0), t);
        const double target = q0 / std::sqrt(static_cast<double>(t) + 1.0);
        CHECK(std::fabs(gamma - gamma * gamma * s - target) <= 1e-12 * target);
      }
    }
  }
}

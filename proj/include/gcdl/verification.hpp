#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gcdl/distribution.hpp"
#include "gcdl/losses.hpp"
#include "gcdl/method.hpp"

namespace gcdl {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// A small learning instance with per-worker encoded vectors fixed at one beta,
// used by the Monte-Carlo oracles.
struct FixedInstance {
  LossModel model;
  Dataset data;
  RedundancySpec spec;
  Assignment assignment;
  Vector beta;
  std::size_t n = 0;
  double p = 0.0;
  std::vector<Vector> encoded;  // f_j per worker
};

FixedInstance make_regression_instance(std::size_t m, std::size_t n,
                                       std::size_t w, int degree, double p,
                                       std::uint64_t seed);

struct GhatMoments {
  Vector mean;          // per-coordinate Monte-Carlo mean of g_hat
  Vector se;            // per-coordinate standard error of the mean
  double mean_norm_sq = 0.0;
  double se_norm_sq = 0.0;
  std::uint64_t draws = 0;
};

// Resamples (straggler mask, quantizer) at the instance's fixed beta. The
// real-valued baseline skips the quantizer.
GhatMoments mc_ghat_moments(const FixedInstance& instance, Method method,
                            std::uint64_t draws, std::uint64_t seed);

struct VerifyOptions {
  std::uint64_t seed = 2026;
  std::uint64_t mc_draws = 200000;
};

// The built-in oracle suite: gradient checks, quantizer unbiasedness and
// second moment, aggregate unbiasedness, exact-moment vs Monte-Carlo,
// second-moment bound consistency, schedule identities, codec round-trip.
std::vector<CheckResult> run_verification_suite(const VerifyOptions& options);

}  // namespace gcdl

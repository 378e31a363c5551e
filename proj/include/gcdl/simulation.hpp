#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "gcdl/distribution.hpp"
#include "gcdl/losses.hpp"
#include "gcdl/method.hpp"
#include "gcdl/quantization.hpp"

namespace gcdl {

struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LearningRateSchedule {
  enum class Kind { kInverseLambdaT, kConstant, kDecaying, kFixedGamma };

  Kind kind = Kind::kFixedGamma;
  double lambda = 0.0;        // kInverseLambdaT: gamma_t = 1 / (lambda * t)
  double smoothness = 0.0;    // S, for kConstant and kDecaying
  std::uint64_t horizon = 0;  // T, for kConstant
  double gamma0 = 0.0;        // kDecaying initial rate; kFixedGamma value

  static LearningRateSchedule inverse_lambda_t(double lambda);
  static LearningRateSchedule constant_for(double smoothness, std::uint64_t horizon);
  static LearningRateSchedule decaying(double smoothness, double gamma0);
  static LearningRateSchedule fixed(double gamma);
};

// gamma_t of the schedule. The inverse schedule needs t >= 1; the constant
// schedule ignores t and requires horizon > (4S)^{4/3} - 1; the decaying
// schedule is defined from t = 0 and satisfies
// gamma_t - gamma_t^2 S = (gamma0 - gamma0^2 S) / sqrt(t + 1).
double learning_rate(const LearningRateSchedule& schedule, std::uint64_t t);

struct SimConfig {
  Method method = Method::kOneBitGC;
  LossModel model;
  const Dataset* dataset = nullptr;
  RedundancySpec spec;
  std::size_t n = 0;
  double p = 0.0;  // straggler probability, must be < 1
  LearningRateSchedule schedule;
  std::uint64_t iterations = 0;
  std::uint64_t seed = 0;
  BitBudget budget;
  Vector beta0;                       // empty: standard normal from the seed
  const Vector* beta_star = nullptr;  // enables the parameter-error metric
};

struct TraceRow {
  std::uint64_t t = 0;
  std::uint64_t cumulative_bits = 0;  // t * payload_bits(method, budget)
  double loss = 0.0;
  double sqrt_two_loss = 0.0;
  std::optional<double> param_error;
  double grad_norm_sq = 0.0;
};

struct RunResult {
  std::vector<TraceRow> trace;
  bool diverged = false;
  std::uint64_t diverged_at = 0;  // iteration where the run went non-finite
  double max_sample_grad_norm_sq = 0.0;
  Vector beta;  // final parameter vector
};

// Worker j is a non-straggler with probability 1 - p, drawn from a stream
// keyed by (seed, t, j) so the mask does not depend on evaluation order.
std::vector<bool> sample_straggler_mask(std::size_t n, double p,
                                        std::uint64_t seed, std::uint64_t t);

// f_j = sum_{i in S_j} grad_i / (d_i (1 - p)).
Vector local_encode(std::size_t worker, const Assignment& assignment, double p,
                    const GradTable& grads);
Vector local_encode(std::size_t worker, const Assignment& assignment, double p,
                    const LossModel& model, const Dataset& data, const Vector& beta);

// Global update vector: sum over non-straggler workers of the decoded
// payloads (1-bit methods) or of the raw encoded vectors (real-valued
// baseline).
Vector aggregate_payloads(const std::vector<WorkerPayload>& payloads,
                          const std::vector<bool>& mask, std::size_t w);
Vector aggregate_vectors(const std::vector<Vector>& encoded,
                         const std::vector<bool>& mask, std::size_t w);

// beta - gamma * g_hat; throws DivergenceError if the result is non-finite.
Vector step(const Vector& beta, const Vector& g_hat, double gamma);

double metric_sqrt_two_loss(double loss);
double metric_param_error(const Vector& beta, const Vector& beta_star);

// Executes one full learning run. Row 0 holds the initial point; row t the
// state after update t. A non-finite update or metric halts the run and
// flags the result instead of throwing.
RunResult run(const SimConfig& config);

}  // namespace gcdl

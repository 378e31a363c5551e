#include "gcdl/theory.hpp"

#include <cmath>
#include <stdexcept>

#include "gcdl/simulation.hpp"

namespace gcdl {
namespace {

void check_common(const TheoryParams& params) {
  if (params.C <= 0.0) throw std::invalid_argument("C must be positive");
  if (params.p < 0.0 || params.p >= 1.0) throw std::invalid_argument("p must be in [0, 1)");
  if (params.m < 1.0 || params.n < 1.0 || params.w < 0.0) {
    throw std::invalid_argument("m, n must be at least 1 and w nonnegative");
  }
}

// (w - (1-p)) / (1-p) * ((m-1)/n + 1/D), the variance factor shared by the
// non-convex bounds.
double homogeneous_variance_factor(const TheoryParams& params) {
  if (params.D < 1.0) throw std::invalid_argument("D must be at least 1");
  const double q = 1.0 - params.p;
  return (params.w - q) / q * ((params.m - 1.0) / params.n + 1.0 / params.D);
}

}  // namespace

double bound_second_moment(const TheoryParams& params, const RedundancySpec& d) {
  check_common(params);
  if (d.d.empty()) throw std::invalid_argument("redundancy spec is empty");
  if (static_cast<double>(d.d.size()) != params.m) {
    throw std::invalid_argument("redundancy spec length does not match m");
  }
  const double q = 1.0 - params.p;
  const double m = params.m;
  const double inv_sum = inverse_redundancy_objective(d);
  return params.C * m * m +
         (params.w - q) * (m * m - m) / (params.n * q) * params.C +
         (params.w - q) / q * params.C * inv_sum;
}

double bound_theorem1(const TheoryParams& params, const RedundancySpec& d,
                      std::uint64_t T) {
  if (params.lambda <= 0.0) throw std::invalid_argument("lambda must be positive");
  if (T < 1) throw std::invalid_argument("T must be at least 1");
  const double g = bound_second_moment(params, d);
  return 4.0 * g / (params.lambda * params.lambda * static_cast<double>(T));
}

double bound_theorem2(const TheoryParams& params, std::uint64_t T) {
  check_common(params);
  if (params.S <= 0.0) throw std::invalid_argument("smoothness must be positive");
  const double t1 = static_cast<double>(T) + 1.0;
  const double gamma =
      learning_rate(LearningRateSchedule::constant_for(params.S, T), 0);
  const double factor = homogeneous_variance_factor(params);
  return (params.loss0 - params.loss_star) / std::pow(t1, 0.25) +
         std::pow(t1, 0.75) * gamma * gamma * factor * params.C * params.m * params.S;
}

double bound_theorem3(const TheoryParams& params, std::uint64_t T) {
  check_common(params);
  if (params.S <= 0.0) throw std::invalid_argument("smoothness must be positive");
  if (params.gamma0 <= 0.0 || params.gamma0 >= 0.5 / params.S) {
    throw std::invalid_argument("gamma0 must satisfy 0 < gamma0 < 1/(2S)");
  }
  const double t1 = static_cast<double>(T) + 1.0;
  const double q0 = params.gamma0 - params.gamma0 * params.gamma0 * params.S;
  const double denom = q0 * std::sqrt(t1);
  const double factor = homogeneous_variance_factor(params);
  return (params.loss0 - params.loss_star) / denom +
         params.gamma0 * params.gamma0 * (2.0 + std::log(t1)) / denom * factor *
             params.C * params.m * params.S;
}

double exact_second_moment(std::span<const Vector> worker_vectors, double p,
                           std::size_t w) {
  if (p < 0.0 || p >= 1.0) throw std::invalid_argument("p must be in [0, 1)");
  if (w < 1) throw std::invalid_argument("w must be at least 1");
  if (worker_vectors.empty()) return 0.0;
  Vector sum(w, 0.0);
  double sum_norm_sq = 0.0;
  for (const Vector& f : worker_vectors) {
    if (f.size() != w) throw std::invalid_argument("worker vector length differs from w");
    for (std::size_t k = 0; k < w; ++k) sum[k] += f[k];
    sum_norm_sq += dot(f, f);
  }
  const double q = 1.0 - p;
  return q * q * dot(sum, sum) + q * (static_cast<double>(w) - q) * sum_norm_sq;
}

SecondMomentComparison exact_second_moment_homogeneous(
    const LossModel& model, const Dataset& data, const Assignment& assignment,
    const Vector& beta, double p, std::size_t w, int D) {
  if (D < 1) throw std::invalid_argument("D must be at least 1");
  if (p < 0.0 || p >= 1.0) throw std::invalid_argument("p must be in [0, 1)");
  for (int di : assignment.sample_counts) {
    if (di != D) throw std::invalid_argument("assignment is not homogeneous with degree D");
  }

  const GradTable grads(model, data, beta);
  const Vector g_total = grads.total();
  const double total_sq = dot(g_total, g_total);
  double sum_norm_sq = 0.0;
  for (std::size_t i = 0; i < grads.rows(); ++i) sum_norm_sq += grads.row_norm_sq(i);
  const double cross = total_sq - sum_norm_sq;  // sum over i1 != i2 of <g_i1, g_i2>

  const double q = 1.0 - p;
  SecondMomentComparison out;
  out.expectation_form =
      total_sq + (static_cast<double>(w) - q) / q *
                     (cross / static_cast<double>(assignment.n) +
                      sum_norm_sq / static_cast<double>(D));

  std::vector<Vector> encoded(assignment.n);
  for (std::size_t j = 0; j < assignment.n; ++j) {
    encoded[j] = local_encode(j, assignment, p, grads);
  }
  out.realized_form = exact_second_moment(encoded, p, w);
  return out;
}

double max_sample_grad_norm_sq(const LossModel& model, const Dataset& data,
                               const Vector& beta) {
  return GradTable(model, data, beta).max_row_norm_sq();
}

}  // namespace gcdl

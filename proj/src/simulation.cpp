#include "gcdl/simulation.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "gcdl/rng.hpp"

namespace gcdl {
namespace {

bool all_finite(const Vector& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

// gamma = (1 - sqrt(1 - x)) / (2 S) evaluated as 2 q / (1 + sqrt(1 - x)) with
// x = 4 S q, which avoids the cancellation in 1 - sqrt(1 - x) for small x.
double quadratic_rate(double smoothness, double q, const char* what) {
  const double x = 4.0 * smoothness * q;
  if (!(x <= 1.0)) throw std::invalid_argument(what);  // negative discriminant
  return 2.0 * q / (1.0 + std::sqrt(1.0 - x));
}

// Schedule index used for the update producing trace row t (t >= 1). The
// decaying schedule counts from 0 so the first update uses gamma0; the
// inverse schedule counts from 1 as 1/(lambda t) requires.
double rate_for_iteration(const LearningRateSchedule& schedule, std::uint64_t t) {
  switch (schedule.kind) {
    case LearningRateSchedule::Kind::kInverseLambdaT:
    case LearningRateSchedule::Kind::kFixedGamma:
    case LearningRateSchedule::Kind::kConstant:
      return learning_rate(schedule, t);
    case LearningRateSchedule::Kind::kDecaying:
      return learning_rate(schedule, t - 1);
  }
  return 0.0;
}

}  // namespace

const char* method_name(Method method) {
  switch (method) {
    case Method::kOneBitGC: return "onebit-gc";
    case Method::kSGC: return "sgc";
    case Method::kIgnoreStragglers1Bit: return "ignore-stragglers-1bit";
  }
  return "?";
}

std::optional<Method> method_from_name(std::string_view name) {
  if (name == "onebit-gc") return Method::kOneBitGC;
  if (name == "sgc") return Method::kSGC;
  if (name == "ignore-stragglers-1bit") return Method::kIgnoreStragglers1Bit;
  return std::nullopt;
}

LearningRateSchedule LearningRateSchedule::inverse_lambda_t(double lambda) {
  LearningRateSchedule s;
  s.kind = Kind::kInverseLambdaT;
  s.lambda = lambda;
  return s;
}

LearningRateSchedule LearningRateSchedule::constant_for(double smoothness,
                                                        std::uint64_t horizon) {
  LearningRateSchedule s;
  s.kind = Kind::kConstant;
  s.smoothness = smoothness;
  s.horizon = horizon;
  return s;
}

LearningRateSchedule LearningRateSchedule::decaying(double smoothness, double gamma0) {
  LearningRateSchedule s;
  s.kind = Kind::kDecaying;
  s.smoothness = smoothness;
  s.gamma0 = gamma0;
  return s;
}

LearningRateSchedule LearningRateSchedule::fixed(double gamma) {
  LearningRateSchedule s;
  s.kind = Kind::kFixedGamma;
  s.gamma0 = gamma;
  return s;
}

double learning_rate(const LearningRateSchedule& schedule, std::uint64_t t) {
  switch (schedule.kind) {
    case LearningRateSchedule::Kind::kInverseLambdaT: {
      if (schedule.lambda <= 0.0) throw std::invalid_argument("lambda must be positive");
      if (t < 1) throw std::invalid_argument("inverse schedule requires t >= 1");
      return 1.0 / (schedule.lambda * static_cast<double>(t));
    }
    case LearningRateSchedule::Kind::kConstant: {
      if (schedule.smoothness <= 0.0) {
        throw std::invalid_argument("smoothness must be positive");
      }
      const double q =
          1.0 / std::pow(static_cast<double>(schedule.horizon) + 1.0, 0.75);
      return quadratic_rate(schedule.smoothness, q,
                            "constant schedule requires T > (4S)^(4/3) - 1");
    }
    case LearningRateSchedule::Kind::kDecaying: {
      if (schedule.smoothness <= 0.0) {
        throw std::invalid_argument("smoothness must be positive");
      }
      if (schedule.gamma0 <= 0.0 ||
          schedule.gamma0 >= 0.5 / schedule.smoothness) {
        throw std::invalid_argument("decaying schedule requires 0 < gamma0 < 1/(2S)");
      }
      const double q0 = schedule.gamma0 - schedule.gamma0 * schedule.gamma0 * schedule.smoothness;
      const double q = q0 / std::sqrt(static_cast<double>(t) + 1.0);
      return quadratic_rate(schedule.smoothness, q, "decaying schedule is infeasible");
    }
    case LearningRateSchedule::Kind::kFixedGamma:
      if (schedule.gamma0 < 0.0) throw std::invalid_argument("gamma must be nonnegative");
      return schedule.gamma0;
  }
  return 0.0;
}

std::vector<bool> sample_straggler_mask(std::size_t n, double p,
                                        std::uint64_t seed, std::uint64_t t) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("p must be in [0, 1]");
  std::vector<bool> mask(n);
  for (std::size_t j = 0; j < n; ++j) {
    RngStream rng(seed, StreamPurpose::kStraggler, t, j);
    mask[j] = rng.next_bernoulli(1.0 - p);
  }
  return mask;
}

Vector local_encode(std::size_t worker, const Assignment& assignment, double p,
                    const GradTable& grads) {
  if (p < 0.0 || p >= 1.0) throw std::invalid_argument("p must be in [0, 1)");
  if (worker >= assignment.n) throw std::invalid_argument("worker index out of range");
  Vector f(grads.width(), 0.0);
  for (std::uint32_t i : assignment.worker_sets[worker]) {
    const double coeff =
        1.0 / (static_cast<double>(assignment.sample_counts[i]) * (1.0 - p));
    grads.add_row(i, coeff, f);
  }
  return f;
}

Vector local_encode(std::size_t worker, const Assignment& assignment, double p,
                    const LossModel& model, const Dataset& data, const Vector& beta) {
  const GradTable grads(model, data, beta);
  return local_encode(worker, assignment, p, grads);
}

Vector aggregate_payloads(const std::vector<WorkerPayload>& payloads,
                          const std::vector<bool>& mask, std::size_t w) {
  Vector acc(w, 0.0);
  for (std::size_t j = 0; j < payloads.size(); ++j) {
    if (j < mask.size() && mask[j]) add_dequantized(payloads[j], acc);
  }
  return acc;
}

Vector aggregate_vectors(const std::vector<Vector>& encoded,
                         const std::vector<bool>& mask, std::size_t w) {
  Vector acc(w, 0.0);
  for (std::size_t j = 0; j < encoded.size(); ++j) {
    if (j < mask.size() && mask[j]) {
      for (std::size_t k = 0; k < w; ++k) acc[k] += encoded[j][k];
    }
  }
  return acc;
}

Vector step(const Vector& beta, const Vector& g_hat, double gamma) {
  if (beta.size() != g_hat.size()) {
    throw std::invalid_argument("update vector length does not match beta");
  }
  Vector next(beta.size());
  for (std::size_t k = 0; k < beta.size(); ++k) {
    next[k] = beta[k] - gamma * g_hat[k];
    if (!std::isfinite(next[k])) throw DivergenceError("parameter update is not finite");
  }
  return next;
}

double metric_sqrt_two_loss(double loss) {
  if (loss < 0.0) throw std::invalid_argument("loss must be nonnegative");
  return std::sqrt(2.0 * loss);
}

double metric_param_error(const Vector& beta, const Vector& beta_star) {
  if (beta.size() != beta_star.size()) {
    throw std::invalid_argument("beta and beta_star lengths differ");
  }
  double s = 0.0;
  for (std::size_t k = 0; k < beta.size(); ++k) {
    const double d = beta[k] - beta_star[k];
    s += d * d;
  }
  return std::sqrt(s);
}

RunResult run(const SimConfig& config) {
  if (config.dataset == nullptr) throw std::invalid_argument("config has no dataset");
  const Dataset& data = *config.dataset;
  const std::size_t w = config.model.w;
  const std::size_t m = data.size();
  if (config.n < 1) throw std::invalid_argument("n must be at least 1");
  if (config.p < 0.0 || config.p >= 1.0) throw std::invalid_argument("p must be in [0, 1)");
  if (config.budget.w != w) throw std::invalid_argument("bit budget dimension differs from model");
  if (config.method == Method::kIgnoreStragglers1Bit) {
    for (int di : config.spec.d) {
      if (di != 1) {
        throw std::invalid_argument("ignore-stragglers requires replication degree 1");
      }
    }
  }

  const Assignment assignment = assign_uniform_random(m, config.n, config.spec, config.seed);

  Vector beta = config.beta0;
  if (beta.empty()) {
    beta.resize(w);
    RngStream init(config.seed, StreamPurpose::kParamInit);
    for (double& v : beta) v = init.next_normal();
  } else if (beta.size() != w) {
    throw std::invalid_argument("beta0 length does not match model dimension");
  }

  const std::uint64_t rho = payload_bits(config.method, config.budget);

  RunResult result;
  result.trace.reserve(config.iterations + 1);

  // (worker, sample) pairs grouped into sample chunks and ordered by worker
  // inside each chunk: feature rows of a chunk stay cached while every
  // worker's partial sum is updated, and each f_j still accumulates its
  // samples in ascending order exactly like local_encode.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> encode_pairs;
  {
    constexpr std::size_t kChunk = 32;
    const std::size_t nchunks = (m + kChunk - 1) / kChunk;
    std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> buckets(nchunks);
    for (std::size_t j = 0; j < config.n; ++j) {
      for (std::uint32_t i : assignment.worker_sets[j]) {
        buckets[i / kChunk].emplace_back(static_cast<std::uint32_t>(j), i);
      }
    }
    for (const auto& bucket : buckets) {
      encode_pairs.insert(encode_pairs.end(), bucket.begin(), bucket.end());
    }
  }
  std::vector<double> encode_coeff(m);
  for (std::size_t i = 0; i < m; ++i) {
    encode_coeff[i] =
        1.0 / (static_cast<double>(assignment.sample_counts[i]) * (1.0 - config.p));
  }

  // Returns false when a metric is non-finite.
  auto record = [&](std::uint64_t t, const GradTable& table) {
    TraceRow row;
    row.t = t;
    row.cumulative_bits = t * rho;
    row.loss = table.point_loss();
    const Vector g = table.total();
    row.grad_norm_sq = dot(g, g);
    if (!std::isfinite(row.loss) || row.loss < 0.0 || !std::isfinite(row.grad_norm_sq)) {
      return false;
    }
    row.sqrt_two_loss = metric_sqrt_two_loss(row.loss);
    if (config.beta_star != nullptr) {
      row.param_error = metric_param_error(beta, *config.beta_star);
    }
    result.trace.push_back(row);
    return true;
  };

  GradTable table(config.model, data, beta);
  result.max_sample_grad_norm_sq = table.max_row_norm_sq();
  if (!record(0, table)) {
    throw std::invalid_argument("initial point has non-finite loss");
  }

  std::vector<Vector> encoded(config.n, Vector(w, 0.0));
  std::vector<WorkerPayload> payloads(config.n);

  for (std::uint64_t t = 1; t <= config.iterations; ++t) {
    const std::vector<bool> mask = sample_straggler_mask(config.n, config.p, config.seed, t);
    bool finite = true;
    Vector g_hat;

    for (std::size_t j = 0; j < config.n; ++j) {
      if (mask[j]) encoded[j].assign(w, 0.0);
    }
    for (const auto& [j, i] : encode_pairs) {
      if (mask[j]) table.add_row(i, encode_coeff[i], encoded[j]);
    }
    for (std::size_t j = 0; j < config.n && finite; ++j) {
      if (mask[j]) finite = all_finite(encoded[j]);
    }

    if (finite) {
      if (config.method == Method::kSGC) {
        g_hat = aggregate_vectors(encoded, mask, w);
      } else {
        for (std::size_t j = 0; j < config.n; ++j) {
          if (!mask[j]) continue;
          RngStream qrng(config.seed, StreamPurpose::kQuantizer, t, j);
          payloads[j] = quantize(encoded[j], qrng);
        }
        g_hat = aggregate_payloads(payloads, mask, w);
      }
    }

    if (finite) {
      const double gamma = rate_for_iteration(config.schedule, t);
      try {
        beta = step(beta, g_hat, gamma);
      } catch (const DivergenceError&) {
        finite = false;
      }
    }
    if (finite) {
      table.rebind(beta);
      const double worst = table.max_row_norm_sq();
      if (std::isfinite(worst) && record(t, table)) {
        if (worst > result.max_sample_grad_norm_sq) result.max_sample_grad_norm_sq = worst;
      } else {
        finite = false;
      }
    }
    if (!finite) {
      result.diverged = true;
      result.diverged_at = t;
      break;
    }
  }
  result.beta = std::move(beta);
  return result;
}

}  // namespace gcdl

#include "gcdl/verification.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "gcdl/quantization.hpp"
#include "gcdl/rng.hpp"
#include "gcdl/simulation.hpp"
#include "gcdl/theory.hpp"

namespace gcdl {
namespace {

std::string describe(double got, double want) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "got %.6g, want %.6g", got, want);
  return buf;
}

// Central finite differences with per-coordinate step 1e-6 * (|beta_k| + 1).
Vector fd_total_grad(const LossModel& model, const Dataset& data, const Vector& beta) {
  Vector g(beta.size());
  Vector probe = beta;
  for (std::size_t k = 0; k < beta.size(); ++k) {
    const double h = 1e-6 * (std::fabs(beta[k]) + 1.0);
    probe[k] = beta[k] + h;
    const double hi = total_loss(model, data, probe);
    probe[k] = beta[k] - h;
    const double lo = total_loss(model, data, probe);
    probe[k] = beta[k];
    g[k] = (hi - lo) / (2.0 * h);
  }
  return g;
}

double rel_vec_error(const Vector& got, const Vector& want) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < got.size(); ++k) {
    const double d = got[k] - want[k];
    num += d * d;
    den += want[k] * want[k];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-12);
}

std::uint64_t kind_seed(std::uint64_t seed, LossKind kind) {
  return seed * 1000003u + static_cast<std::uint64_t>(kind);
}

CheckResult gradient_check(LossKind kind, std::uint64_t seed) {
  CheckResult result;
  result.name = std::string("gradient-fd-") + loss_kind_name(kind);
  RngStream rng(kind_seed(seed, kind), StreamPurpose::kParamInit);
  double worst = 0.0;
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t m = 4;
    const std::size_t w = kind == LossKind::kRosenbrock ? m + 1 : 6;
    Dataset data;
    data.samples.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      DataSample& sample = data.samples[i];
      sample.index = i;
      if (kind != LossKind::kRosenbrock) {
        sample.features.resize(w);
        for (double& v : sample.features) v = rng.next_normal();
        sample.label = kind == LossKind::kLogistic
                           ? (rng.next_double() < 0.5 ? -1.0 : 1.0)
                           : rng.next_normal();
      }
    }
    Vector beta(w);
    for (double& v : beta) v = rng.next_normal();
    const LossModel model{kind, w};
    const double err = rel_vec_error(total_grad(model, data, beta),
                                     fd_total_grad(model, data, beta));
    worst = std::max(worst, err);
  }
  result.pass = worst < 1e-5;
  result.detail = describe(worst, 1e-5);
  return result;
}

}  // namespace

FixedInstance make_regression_instance(std::size_t m, std::size_t n,
                                       std::size_t w, int degree, double p,
                                       std::uint64_t seed) {
  FixedInstance inst;
  RegressionData rd = generate_regression_data(m, w, 1.0, 0.5, seed);
  inst.data = std::move(rd.dataset);
  inst.model = LossModel{LossKind::kLinearRegression, w};
  inst.spec = RedundancySpec::homogeneous(m, degree);
  inst.assignment = assign_uniform_random(m, n, inst.spec, seed);
  inst.n = n;
  inst.p = p;
  inst.beta.resize(w);
  RngStream rng(seed, StreamPurpose::kParamInit, 1);
  for (double& v : inst.beta) v = rng.next_normal();
  const GradTable grads(inst.model, inst.data, inst.beta);
  inst.encoded.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    inst.encoded[j] = local_encode(j, inst.assignment, p, grads);
  }
  return inst;
}

GhatMoments mc_ghat_moments(const FixedInstance& instance, Method method,
                            std::uint64_t draws, std::uint64_t seed) {
  const std::size_t w = instance.model.w;
  GhatMoments out;
  out.draws = draws;
  Vector sum(w, 0.0), sum_sq(w, 0.0);
  double norm_sum = 0.0, norm_sum_sq = 0.0;

  for (std::uint64_t r = 1; r <= draws; ++r) {
    const std::vector<bool> mask =
        sample_straggler_mask(instance.n, instance.p, seed, r);
    Vector g_hat(w, 0.0);
    for (std::size_t j = 0; j < instance.n; ++j) {
      if (!mask[j]) continue;
      if (method == Method::kSGC) {
        for (std::size_t k = 0; k < w; ++k) g_hat[k] += instance.encoded[j][k];
      } else {
        RngStream qrng(seed, StreamPurpose::kQuantizer, r, j);
        const WorkerPayload payload = quantize(instance.encoded[j], qrng);
        add_dequantized(payload, g_hat);
      }
    }
    double norm_sq = 0.0;
    for (std::size_t k = 0; k < w; ++k) {
      sum[k] += g_hat[k];
      sum_sq[k] += g_hat[k] * g_hat[k];
      norm_sq += g_hat[k] * g_hat[k];
    }
    norm_sum += norm_sq;
    norm_sum_sq += norm_sq * norm_sq;
  }

  const double count = static_cast<double>(draws);
  out.mean.resize(w);
  out.se.resize(w);
  for (std::size_t k = 0; k < w; ++k) {
    out.mean[k] = sum[k] / count;
    const double var = std::max(0.0, sum_sq[k] / count - out.mean[k] * out.mean[k]);
    out.se[k] = std::sqrt(var / count);
  }
  out.mean_norm_sq = norm_sum / count;
  const double var = std::max(0.0, norm_sum_sq / count - out.mean_norm_sq * out.mean_norm_sq);
  out.se_norm_sq = std::sqrt(var / count);
  return out;
}

std::vector<CheckResult> run_verification_suite(const VerifyOptions& options) {
  std::vector<CheckResult> results;

  results.push_back(gradient_check(LossKind::kLinearRegression, options.seed));
  results.push_back(gradient_check(LossKind::kRosenbrock, options.seed));
  results.push_back(gradient_check(LossKind::kLogistic, options.seed));

  {
    CheckResult result;
    result.name = "quantizer-unbiasedness";
    const Vector f = {0.9, -1.7, 0.0, 2.4, -0.2, 1.1, 0.4, -3.0};
    const double norm_sq = dot(f, f);
    Vector sum(f.size(), 0.0);
    RngStream rng(options.seed, StreamPurpose::kQuantizer, 99);
    for (std::uint64_t r = 0; r < options.mc_draws; ++r) {
      const WorkerPayload payload = quantize(f, rng);
      add_dequantized(payload, sum);
    }
    double worst_sigma = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
      const double mean = sum[k] / static_cast<double>(options.mc_draws);
      const double se =
          std::sqrt((norm_sq - f[k] * f[k]) / static_cast<double>(options.mc_draws));
      worst_sigma = std::max(worst_sigma, std::fabs(mean - f[k]) / se);
    }
    result.pass = worst_sigma < 4.0;
    result.detail = describe(worst_sigma, 4.0);
    results.push_back(result);
  }

  {
    CheckResult result;
    result.name = "quantizer-second-moment";
    const Vector f = {1.5, -0.5, 0.25, 2.0, -1.0};
    const double norm_sq = dot(f, f);
    RngStream rng(options.seed, StreamPurpose::kQuantizer, 100);
    bool exact = true;
    for (int r = 0; r < 1000 && exact; ++r) {
      const WorkerPayload payload = quantize(f, rng);
      const Vector decoded = dequantize(payload);
      double got = 0.0;
      for (double v : decoded) {
        exact = exact && std::fabs(v) == payload.norm;
        got += v * v;
      }
      exact = exact && std::fabs(got - f.size() * norm_sq) <=
                           1e-12 * f.size() * norm_sq;
    }
    result.pass = exact;
    result.detail = exact ? "every entry is +/- the norm" : "entry mismatch";
    results.push_back(result);
  }

  {
    CheckResult result;
    result.name = "aggregate-unbiasedness";
    const FixedInstance inst = make_regression_instance(2, 2, 2, 2, 0.3, options.seed);
    const GhatMoments mc =
        mc_ghat_moments(inst, Method::kOneBitGC, options.mc_draws, options.seed + 1);
    const Vector grad = total_grad(inst.model, inst.data, inst.beta);
    double worst_sigma = 0.0;
    for (std::size_t k = 0; k < grad.size(); ++k) {
      worst_sigma = std::max(worst_sigma, std::fabs(mc.mean[k] - grad[k]) / mc.se[k]);
    }
    result.pass = worst_sigma < 4.0;
    result.detail = describe(worst_sigma, 4.0);
    results.push_back(result);
  }

  {
    CheckResult result;
    result.name = "exact-second-moment-mc";
    const FixedInstance inst = make_regression_instance(2, 2, 2, 2, 0.3, options.seed);
    const GhatMoments mc =
        mc_ghat_moments(inst, Method::kOneBitGC, options.mc_draws, options.seed + 2);
    const double exact = exact_second_moment(inst.encoded, inst.p, inst.model.w);
    const double rel = std::fabs(mc.mean_norm_sq - exact) / exact;
    result.pass = rel < 0.01;
    result.detail = describe(rel, 0.01);
    results.push_back(result);
  }

  {
    CheckResult result;
    result.name = "second-moment-bound";
    bool ok = true;
    double worst_ratio = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
      const std::size_t m = 2 + trial % 3;
      const std::size_t n = 2 + trial % 2;
      const std::size_t w = 2 + trial;
      const int degree = 1 + trial % static_cast<int>(n);
      const FixedInstance inst =
          make_regression_instance(m, n, w, degree, 0.1 * (trial + 1), options.seed + trial);
      TheoryParams params;
      params.C = max_sample_grad_norm_sq(inst.model, inst.data, inst.beta);
      params.m = static_cast<double>(m);
      params.n = static_cast<double>(n);
      params.w = static_cast<double>(w);
      params.p = inst.p;
      const double bound = bound_second_moment(params, inst.spec);
      const GhatMoments mc =
          mc_ghat_moments(inst, Method::kOneBitGC, options.mc_draws / 4, options.seed + 3);
      ok = ok && mc.mean_norm_sq <= bound;
      worst_ratio = std::max(worst_ratio, mc.mean_norm_sq / bound);
    }
    result.pass = ok;
    result.detail = describe(worst_ratio, 1.0);
    results.push_back(result);
  }

  {
    CheckResult result;
    result.name = "schedule-identity-constant";
    double worst = 0.0;
    for (double s : {0.1, 1.0, 10.0, 100.0}) {
      for (std::uint64_t horizon : {16ull, 256ull, 65536ull, 1000000ull}) {
        const double target = 1.0 / std::pow(static_cast<double>(horizon) + 1.0, 0.75);
        if (4.0 * s * target >= 1.0) continue;
        const double gamma =
            learning_rate(LearningRateSchedule::constant_for(s, horizon), 0);
        const double got = gamma - gamma * gamma * s;
        worst = std::max(worst, std::fabs(got - target) / target);
      }
    }
    result.pass = worst < 1e-12;
    result.detail = describe(worst, 1e-12);
    results.push_back(result);
  }

  {
    CheckResult result;
    result.name = "schedule-identity-decaying";
    double worst = 0.0;
    for (double s : {0.1, 1.0, 10.0, 100.0}) {
      for (double frac : {0.9, 0.5, 0.05}) {
        const double gamma0 = frac * 0.5 / s;
        const double q0 = gamma0 - gamma0 * gamma0 * s;
        const LearningRateSchedule schedule = LearningRateSchedule::decaying(s, gamma0);
        for (std::uint64_t t : {0ull, 1ull, 9ull, 1024ull, 999999ull}) {
          const double target = q0 / std::sqrt(static_cast<double>(t) + 1.0);
          const double gamma = learning_rate(schedule, t);
          const double got = gamma - gamma * gamma * s;
          worst = std::max(worst, std::fabs(got - target) / target);
        }
      }
    }
    result.pass = worst < 1e-12;
    result.detail = describe(worst, 1e-12);
    results.push_back(result);
  }

  {
    CheckResult result;
    result.name = "codec-roundtrip";
    RngStream rng(options.seed, StreamPurpose::kQuantizer, 7);
    std::uint64_t mismatches = 0;
    for (int r = 0; r < 10000; ++r) {
      const std::size_t w = 1 + static_cast<std::size_t>(rng.next_below(70));
      Vector f(w);
      for (double& v : f) v = rng.next_normal();
      const WorkerPayload payload = quantize(f, rng);
      const std::vector<std::uint8_t> bytes = encode_payload(payload);
      const WorkerPayload back = decode_payload(bytes, w);
      if (back.w != payload.w || back.norm != payload.norm || back.bits != payload.bits) {
        ++mismatches;
      }
    }
    result.pass = mismatches == 0;
    result.detail = std::to_string(mismatches) + " mismatches";
    results.push_back(result);
  }

  return results;
}

}  // namespace gcdl

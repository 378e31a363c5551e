#include "gcdl/losses.hpp"

#include <cmath>
#include <stdexcept>

#include "gcdl/rng.hpp"

namespace gcdl {
namespace {

void check_dims(const LossModel& model, const DataSample& sample, const Vector& beta) {
  if (beta.size() != model.w) {
    throw std::invalid_argument("parameter vector length does not match model dimension");
  }
  switch (model.kind) {
    case LossKind::kLinearRegression:
    case LossKind::kLogistic:
      if (sample.features.size() != model.w) {
        throw std::invalid_argument("feature length does not match model dimension");
      }
      break;
    case LossKind::kRosenbrock:
      if (sample.index + 1 >= model.w) {
        throw std::invalid_argument("sample index out of range for model dimension");
      }
      break;
  }
}

// log(1 + exp(-z)) without overflow for large |z|.
double log1p_exp_neg(double z) {
  if (z >= 0.0) return std::log1p(std::exp(-z));
  return -z + std::log1p(std::exp(z));
}

}  // namespace

const char* loss_kind_name(LossKind kind) {
  switch (kind) {
    case LossKind::kLinearRegression: return "linear-regression";
    case LossKind::kRosenbrock: return "rosenbrock";
    case LossKind::kLogistic: return "logistic";
  }
  return "?";
}

double loss_sample(const LossModel& model, const DataSample& sample, const Vector& beta) {
  check_dims(model, sample, beta);
  switch (model.kind) {
    case LossKind::kLinearRegression: {
      const double r = dot(sample.features, beta) - sample.label;
      return 0.5 * r * r;
    }
    case LossKind::kRosenbrock: {
      const std::size_t i = sample.index;
      const double u = beta[i + 1] - beta[i] * beta[i];
      const double v = 1.0 - beta[i];
      return 100.0 * u * u + v * v;
    }
    case LossKind::kLogistic: {
      const double z = sample.label * dot(beta, sample.features);
      return log1p_exp_neg(z);
    }
  }
  return 0.0;
}

Vector grad_sample(const LossModel& model, const DataSample& sample, const Vector& beta) {
  check_dims(model, sample, beta);
  Vector g(model.w, 0.0);
  switch (model.kind) {
    case LossKind::kLinearRegression: {
      const double scale = dot(sample.features, beta) - sample.label;
      for (std::size_t k = 0; k < model.w; ++k) g[k] = scale * sample.features[k];
      break;
    }
    case LossKind::kRosenbrock: {
      const std::size_t i = sample.index;
      const double u = beta[i + 1] - beta[i] * beta[i];
      g[i] = -400.0 * beta[i] * u - 2.0 * (1.0 - beta[i]);
      g[i + 1] = 200.0 * u;
      break;
    }
    case LossKind::kLogistic: {
      const double z = sample.label * dot(beta, sample.features);
      const double scale = -sample.label / (1.0 + std::exp(z));
      for (std::size_t k = 0; k < model.w; ++k) g[k] = scale * sample.features[k];
      break;
    }
  }
  return g;
}

double total_loss(const LossModel& model, const Dataset& data, const Vector& beta) {
  if (data.samples.empty()) throw std::invalid_argument("dataset is empty");
  double s = 0.0;
  for (const DataSample& sample : data.samples) s += loss_sample(model, sample, beta);
  return s;
}

Vector total_grad(const LossModel& model, const Dataset& data, const Vector& beta) {
  if (data.samples.empty()) throw std::invalid_argument("dataset is empty");
  Vector acc(model.w, 0.0);
  for (const DataSample& sample : data.samples) {
    const Vector g = grad_sample(model, sample, beta);
    for (std::size_t k = 0; k < model.w; ++k) acc[k] += g[k];
  }
  return acc;
}

GradTable::GradTable(const LossModel& model, const Dataset& data, const Vector& beta)
    : kind_(model.kind), w_(model.w), m_(data.size()), data_(&data) {
  if (m_ == 0) throw std::invalid_argument("dataset is empty");
  const LossModel check{kind_, w_};
  for (std::size_t i = 0; i < m_; ++i) check_dims(check, data.samples[i], beta);
  if (kind_ == LossKind::kRosenbrock) {
    partial_lo_.resize(m_);
    partial_hi_.resize(m_);
  } else {
    scale_.resize(m_);
    feat_norm_sq_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      feat_norm_sq_[i] = dot(data.samples[i].features, data.samples[i].features);
    }
  }
  rebind(beta);
}

void GradTable::rebind(const Vector& beta) {
  if (beta.size() != w_) {
    throw std::invalid_argument("parameter vector length does not match model dimension");
  }
  loss_ = 0.0;
  if (kind_ == LossKind::kRosenbrock) {
    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t c = data_->samples[i].index;
      const double u = beta[c + 1] - beta[c] * beta[c];
      const double v = 1.0 - beta[c];
      partial_lo_[i] = -400.0 * beta[c] * u - 2.0 * v;
      partial_hi_[i] = 200.0 * u;
      loss_ += 100.0 * u * u + v * v;
    }
    return;
  }
  for (std::size_t i = 0; i < m_; ++i) {
    const DataSample& sample = data_->samples[i];
    if (kind_ == LossKind::kLinearRegression) {
      const double r = dot(sample.features, beta) - sample.label;
      scale_[i] = r;
      loss_ += 0.5 * r * r;
    } else {
      const double z = sample.label * dot(beta, sample.features);
      scale_[i] = -sample.label / (1.0 + std::exp(z));
      loss_ += log1p_exp_neg(z);
    }
  }
}

double GradTable::max_row_norm_sq() const {
  double best = 0.0;
  for (std::size_t i = 0; i < m_; ++i) {
    const double v = row_norm_sq(i);
    if (v > best) best = v;
  }
  return best;
}

Vector GradTable::row(std::size_t i) const {
  Vector g(w_, 0.0);
  add_row(i, 1.0, g);
  return g;
}

Vector GradTable::total() const {
  Vector acc(w_, 0.0);
  for (std::size_t i = 0; i < m_; ++i) add_row(i, 1.0, acc);
  return acc;
}

RegressionData generate_regression_data(std::size_t m, std::size_t feature_dim,
                                        double feature_std, double noise_std,
                                        std::uint64_t seed) {
  if (m < 1 || feature_dim < 1) {
    throw std::invalid_argument("m and feature_dim must be at least 1");
  }
  if (feature_std < 0.0 || noise_std < 0.0) {
    throw std::invalid_argument("standard deviations must be nonnegative");
  }
  RegressionData out;
  out.beta_star.resize(feature_dim);
  RngStream star(seed, StreamPurpose::kRegressionBetaStar);
  for (double& v : out.beta_star) v = star.next_normal();

  out.dataset.samples.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    DataSample& sample = out.dataset.samples[i];
    sample.index = i;
    sample.features.resize(feature_dim);
    RngStream feat(seed, StreamPurpose::kRegressionFeatures, 0, i);
    for (double& v : sample.features) v = feature_std * feat.next_normal();
    RngStream noise(seed, StreamPurpose::kRegressionNoise, 0, i);
    sample.label = dot(sample.features, out.beta_star) + noise_std * noise.next_normal();
  }
  return out;
}

}  // namespace gcdl

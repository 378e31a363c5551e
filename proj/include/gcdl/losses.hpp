#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace gcdl {

using Vector = std::vector<double>;

// One training row: feature part and label. Index-only losses (Rosenbrock)
// keep the feature part empty and are driven by `index` alone.
struct DataSample {
  Vector features;
  double label = 0.0;
  std::size_t index = 0;
};

struct Dataset {
  std::vector<DataSample> samples;

  std::size_t size() const { return samples.size(); }
  std::size_t feature_dim() const {
    return samples.empty() ? 0 : samples.front().features.size();
  }
};

enum class LossKind { kLinearRegression, kRosenbrock, kLogistic };

const char* loss_kind_name(LossKind kind);

// A loss family plus the parameter dimension w. The regression and logistic
// losses require feature length w; Rosenbrock requires w = m + 1 because
// term i touches beta[i] and beta[i+1].
struct LossModel {
  LossKind kind = LossKind::kLinearRegression;
  std::size_t w = 0;
};

inline double dot(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double loss_sample(const LossModel& model, const DataSample& sample, const Vector& beta);
Vector grad_sample(const LossModel& model, const DataSample& sample, const Vector& beta);

double total_loss(const LossModel& model, const Dataset& data, const Vector& beta);
Vector total_grad(const LossModel& model, const Dataset& data, const Vector& beta);

// Per-sample gradients at a fixed beta, evaluated once and read many times.
// Rows of the two feature-based models are scale * features, so only the
// scales are stored; Rosenbrock rows keep their two nonzero entries.
class GradTable {
 public:
  GradTable(const LossModel& model, const Dataset& data, const Vector& beta);

  // Re-evaluates the table at a new point without reallocating or touching
  // the cached per-sample feature norms.
  void rebind(const Vector& beta);

  std::size_t rows() const { return m_; }
  std::size_t width() const { return w_; }

  // Total loss at the bound point, summed in index order; identical to
  // total_loss at the same point.
  double point_loss() const { return loss_; }

  // acc += coeff * grad(sample i); acc must have length w.
  void add_row(std::size_t i, double coeff, Vector& acc) const {
    if (kind_ == LossKind::kRosenbrock) {
      const std::size_t c = data_->samples[i].index;
      acc[c] += coeff * partial_lo_[i];
      acc[c + 1] += coeff * partial_hi_[i];
      return;
    }
    const double s = coeff * scale_[i];
    const double* x = data_->samples[i].features.data();
    double* out = acc.data();
    for (std::size_t k = 0; k < w_; ++k) out[k] += s * x[k];
  }

  double row_norm_sq(std::size_t i) const {
    if (kind_ == LossKind::kRosenbrock) {
      return partial_lo_[i] * partial_lo_[i] + partial_hi_[i] * partial_hi_[i];
    }
    return scale_[i] * scale_[i] * feat_norm_sq_[i];
  }

  double max_row_norm_sq() const;

  Vector row(std::size_t i) const;

  // Sum of all rows in index order; equals the full gradient.
  Vector total() const;

 private:
  LossKind kind_;
  std::size_t w_ = 0;
  std::size_t m_ = 0;
  const Dataset* data_ = nullptr;
  double loss_ = 0.0;
  Vector scale_;          // feature models
  Vector feat_norm_sq_;   // feature models
  Vector partial_lo_;     // Rosenbrock, derivative at coordinate index
  Vector partial_hi_;     // Rosenbrock, derivative at coordinate index + 1
};

struct RegressionData {
  Dataset dataset;
  Vector beta_star;
};

// Synthetic linear-regression data: features i.i.d. N(0, feature_std^2),
// beta_star standard normal, labels <x_i, beta_star> plus N(0, noise_std^2)
// noise. A pure function of the arguments, including the seed.
RegressionData generate_regression_data(std::size_t m, std::size_t feature_dim,
                                        double feature_std, double noise_std,
                                        std::uint64_t seed);

}  // namespace gcdl

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "gcdl/distribution.hpp"
#include "gcdl/losses.hpp"

namespace gcdl {

// Constants feeding the bound evaluators. Dimensions are carried as reals so
// the evaluators stay plain formula evaluations.
struct TheoryParams {
  double C = 0.0;       // bound on per-sample squared gradient norms
  double lambda = 0.0;  // strong-convexity constant
  double S = 0.0;       // smoothness constant
  double m = 0.0;
  double n = 0.0;
  double w = 0.0;
  double p = 0.0;
  double D = 1.0;       // homogeneous redundancy
  double gamma0 = 0.0;  // initial decaying rate
  double loss0 = 0.0;   // loss at the initial point
  double loss_star = 0.0;
};

// Upper bound on E ||g_hat||^2:
//   C m^2 + [w - (1-p)] (m^2 - m) / (n (1-p)) C + [w - (1-p)] / (1-p) C sum_i 1/d_i.
double bound_second_moment(const TheoryParams& params, const RedundancySpec& d);

// Strongly convex rate with gamma_t = 1/(lambda t):
// E ||beta_T - beta*||^2 <= 4 G / (lambda^2 T) with G the second-moment bound.
double bound_theorem1(const TheoryParams& params, const RedundancySpec& d,
                      std::uint64_t T);

// Non-convex bounds on the averaged / minimum squared gradient norm for the
// constant and the decaying schedule. Both require a homogeneous spec with
// redundancy D.
double bound_theorem2(const TheoryParams& params, std::uint64_t T);
double bound_theorem3(const TheoryParams& params, std::uint64_t T);

// Exact conditional second moment of the aggregate for fixed encoded vectors,
// independent Bernoulli(1-p) participation, and the stochastic sign quantizer.
// Expanding ||sum_j I_j h_j ||f_j||||^2 over worker pairs: a worker paired
// with itself contributes E[I_j] * E||h_j||^2 * ||f_j||^2 = (1-p) w ||f_j||^2
// since every sign vector has squared norm w, while two distinct workers
// contribute (1-p)^2 <f_j1, f_j2> because each quantized coordinate is an
// independent unbiased estimate of f_k / ||f||. Collecting the cross terms
// into ||sum_j f_j||^2 gives
//   (1-p)^2 ||sum_j f_j||^2 + (1-p) [w - (1-p)] sum_j ||f_j||^2.
double exact_second_moment(std::span<const Vector> worker_vectors, double p,
                           std::size_t w);

struct SecondMomentComparison {
  double expectation_form = 0.0;  // pairwise-balanced expectation over placements
  double realized_form = 0.0;     // from the realized assignment's encoded vectors
};

// Homogeneous-spec second moment both ways: the closed form that assumes
// exact pairwise balance, and the exact value for the realized assignment.
SecondMomentComparison exact_second_moment_homogeneous(
    const LossModel& model, const Dataset& data, const Assignment& assignment,
    const Vector& beta, double p, std::size_t w, int D);

// Largest per-sample squared gradient norm at one point; running it along a
// trace instantiates the gradient-bound constant empirically.
double max_sample_grad_norm_sq(const LossModel& model, const Dataset& data,
                               const Vector& beta);

}  // namespace gcdl

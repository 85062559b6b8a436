#pragma once

#include <cstdint>
#include <vector>

#include "due/core/tensor.hpp"

namespace due {

// Random-cosine approximation of the RBF kernel with an exact Bayesian
// linear posterior over the feature weights. phi(x) = sqrt(2 s / D)
// cos(Omega x + b) with Omega ~ N(0, I / l^2), so E[phi(x)^T phi(x')]
// approaches the RBF kernel with output scale s as D grows.
struct RffModel {
  std::size_t num_features = 0;  // D
  std::size_t input_dim = 0;     // J
  double lengthscale = 1.0;
  double outputscale = 1.0;
  double ridge = 1.0;      // prior precision lambda
  double noise_var = 0.01;
  std::vector<double> omega;  // D x J
  std::vector<double> phase;  // D, uniform [0, 2 pi)

  // Posterior state (valid after rff_fit, which may see zero rows):
  bool fitted = false;
  std::vector<double> chol_precision;  // D x D lower factor of P
  std::vector<double> weight_mean;     // D
};

RffModel rff_create(std::size_t num_features, std::size_t input_dim,
                    double lengthscale, double outputscale, double noise_var,
                    std::uint64_t seed, double ridge = 1.0);

// phi for a row-major batch [n x J] -> [n x D].
Tensor rff_features(const RffModel& model, const Tensor& x);

// Exact Gaussian posterior over the linear weights: precision
// P = ridge I + Phi^T Phi / noise, mean = P^{-1} Phi^T y / noise.
// Accumulates Phi^T Phi in row blocks so large n never materializes Phi.
void rff_fit(RffModel& model, const Tensor& x, const std::vector<double>& y);

// Predictive mean and variance phi^T P^{-1} phi + noise at each row.
void rff_predict(const RffModel& model, const Tensor& x,
                 std::vector<double>& mean_out, std::vector<double>& var_out);

}  // namespace due

#pragma once

#include <vector>

#include "due/core/tensor.hpp"
#include "due/gp/kernel.hpp"

namespace due {

// Closed-form dense GP regression. Small-n only (dense solves); used as the
// verification oracle for the variational path and for the log-determinant
// diagnostics.

struct PlainKernelSpec {
  KernelKind kind = KernelKind::Rbf;
  double lengthscale = 1.0;
  double outputscale = 1.0;
  double mean = 0.0;
};

struct MarginalParts {
  double total = 0.0;       // log N(y | mean, sigma_f K + sigma_n^2 I)
  double data_fit = 0.0;    // -(1/2) (y-mu)^T C^{-1} (y-mu)
  double complexity = 0.0;  // +(1/2) log |C|
};

// Log marginal likelihood of y under a unit-scale kernel K on the feature
// rows, with explicit signal scale sigma_f and noise scale sigma_n:
// C = sigma_f K + sigma_n^2 I. Returns the decomposition alongside the
// total = data_fit - complexity - (n/2) log(2 pi).
MarginalParts exact_gp_marginal(KernelKind kind, const Tensor& features,
                                const std::vector<double>& y, double sigma_f,
                                double sigma_n, double lengthscale,
                                double mean = 0.0);

// Same quantity expressed through a kernel spec whose output scale plays
// the role of sigma_f.
MarginalParts exact_gp_log_marginal(const PlainKernelSpec& spec,
                                    const Tensor& features,
                                    const std::vector<double>& y,
                                    double noise_var);

// Posterior mean and (diagonal) variance at test rows.
void exact_gp_predict(const PlainKernelSpec& spec, const Tensor& train_features,
                      const std::vector<double>& y, double noise_var,
                      const Tensor& test_features, std::vector<double>& mean_out,
                      std::vector<double>& var_out);

}  // namespace due

#pragma once

#include <string>

#include "due/core/tensor.hpp"

namespace due {

enum class KernelKind { Rbf, Matern32 };

KernelKind kernel_from_string(const std::string& s);
std::string to_string(KernelKind k);

// Stationary kernel value as a function of squared distance, with scalar
// length scale l and output scale s (both size-1 tensors):
//   rbf:      s * exp(-d2 / (2 l^2))
//   matern32: s * (1 + a) * exp(-a),  a = sqrt(3 d2) / l
// Implemented as fused ops so gradients stay finite at d2 = 0.
Tensor kernel_from_sqdist(KernelKind kind, const Tensor& d2, const Tensor& l,
                          const Tensor& s);

// Gram matrix between feature rows: kernel applied to pairwise distances.
Tensor kernel_eval(KernelKind kind, const Tensor& a, const Tensor& b,
                   const Tensor& lengthscale, const Tensor& outputscale);

// Plain (non-differentiable) evaluation used by the closed-form GP paths.
void kernel_gram(KernelKind kind, const double* a, std::size_t n,
                 const double* b, std::size_t m, std::size_t dim,
                 double lengthscale, double outputscale, double* out);

// Mean Euclidean distance over all unordered pairs of rows; the degenerate
// all-coincident case falls back to 1.
double init_lengthscale(const Tensor& features);

// k-means centroids of the feature rows, used as initial inducing inputs.
Tensor init_inducing(const Tensor& features, std::size_t m, std::uint64_t seed);

}  // namespace due

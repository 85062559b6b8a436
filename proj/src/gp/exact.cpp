#include "due/gp/exact.hpp"

#include <cmath>

#include "due/core/error.hpp"
#include "due/core/linalg.hpp"
#include "due/simd/kernels.hpp"

namespace due {

MarginalParts exact_gp_marginal(KernelKind kind, const Tensor& features,
                                const std::vector<double>& y, double sigma_f,
                                double sigma_n, double lengthscale,
                                double mean) {
  const std::size_t n = features.rows(), d = features.cols();
  if (y.size() != n)
    throw ShapeError("exact_gp_marginal: target length mismatch");

  std::vector<double> c(n * n);
  kernel_gram(kind, features.data(), n, features.data(), n, d, lengthscale,
              sigma_f, c.data());
  for (std::size_t i = 0; i < n; ++i) c[i * n + i] += sigma_n * sigma_n;

  std::vector<double> l(n * n);
  linalg::cholesky_jittered(c.data(), n, l.data());

  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = y[i] - mean;
  linalg::solve_lower(l.data(), n, r.data(), 1);

  MarginalParts parts;
  parts.data_fit = -0.5 * simd::active().dot(r.data(), r.data(), n);
  parts.complexity = 0.5 * linalg::logdet_from_cholesky(l.data(), n);
  parts.total = parts.data_fit - parts.complexity -
                0.5 * static_cast<double>(n) * std::log(2.0 * M_PI);
  return parts;
}

MarginalParts exact_gp_log_marginal(const PlainKernelSpec& spec,
                                    const Tensor& features,
                                    const std::vector<double>& y,
                                    double noise_var) {
  return exact_gp_marginal(spec.kind, features, y, spec.outputscale,
                           std::sqrt(noise_var), spec.lengthscale, spec.mean);
}

void exact_gp_predict(const PlainKernelSpec& spec, const Tensor& train_features,
                      const std::vector<double>& y, double noise_var,
                      const Tensor& test_features, std::vector<double>& mean_out,
                      std::vector<double>& var_out) {
  const std::size_t n = train_features.rows(), d = train_features.cols();
  const std::size_t q = test_features.rows();
  if (y.size() != n) throw ShapeError("exact_gp_predict: target length mismatch");
  if (test_features.cols() != d)
    throw ShapeError("exact_gp_predict: feature dimension mismatch");

  std::vector<double> c(n * n);
  kernel_gram(spec.kind, train_features.data(), n, train_features.data(), n, d,
              spec.lengthscale, spec.outputscale, c.data());
  for (std::size_t i = 0; i < n; ++i) c[i * n + i] += noise_var;
  std::vector<double> l(n * n);
  linalg::cholesky_jittered(c.data(), n, l.data());

  // alpha = C^{-1} (y - mu)
  std::vector<double> alpha(n);
  for (std::size_t i = 0; i < n; ++i) alpha[i] = y[i] - spec.mean;
  linalg::solve_lower(l.data(), n, alpha.data(), 1);
  linalg::solve_lower_transposed(l.data(), n, alpha.data(), 1);

  // k_star: n x q
  std::vector<double> k_star(n * q);
  kernel_gram(spec.kind, train_features.data(), n, test_features.data(), q, d,
              spec.lengthscale, spec.outputscale, k_star.data());

  mean_out.assign(q, 0.0);
  var_out.assign(q, 0.0);
  for (std::size_t j = 0; j < q; ++j) {
    double acc = spec.mean;
    for (std::size_t i = 0; i < n; ++i) acc += k_star[i * q + j] * alpha[i];
    mean_out[j] = acc;
  }

  // v = L^{-1} k_star, var = k** - colwise sqnorm(v)
  linalg::solve_lower(l.data(), n, k_star.data(), q);
  for (std::size_t j = 0; j < q; ++j) {
    double aa = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = k_star[i * q + j];
      aa += v * v;
    }
    var_out[j] = std::max(0.0, spec.outputscale - aa);
  }
}

}  // namespace due

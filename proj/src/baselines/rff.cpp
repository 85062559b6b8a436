#include "due/baselines/rff.hpp"

#include <cmath>

#include "due/core/error.hpp"
#include "due/core/linalg.hpp"
#include "due/core/rng.hpp"
#include "due/simd/kernels.hpp"

namespace due {

RffModel rff_create(std::size_t num_features, std::size_t input_dim,
                    double lengthscale, double outputscale, double noise_var,
                    std::uint64_t seed, double ridge) {
  if (num_features == 0 || input_dim == 0)
    throw ArgumentError("rff: dimensions must be positive");
  if (ridge <= 0.0) throw ArgumentError("rff: ridge must be positive");
  RffModel model;
  model.num_features = num_features;
  model.input_dim = input_dim;
  model.lengthscale = lengthscale;
  model.outputscale = outputscale;
  model.ridge = ridge;
  model.noise_var = noise_var;
  Rng rng = Rng(seed).substream("rff");
  model.omega.resize(num_features * input_dim);
  for (double& w : model.omega) w = rng.normal() / lengthscale;
  model.phase.resize(num_features);
  for (double& p : model.phase) p = rng.uniform(0.0, 2.0 * M_PI);
  return model;
}

Tensor rff_features(const RffModel& model, const Tensor& x) {
  const std::size_t n = x.rows(), j = x.cols(), d = model.num_features;
  if (j != model.input_dim) throw ShapeError("rff: input dimension mismatch");
  const double scale = std::sqrt(2.0 * model.outputscale /
                                 static_cast<double>(d));
  std::vector<double> phi(n * d, 0.0);
  // phi = cos(x Omega^T + b): Omega stored [D x J], so use the nt product.
  simd::active().matmul_nt(phi.data(), x.data(), model.omega.data(), n, j, d);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = phi.data() + i * d;
    for (std::size_t f = 0; f < d; ++f)
      row[f] = scale * std::cos(row[f] + model.phase[f]);
  }
  return Tensor(Shape{n, d}, std::move(phi));
}

void rff_fit(RffModel& model, const Tensor& x, const std::vector<double>& y) {
  const std::size_t n = x.rows(), d = model.num_features;
  if (y.size() != n) throw ShapeError("rff_fit: target length mismatch");

  std::vector<double> precision(d * d, 0.0);
  std::vector<double> phi_y(d, 0.0);
  constexpr std::size_t kBlock = 512;
  for (std::size_t start = 0; start < n; start += kBlock) {
    const std::size_t stop = std::min(start + kBlock, n);
    const std::size_t rows = stop - start;
    std::vector<double> chunk(rows * x.cols());
    std::copy_n(x.data() + start * x.cols(), rows * x.cols(), chunk.data());
    Tensor phi = rff_features(model, Tensor(Shape{rows, x.cols()},
                                            std::move(chunk)));
    simd::active().matmul_tn(precision.data(), phi.data(), phi.data(), d, rows,
                             d);
    for (std::size_t i = 0; i < rows; ++i)
      simd::active().axpy(phi_y.data(), phi.data() + i * d, y[start + i], d);
  }
  const double inv_noise = 1.0 / model.noise_var;
  simd::active().scale(precision.data(), precision.data(), inv_noise, d * d);
  for (std::size_t i = 0; i < d; ++i) precision[i * d + i] += model.ridge;

  model.chol_precision.resize(d * d);
  linalg::cholesky_jittered(precision.data(), d, model.chol_precision.data());

  model.weight_mean = phi_y;
  simd::active().scale(model.weight_mean.data(), model.weight_mean.data(),
                       inv_noise, d);
  linalg::solve_lower(model.chol_precision.data(), d, model.weight_mean.data(),
                      1);
  linalg::solve_lower_transposed(model.chol_precision.data(), d,
                                 model.weight_mean.data(), 1);
  model.fitted = true;
}

void rff_predict(const RffModel& model, const Tensor& x,
                 std::vector<double>& mean_out, std::vector<double>& var_out) {
  if (!model.fitted)
    throw ContractError("rff_predict before rff_fit");
  const std::size_t n = x.rows(), d = model.num_features;
  Tensor phi = rff_features(model, x);
  mean_out.assign(n, 0.0);
  var_out.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = phi.data() + i * d;
    mean_out[i] = simd::active().dot(row, model.weight_mean.data(), d);
    // var = phi^T P^{-1} phi = |L^{-1} phi|^2
    std::vector<double> v(row, row + d);
    linalg::solve_lower(model.chol_precision.data(), d, v.data(), 1);
    var_out[i] =
        simd::active().dot(v.data(), v.data(), d) + model.noise_var;
  }
}

}  // namespace due

#include "due/features/extractor.hpp"

#include <cmath>

#include "due/core/clustering.hpp"
#include "due/core/error.hpp"
#include "due/core/ops.hpp"
#include "due/simd/kernels.hpp"

namespace due {

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::Relu;
  if (s == "elu") return Activation::Elu;
  throw ArgumentError("unknown activation: " + s);
}

std::string to_string(Activation a) {
  return a == Activation::Relu ? "relu" : "elu";
}

void FeatureExtractorConfig::validate() const {
  if (input_dim == 0 || feature_dim == 0)
    throw ArgumentError("feature extractor dims must be positive");
  if (spectral_coeff <= 0.0)
    throw ArgumentError("spectral_coeff must be positive");
  if (dropout_rate < 0.0 || dropout_rate >= 1.0)
    throw ArgumentError("dropout_rate must be in [0, 1)");
  if (power_iterations == 0)
    throw ArgumentError("power_iterations must be >= 1");
}

double batchnorm_lipschitz(const BatchNormState& bn) {
  double lip = 0.0;
  for (std::size_t i = 0; i < bn.gamma.size(); ++i) {
    const double denom = std::sqrt(bn.running_var[i] + bn.eps);
    lip = std::max(lip, std::abs(bn.gamma.data()[i]) / denom);
  }
  return lip;
}

void batchnorm_constrain(BatchNormState& bn, double coeff) {
  const double lip = batchnorm_lipschitz(bn);
  if (lip > coeff) {
    const double scale = coeff / lip;
    double* g = bn.gamma.data();
    for (std::size_t i = 0; i < bn.gamma.size(); ++i) g[i] *= scale;
  }
}

Tensor dropout(const Tensor& x, double rate, Rng& rng, Mode mode) {
  if (rate < 0.0 || rate >= 1.0)
    throw ArgumentError("dropout rate must be in [0, 1)");
  if (mode == Mode::Eval || rate == 0.0) return x;
  const double keep = 1.0 - rate;
  std::vector<double> mask(x.size());
  for (double& m : mask) m = rng.uniform() < rate ? 0.0 : 1.0 / keep;
  return mul(x, Tensor(x.shape(), std::move(mask)));
}

namespace {

Tensor init_weight(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double std = std::sqrt(2.0 / static_cast<double>(fan_in));
  std::vector<double> w(fan_in * fan_out);
  for (double& v : w) v = rng.normal(0.0, std);
  return Tensor(Shape{fan_in, fan_out}, std::move(w), true);
}

std::vector<double> init_u(std::size_t n, Rng& rng) {
  std::vector<double> u(n);
  double norm = 0.0;
  for (double& v : u) {
    v = rng.normal();
    norm += v * v;
  }
  norm = std::sqrt(norm);
  for (double& v : u) v /= norm;
  return u;
}

void normalize_weight(Tensor& w, std::vector<double>& u, double coeff,
                      std::size_t iters) {
  auto pi = power_iteration(w, u, iters);
  u = pi.u;
  if (pi.sigma > coeff) {
    const double scale = coeff / pi.sigma;
    simd::active().scale(w.data(), w.data(), scale, w.size());
  }
}

}  // namespace

FeatureExtractor::FeatureExtractor(const FeatureExtractorConfig& cfg,
                                   Rng init_rng)
    : cfg_(cfg) {
  cfg_.validate();
  const std::size_t j = cfg_.feature_dim;
  w_in_ = init_weight(cfg_.input_dim, j, init_rng);
  b_in_ = Tensor::zeros(Shape{j}, true);
  u_in_ = init_u(cfg_.input_dim, init_rng);
  blocks_.resize(cfg_.depth);
  for (auto& block : blocks_) {
    block.weight = init_weight(j, j, init_rng);
    block.bias = Tensor::zeros(Shape{j}, true);
    block.u = init_u(j, init_rng);
    if (cfg_.use_batchnorm) {
      BatchNormState bn;
      bn.gamma = Tensor::full(Shape{j}, 1.0, true);
      bn.beta = Tensor::zeros(Shape{j}, true);
      bn.running_mean.assign(j, 0.0);
      bn.running_var.assign(j, 1.0);
      block.bn = std::move(bn);
    }
  }
}

Tensor FeatureExtractor::forward(const Tensor& x, Mode mode, Rng* dropout_rng) {
  if (x.rank() != 2 || x.cols() != cfg_.input_dim)
    throw ShapeError("feature extractor expected [n x " +
                     std::to_string(cfg_.input_dim) + "], got " +
                     shape_str(x.shape()));
  if (mode == Mode::Train && cfg_.dropout_rate > 0.0 && dropout_rng == nullptr)
    throw ContractError("train-mode forward with dropout needs an rng");

  Tensor h = add_rowvec(matmul(x, w_in_), b_in_);
  const std::size_t n = x.rows();
  for (auto& block : blocks_) {
    Tensor z = add_rowvec(matmul(h, block.weight), block.bias);
    if (block.bn.has_value()) {
      BatchNormState& bn = *block.bn;
      if (mode == Mode::Train) {
        Tensor mu = col_mean(z);
        Tensor centered = sub_rowvec(z, mu);
        Tensor var = col_mean(mul(centered, centered));
        Tensor inv_std =
            div(Tensor::scalar(1.0), sqrt(add_scalar(var, bn.eps)));
        z = add_rowvec(mul_rowvec(mul_rowvec(centered, inv_std), bn.gamma),
                       bn.beta);
        // Update running statistics outside the graph (unbiased variance).
        const double m = bn.momentum;
        const double bessel =
            n > 1 ? static_cast<double>(n) / static_cast<double>(n - 1) : 1.0;
        for (std::size_t c = 0; c < bn.running_mean.size(); ++c) {
          bn.running_mean[c] = m * bn.running_mean[c] + (1.0 - m) * mu.at(c);
          bn.running_var[c] =
              m * bn.running_var[c] + (1.0 - m) * var.at(c) * bessel;
        }
      } else {
        std::vector<double> inv(bn.running_var.size());
        for (std::size_t c = 0; c < inv.size(); ++c)
          inv[c] = 1.0 / std::sqrt(bn.running_var[c] + bn.eps);
        Tensor centered =
            sub_rowvec(z, Tensor(Shape{bn.running_mean.size()}, bn.running_mean));
        z = add_rowvec(
            mul_rowvec(mul_rowvec(centered, Tensor(Shape{inv.size()}, inv)),
                       bn.gamma),
            bn.beta);
      }
    }
    z = cfg_.activation == Activation::Relu ? relu(z) : elu(z);
    if (cfg_.dropout_rate > 0.0 && mode == Mode::Train) {
      z = dropout(z, cfg_.dropout_rate, *dropout_rng, mode);
    }
    h = cfg_.residual ? add(h, z) : z;
  }
  return h;
}

void FeatureExtractor::spectral_normalize() {
  if (!cfg_.spectral_norm) return;
  normalize_weight(w_in_, u_in_, cfg_.spectral_coeff, cfg_.power_iterations);
  for (auto& block : blocks_) {
    normalize_weight(block.weight, block.u, cfg_.spectral_coeff,
                     cfg_.power_iterations);
    if (block.bn.has_value()) batchnorm_constrain(*block.bn, cfg_.spectral_coeff);
  }
}

LipschitzReport FeatureExtractor::lipschitz_audit() const {
  LipschitzReport report;
  constexpr double kTol = 1e-6;
  constexpr std::size_t kMaxIters = 10000;

  const double sigma_in =
      power_iteration_to_tolerance(w_in_, kTol, kMaxIters).sigma;
  report.layers.push_back({"input", sigma_in, sigma_in});
  report.product_bound = sigma_in;

  std::size_t idx = 0;
  for (const auto& block : blocks_) {
    const double sigma =
        power_iteration_to_tolerance(block.weight, kTol, kMaxIters).sigma;
    double path = sigma;  // activation and dropout (eval) are 1-Lipschitz
    if (block.bn.has_value()) path *= batchnorm_lipschitz(*block.bn);
    const double bound = cfg_.residual ? 1.0 + path : path;
    report.layers.push_back({"block" + std::to_string(idx++), sigma, bound});
    report.product_bound *= bound;
  }
  return report;
}

std::vector<Tensor> FeatureExtractor::parameters() {
  std::vector<Tensor> params{w_in_, b_in_};
  for (auto& block : blocks_) {
    params.push_back(block.weight);
    params.push_back(block.bias);
    if (block.bn.has_value()) {
      params.push_back(block.bn->gamma);
      params.push_back(block.bn->beta);
    }
  }
  return params;
}

}  // namespace due

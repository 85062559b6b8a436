#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "due/core/rng.hpp"
#include "due/core/tensor.hpp"
#include "due/gp/kernel.hpp"

namespace due {

enum class LikelihoodKind { Gaussian, Softmax };

LikelihoodKind likelihood_from_string(const std::string& s);
std::string to_string(LikelihoodKind k);

struct LikelihoodSpec {
  LikelihoodKind kind = LikelihoodKind::Gaussian;
  std::size_t num_outputs = 1;  // T: targets for regression, classes for softmax
  std::size_t mc_train = 8;
  std::size_t mc_predict = 32;
};

// Per-output-dimension GP head. Kernel hyperparameters are log-stored for
// unconstrained optimization; the whitened variational distribution is
// N(whitened_mean, S) with S = L L^T and L the positive-diagonal transform
// of cov_factor_raw.
struct GpHead {
  Tensor log_lengthscale;  // {1}
  Tensor log_outputscale;  // {1}
  Tensor mean_const;       // {1}
  Tensor whitened_mean;    // {m, 1}
  Tensor cov_factor_raw;   // {m, m}
};

struct GpState {
  KernelKind kernel = KernelKind::Rbf;
  Tensor inducing;  // {m, J}, feature-space coordinates, never mapped by f
  std::vector<GpHead> heads;
  Tensor log_noise;  // {1}; Gaussian likelihood only

  static GpState create(KernelKind kernel, std::size_t num_inducing,
                        std::size_t feature_dim, std::size_t num_outputs,
                        bool with_noise, double init_noise_var = 0.01);

  std::size_t num_inducing() const { return inducing.rows(); }
  std::size_t feature_dim() const { return inducing.cols(); }
  std::size_t num_outputs() const { return heads.size(); }
  double noise_var() const;

  std::vector<Tensor> parameters();
  std::vector<Tensor> variational_parameters();  // Z, m_t, raw factors
};

// Whitened predictive for one head as graph tensors: with L = chol(K_zz)
// and A = L^{-1} K_zx, mean = mu + A^T m and var = k(x,x) - diag(A^T A) +
// diag(A^T S A), clamped at 1e-12.
struct HeadPredictive {
  Tensor mean;  // {n, 1}
  Tensor var;   // {n, 1}
};
HeadPredictive svgp_predict_head(const GpState& gp, std::size_t t,
                                 const Tensor& features);

// Latent predictive over all heads without graph construction.
struct PredictiveDistribution {
  Tensor latent_mean;  // {n, T}
  Tensor latent_var;   // {n, T}
  // Classification extras, filled by predictive_class_probs:
  Tensor probs;                         // {n, T}
  std::vector<double> entropy;          // per point, nats
  std::vector<std::size_t> pred_class;  // argmax of averaged probabilities
};
PredictiveDistribution svgp_predict(const GpState& gp, const Tensor& features);

// Joint latent moments for paired test inputs (row i of f0 with row i of
// f1), single-head states. Used for treatment-effect estimation.
struct PairedPredictive {
  std::vector<double> mean0, mean1, var0, var1, cov01;
};
PairedPredictive svgp_predict_paired(const GpState& gp, const Tensor& f0,
                                     const Tensor& f1);

// KL(q(U) || p(U)) in the whitened parameterization, where the prior is
// standard normal: sum_t 0.5 (tr(S_t) + m_t^T m_t - m - logdet S_t).
Tensor kl_whitened(const GpState& gp);

// Evidence lower bound on a minibatch. The expected log-likelihood term is
// scaled by n_total / batch to stay an unbiased full-sum estimate; the KL
// is unscaled. Gaussian likelihoods are handled analytically, softmax by
// Monte Carlo with lik.mc_train samples drawn from mc_rng.
Tensor elbo(const GpState& gp, const LikelihoodSpec& lik,
            const Tensor& features, const Tensor& y, std::size_t n_total,
            Rng* mc_rng = nullptr);

// Monte Carlo class probabilities from independent diagonal latents;
// fills probs, entropy, and pred_class of the distribution.
void predictive_class_probs(PredictiveDistribution& pred,
                            std::size_t mc_samples, Rng& rng);

// Shannon entropy (natural log) of each probability row; 0 log 0 := 0.
std::vector<double> predictive_entropy(const Tensor& probs);

// One-hot rows to class indices.
std::vector<std::size_t> labels_from_onehot(const Tensor& y);

}  // namespace due

#include "due/gp/svgp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "due/core/error.hpp"
#include "due/core/linalg.hpp"
#include "due/core/ops.hpp"
#include "due/simd/kernels.hpp"

namespace due {

LikelihoodKind likelihood_from_string(const std::string& s) {
  if (s == "gaussian") return LikelihoodKind::Gaussian;
  if (s == "softmax") return LikelihoodKind::Softmax;
  throw ArgumentError("unknown likelihood: " + s);
}

std::string to_string(LikelihoodKind k) {
  return k == LikelihoodKind::Gaussian ? "gaussian" : "softmax";
}

GpState GpState::create(KernelKind kernel, std::size_t num_inducing,
                        std::size_t feature_dim, std::size_t num_outputs,
                        bool with_noise, double init_noise_var) {
  if (num_inducing == 0 || num_outputs == 0)
    throw ArgumentError("GpState: counts must be positive");
  GpState gp;
  gp.kernel = kernel;
  gp.inducing = Tensor::zeros(Shape{num_inducing, feature_dim}, true);
  gp.heads.resize(num_outputs);
  for (auto& head : gp.heads) {
    head.log_lengthscale = Tensor::scalar(0.0, true);
    head.log_outputscale = Tensor::scalar(0.0, true);
    head.mean_const = Tensor::scalar(0.0, true);
    head.whitened_mean = Tensor::zeros(Shape{num_inducing, 1}, true);
    // raw = 0 gives S = I through the positive-diagonal transform
    head.cov_factor_raw = Tensor::zeros(Shape{num_inducing, num_inducing}, true);
  }
  if (with_noise) gp.log_noise = Tensor::scalar(std::log(init_noise_var), true);
  return gp;
}

double GpState::noise_var() const {
  if (!log_noise.defined())
    throw ContractError("noise_var on a likelihood without noise");
  return std::exp(log_noise.item());
}

std::vector<Tensor> GpState::parameters() {
  std::vector<Tensor> params{inducing};
  for (auto& head : heads) {
    params.push_back(head.log_lengthscale);
    params.push_back(head.log_outputscale);
    params.push_back(head.mean_const);
    params.push_back(head.whitened_mean);
    params.push_back(head.cov_factor_raw);
  }
  if (log_noise.defined()) params.push_back(log_noise);
  return params;
}

std::vector<Tensor> GpState::variational_parameters() {
  std::vector<Tensor> params{inducing};
  for (auto& head : heads) {
    params.push_back(head.whitened_mean);
    params.push_back(head.cov_factor_raw);
  }
  return params;
}

HeadPredictive svgp_predict_head(const GpState& gp, std::size_t t,
                                 const Tensor& features) {
  const GpHead& head = gp.heads.at(t);
  const std::size_t n = features.rows();
  Tensor l = exp(head.log_lengthscale);
  Tensor s = exp(head.log_outputscale);

  Tensor k_zz = kernel_eval(gp.kernel, gp.inducing, gp.inducing, l, s);
  Tensor chol_zz = cholesky(k_zz);
  Tensor k_zx = kernel_eval(gp.kernel, gp.inducing, features, l, s);
  Tensor a = triangular_solve(chol_zz, k_zx, /*lower=*/true);

  HeadPredictive out;
  out.mean = add(matmul(transpose(a), head.whitened_mean), head.mean_const);
  Tensor k_diag = mul(Tensor::full(Shape{n, 1}, 1.0), s);
  Tensor cov_factor = lower_tri_posdiag(head.cov_factor_raw);
  Tensor sa = colwise_sqnorm(matmul(transpose(cov_factor), a));
  out.var = clamp_min(add(sub(k_diag, colwise_sqnorm(a)), sa), 1e-12);
  return out;
}

namespace {

// Materializes the positive-diagonal lower factor without the graph.
std::vector<double> plain_cov_factor(const Tensor& raw) {
  const std::size_t m = raw.rows();
  std::vector<double> l(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < i; ++j) l[i * m + j] = raw.data()[i * m + j];
    l[i * m + i] = std::exp(raw.data()[i * m + i]);
  }
  return l;
}

struct PlainHead {
  std::vector<double> chol_zz;  // m x m
  std::vector<double> a;        // m x n, L^{-1} K_zx
  double outputscale;
  double mean_const;
};

// Shared plain-path setup for one head against a feature batch.
PlainHead plain_head_solve(const GpState& gp, std::size_t t,
                           const Tensor& features) {
  const GpHead& head = gp.heads.at(t);
  const std::size_t m = gp.num_inducing(), j = gp.feature_dim();
  const std::size_t n = features.rows();
  const double l = std::exp(head.log_lengthscale.item());
  const double s = std::exp(head.log_outputscale.item());

  PlainHead ph;
  ph.outputscale = s;
  ph.mean_const = head.mean_const.item();
  std::vector<double> k_zz(m * m);
  kernel_gram(gp.kernel, gp.inducing.data(), m, gp.inducing.data(), m, j, l, s,
              k_zz.data());
  ph.chol_zz.resize(m * m);
  linalg::cholesky_jittered(k_zz.data(), m, ph.chol_zz.data());

  ph.a.resize(m * n);
  kernel_gram(gp.kernel, gp.inducing.data(), m, features.data(), n, j, l, s,
              ph.a.data());
  linalg::solve_lower(ph.chol_zz.data(), m, ph.a.data(), n);
  return ph;
}

}  // namespace

PredictiveDistribution svgp_predict(const GpState& gp, const Tensor& features) {
  const std::size_t n = features.rows(), big_t = gp.num_outputs();
  const std::size_t m = gp.num_inducing();
  PredictiveDistribution pred;
  pred.latent_mean = Tensor::zeros(Shape{n, big_t});
  pred.latent_var = Tensor::zeros(Shape{n, big_t});

  for (std::size_t t = 0; t < big_t; ++t) {
    const GpHead& head = gp.heads[t];
    PlainHead ph = plain_head_solve(gp, t, features);
    const auto cov_factor = plain_cov_factor(head.cov_factor_raw);
    // sa = L_S^T A  (m x n)
    std::vector<double> sa(m * n, 0.0);
    simd::active().matmul_tn(sa.data(), cov_factor.data(), ph.a.data(), m, m,
                             n);
    for (std::size_t i = 0; i < n; ++i) {
      double mean = ph.mean_const;
      double aa = 0.0, ss = 0.0;
      for (std::size_t r = 0; r < m; ++r) {
        const double av = ph.a[r * n + i];
        mean += av * head.whitened_mean.data()[r];
        aa += av * av;
        const double sv = sa[r * n + i];
        ss += sv * sv;
      }
      pred.latent_mean.data()[i * big_t + t] = mean;
      pred.latent_var.data()[i * big_t + t] =
          std::max(1e-12, ph.outputscale - aa + ss);
    }
  }
  return pred;
}

PairedPredictive svgp_predict_paired(const GpState& gp, const Tensor& f0,
                                     const Tensor& f1) {
  if (gp.num_outputs() != 1)
    throw ContractError("paired prediction expects a single-output model");
  if (f0.rows() != f1.rows() || f0.cols() != f1.cols())
    throw ShapeError("paired prediction: feature batches must align");
  const std::size_t n = f0.rows(), m = gp.num_inducing(), j = gp.feature_dim();
  const GpHead& head = gp.heads[0];
  const double l = std::exp(head.log_lengthscale.item());
  const double s = std::exp(head.log_outputscale.item());

  PlainHead ph0 = plain_head_solve(gp, 0, f0);
  PlainHead ph1 = plain_head_solve(gp, 0, f1);
  const auto cov_factor = plain_cov_factor(head.cov_factor_raw);
  std::vector<double> sa0(m * n, 0.0), sa1(m * n, 0.0);
  simd::active().matmul_tn(sa0.data(), cov_factor.data(), ph0.a.data(), m, m, n);
  simd::active().matmul_tn(sa1.data(), cov_factor.data(), ph1.a.data(), m, m, n);

  PairedPredictive out;
  out.mean0.resize(n);
  out.mean1.resize(n);
  out.var0.resize(n);
  out.var1.resize(n);
  out.cov01.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double m0 = ph0.mean_const, m1 = ph1.mean_const;
    double aa0 = 0.0, aa1 = 0.0, a01 = 0.0, ss0 = 0.0, ss1 = 0.0, s01 = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      const double a0 = ph0.a[r * n + i], a1 = ph1.a[r * n + i];
      m0 += a0 * head.whitened_mean.data()[r];
      m1 += a1 * head.whitened_mean.data()[r];
      aa0 += a0 * a0;
      aa1 += a1 * a1;
      a01 += a0 * a1;
      const double v0 = sa0[r * n + i], v1 = sa1[r * n + i];
      ss0 += v0 * v0;
      ss1 += v1 * v1;
      s01 += v0 * v1;
    }
    double k01;
    kernel_gram(gp.kernel, f0.data() + i * j, 1, f1.data() + i * j, 1, j, l, s,
                &k01);
    out.mean0[i] = m0;
    out.mean1[i] = m1;
    out.var0[i] = std::max(1e-12, s - aa0 + ss0);
    out.var1[i] = std::max(1e-12, s - aa1 + ss1);
    out.cov01[i] = k01 - a01 + s01;
    // Keep the 2x2 covariance PSD after the variance clamps.
    const double cap = std::sqrt(out.var0[i] * out.var1[i]);
    out.cov01[i] = std::clamp(out.cov01[i], -cap, cap);
  }
  return out;
}

Tensor kl_whitened(const GpState& gp) {
  const double m_count = static_cast<double>(gp.num_inducing());
  Tensor total = Tensor::scalar(0.0);
  for (const GpHead& head : gp.heads) {
    Tensor cov_factor = lower_tri_posdiag(head.cov_factor_raw);
    Tensor tr_s = sum(mul(cov_factor, cov_factor));
    Tensor mtm = sum(mul(head.whitened_mean, head.whitened_mean));
    Tensor logdet = mul_scalar(sum(log(diag_part(cov_factor))), 2.0);
    Tensor kl_t = mul_scalar(
        sub(add_scalar(add(tr_s, mtm), -m_count), logdet), 0.5);
    total = add(total, kl_t);
  }
  return total;
}

namespace {

Tensor elbo_gaussian(const GpState& gp, const Tensor& features,
                     const Tensor& y, std::size_t n_total) {
  const std::size_t n = features.rows();
  const std::size_t big_t = gp.num_outputs();
  if (y.rows() != n || y.cols() != big_t)
    throw ShapeError("elbo: targets shaped " + shape_str(y.shape()) +
                     " for " + std::to_string(big_t) + " outputs");
  Tensor noise = exp(gp.log_noise);
  // -0.5 log(2 pi sigma^2) per observation
  Tensor log_norm = mul_scalar(log(mul_scalar(noise, 2.0 * M_PI)), -0.5);
  Tensor two_noise = mul_scalar(noise, 2.0);

  Tensor ell = Tensor::scalar(0.0);
  for (std::size_t t = 0; t < big_t; ++t) {
    HeadPredictive hp = svgp_predict_head(gp, t, features);
    std::vector<double> yt(n);
    for (std::size_t i = 0; i < n; ++i) yt[i] = y.at(i, t);
    Tensor y_col(Shape{n, 1}, std::move(yt));
    Tensor resid = sub(y_col, hp.mean);
    Tensor quad = div(add(mul(resid, resid), hp.var), two_noise);
    ell = add(ell, sub(mul_scalar(log_norm, static_cast<double>(n)),
                       sum(quad)));
  }
  const double scale = static_cast<double>(n_total) / static_cast<double>(n);
  return sub(mul_scalar(ell, scale), kl_whitened(gp));
}

Tensor elbo_softmax(const GpState& gp, const LikelihoodSpec& lik,
                    const Tensor& features, const Tensor& y,
                    std::size_t n_total, Rng* mc_rng) {
  if (mc_rng == nullptr)
    throw ContractError("softmax elbo needs a Monte Carlo rng");
  const std::size_t n = features.rows();
  const std::size_t big_t = gp.num_outputs();
  const auto labels = labels_from_onehot(y);
  if (labels.size() != n) throw ShapeError("elbo: label count mismatch");

  std::vector<Tensor> means, sds;
  means.reserve(big_t);
  sds.reserve(big_t);
  for (std::size_t t = 0; t < big_t; ++t) {
    HeadPredictive hp = svgp_predict_head(gp, t, features);
    means.push_back(hp.mean);
    sds.push_back(sqrt(hp.var));
  }
  Tensor mean_mat = hstack(means);
  Tensor sd_mat = hstack(sds);

  const std::size_t samples = std::max<std::size_t>(1, lik.mc_train);
  Tensor acc = Tensor::scalar(0.0);
  for (std::size_t s = 0; s < samples; ++s) {
    std::vector<double> eps(n * big_t);
    for (double& e : eps) e = mc_rng->normal();
    Tensor f = add(mean_mat, mul(sd_mat, Tensor(Shape{n, big_t}, std::move(eps))));
    Tensor logp = sub(take_per_row(f, labels), logsumexp_rows(f));
    acc = add(acc, sum(logp));
  }
  Tensor ell = mul_scalar(acc, 1.0 / static_cast<double>(samples));
  const double scale = static_cast<double>(n_total) / static_cast<double>(n);
  return sub(mul_scalar(ell, scale), kl_whitened(gp));
}

}  // namespace

Tensor elbo(const GpState& gp, const LikelihoodSpec& lik,
            const Tensor& features, const Tensor& y, std::size_t n_total,
            Rng* mc_rng) {
  if (features.rows() == 0) throw ArgumentError("elbo: empty batch");
  if (lik.kind == LikelihoodKind::Gaussian)
    return elbo_gaussian(gp, features, y, n_total);
  return elbo_softmax(gp, lik, features, y, n_total, mc_rng);
}

void predictive_class_probs(PredictiveDistribution& pred,
                            std::size_t mc_samples, Rng& rng) {
  const std::size_t n = pred.latent_mean.rows();
  const std::size_t big_t = pred.latent_mean.cols();
  if (mc_samples == 0) throw ArgumentError("mc_samples must be >= 1");
  pred.probs = Tensor::zeros(Shape{n, big_t});
  std::vector<double> f(big_t), p(big_t);
  for (std::size_t i = 0; i < n; ++i) {
    double* prow = pred.probs.data() + i * big_t;
    for (std::size_t s = 0; s < mc_samples; ++s) {
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < big_t; ++c) {
        const double sd = std::sqrt(pred.latent_var.at(i, c));
        f[c] = pred.latent_mean.at(i, c) + sd * rng.normal();
        mx = std::max(mx, f[c]);
      }
      double z = 0.0;
      for (std::size_t c = 0; c < big_t; ++c) {
        p[c] = std::exp(f[c] - mx);
        z += p[c];
      }
      for (std::size_t c = 0; c < big_t; ++c) prow[c] += p[c] / z;
    }
    double total = 0.0;
    for (std::size_t c = 0; c < big_t; ++c) {
      prow[c] /= static_cast<double>(mc_samples);
      total += prow[c];
    }
    // Renormalize away accumulated rounding.
    for (std::size_t c = 0; c < big_t; ++c) prow[c] /= total;
  }
  pred.entropy = predictive_entropy(pred.probs);
  pred.pred_class.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* prow = pred.probs.data() + i * big_t;
    pred.pred_class[i] =
        static_cast<std::size_t>(std::max_element(prow, prow + big_t) - prow);
  }
}

std::vector<double> predictive_entropy(const Tensor& probs) {
  const std::size_t n = probs.rows(), big_t = probs.cols();
  std::vector<double> h(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < big_t; ++c) {
      const double p = probs.at(i, c);
      if (p > 0.0) h[i] -= p * std::log(p);
    }
  }
  return h;
}

std::vector<std::size_t> labels_from_onehot(const Tensor& y) {
  const std::size_t n = y.rows(), big_t = y.cols();
  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = y.data() + i * big_t;
    labels[i] =
        static_cast<std::size_t>(std::max_element(row, row + big_t) - row);
  }
  return labels;
}

}  // namespace due

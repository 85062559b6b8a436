#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "due/core/error.hpp"
#include "due/core/ops.hpp"
#include "due/gp/exact.hpp"
#include "due/gp/svgp.hpp"
#include "due/train/optimizer.hpp"
#include "helpers.hpp"

using namespace due;
using due::testing::random_tensor;

namespace {

GpState random_state(KernelKind kind, std::size_t m, std::size_t j,
                     std::uint64_t seed, double raw_scale = 0.3) {
  GpState gp = GpState::create(kind, m, j, 1, true, 0.05);
  Rng rng(seed);
  for (std::size_t i = 0; i < gp.inducing.size(); ++i)
    gp.inducing.data()[i] = rng.normal();
  for (std::size_t i = 0; i < m; ++i)
    gp.heads[0].whitened_mean.data()[i] = 0.5 * rng.normal();
  for (std::size_t i = 0; i < m * m; ++i)
    gp.heads[0].cov_factor_raw.data()[i] = raw_scale * rng.normal();
  return gp;
}

}  // namespace

TEST_CASE("kernel at zero distance equals the output scale") {
  Tensor x(Shape{1, 2}, {0.3, -0.7});
  Tensor l = Tensor::scalar(0.9);
  Tensor s = Tensor::scalar(1.7);
  CHECK(kernel_eval(KernelKind::Rbf, x, x, l, s).item() ==
        doctest::Approx(1.7));
  CHECK(kernel_eval(KernelKind::Matern32, x, x, l, s).item() ==
        doctest::Approx(1.7));
}

TEST_CASE("rbf value at one length scale of separation") {
  Tensor a(Shape{1, 1}, {0.0});
  Tensor b(Shape{1, 1}, {0.8});
  Tensor l = Tensor::scalar(0.8);
  Tensor s = Tensor::scalar(1.0);
  CHECK(kernel_eval(KernelKind::Rbf, a, b, l, s).item() ==
        doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
}

TEST_CASE("gram matrices are positive semidefinite") {
  Rng rng(3);
  for (KernelKind kind : {KernelKind::Rbf, KernelKind::Matern32}) {
    Tensor pts = random_tensor({6, 3}, rng, 1.0, 0.0, false);
    Tensor gram = kernel_eval(kind, pts, pts, Tensor::scalar(0.7),
                              Tensor::scalar(1.3));
    Eigen::MatrixXd g(6, 6);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) g(i, j) = gram.at(i, j);
    const auto eigvals =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(g).eigenvalues();
    CHECK(eigvals(0) >= -1e-10);
  }
}

TEST_CASE("initial length scale from pairwise distances") {
  Tensor two(Shape{2, 1}, {0.0, 3.0});
  CHECK(init_lengthscale(two) == doctest::Approx(3.0));

  Tensor three(Shape{3, 1}, {0.0, 1.0, 2.0});
  CHECK(init_lengthscale(three) == doctest::Approx(4.0 / 3.0));

  Tensor dup(Shape{4, 2}, {1, 1, 1, 1, 1, 1, 1, 1});
  CHECK(init_lengthscale(dup) == 1.0);  // degenerate fallback

  Tensor one(Shape{1, 1}, {0.0});
  CHECK_THROWS_AS(init_lengthscale(one), ArgumentError);
}

TEST_CASE("inducing initialization") {
  Tensor pts(Shape{3, 2}, {0, 0, 4, 4, -4, 2});
  Tensor z = init_inducing(pts, 3, 5);
  CHECK(z.rows() == 3);
  // With m = p every point is a centroid.
  for (std::size_t i = 0; i < 3; ++i) {
    bool found = false;
    for (std::size_t c = 0; c < 3; ++c)
      if (pts.at(i, 0) == z.at(c, 0) && pts.at(i, 1) == z.at(c, 1))
        found = true;
    CHECK(found);
  }
  Tensor z2 = init_inducing(pts, 3, 5);
  for (std::size_t i = 0; i < z.size(); ++i)
    CHECK(z.data()[i] == z2.data()[i]);
}

TEST_CASE("prior variational state reproduces the GP prior") {
  GpState gp = GpState::create(KernelKind::Rbf, 4, 2, 1, true);
  Rng rng(7);
  for (std::size_t i = 0; i < gp.inducing.size(); ++i)
    gp.inducing.data()[i] = rng.normal();
  gp.heads[0].mean_const.data()[0] = 0.37;
  gp.heads[0].log_outputscale.data()[0] = std::log(1.9);

  Tensor test = random_tensor({6, 2}, rng, 2.0, 0.0, false);
  auto pred = svgp_predict(gp, test);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(pred.latent_mean.at(i, 0) == doctest::Approx(0.37).epsilon(1e-9));
    CHECK(pred.latent_var.at(i, 0) == doctest::Approx(1.9).epsilon(1e-6));
  }
}

TEST_CASE("vanishing output scale degenerates to the constant mean") {
  GpState gp = random_state(KernelKind::Rbf, 4, 2, 11);
  gp.heads[0].log_outputscale.data()[0] = std::log(1e-14);
  gp.heads[0].mean_const.data()[0] = -1.25;
  Rng rng(12);
  Tensor test = random_tensor({5, 2}, rng, 1.0, 0.0, false);
  auto pred = svgp_predict(gp, test);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(std::abs(pred.latent_mean.at(i, 0) + 1.25) < 1e-6);
    CHECK(pred.latent_var.at(i, 0) < 1e-9);
  }
}

TEST_CASE("predictive variance reverts to the prior far from inducing") {
  GpState gp = random_state(KernelKind::Rbf, 5, 2, 13);
  const double s = std::exp(gp.heads[0].log_outputscale.item());
  Tensor far(Shape{2, 2}, {50.0, 50.0, -60.0, 40.0});
  auto pred = svgp_predict(gp, far);
  for (std::size_t i = 0; i < 2; ++i)
    CHECK(std::abs(pred.latent_var.at(i, 0) - s) < 1e-6);
}

TEST_CASE("shrinking S decreases the predictive variance pointwise") {
  GpState gp = GpState::create(KernelKind::Rbf, 4, 2, 1, true);
  Rng rng(17);
  for (std::size_t i = 0; i < gp.inducing.size(); ++i)
    gp.inducing.data()[i] = rng.normal();
  Tensor test = random_tensor({6, 2}, rng, 1.0, 0.0, false);
  auto with_identity = svgp_predict(gp, test);
  for (std::size_t i = 0; i < 4; ++i)
    gp.heads[0].cov_factor_raw.data()[i * 4 + i] = -20.0;  // S ~ 0
  auto with_zero = svgp_predict(gp, test);
  for (std::size_t i = 0; i < 6; ++i)
    CHECK(with_zero.latent_var.at(i, 0) <=
          with_identity.latent_var.at(i, 0) + 1e-12);
}

TEST_CASE("whitened KL closed forms") {
  GpState gp = GpState::create(KernelKind::Rbf, 2, 1, 1, true);
  CHECK(kl_whitened(gp).item() == doctest::Approx(0.0));

  // S = 4I on m = 2: KL = 0.5 (8 - 2 - 2 ln 4) = 3 - 2 ln 2.
  for (std::size_t i = 0; i < 2; ++i)
    gp.heads[0].cov_factor_raw.data()[i * 2 + i] = std::log(2.0);
  CHECK(kl_whitened(gp).item() ==
        doctest::Approx(3.0 - 2.0 * std::log(2.0)).epsilon(1e-12));

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    GpState r = random_state(KernelKind::Rbf, 5, 2, seed + 40, 0.6);
    CHECK(kl_whitened(r).item() >= -1e-12);
  }
}

TEST_CASE("gaussian elbo matches the hand formula at zero KL") {
  const std::size_t n = 2;
  GpState gp = GpState::create(KernelKind::Rbf, 3, 1, 1, true, 0.04);
  Rng rng(19);
  for (std::size_t i = 0; i < gp.inducing.size(); ++i)
    gp.inducing.data()[i] = rng.normal();
  Tensor feats(Shape{n, 1}, {0.2, -0.4});
  Tensor y(Shape{n, 1}, {0.5, -0.1});

  LikelihoodSpec lik;
  const double bound = elbo(gp, lik, feats, y, n).item();

  // KL = 0 at the initial state, so the bound is the expected
  // log-likelihood: sum_i -0.5 log(2 pi s2) - ((y-m)^2 + v) / (2 s2).
  auto pred = svgp_predict(gp, feats);
  const double s2 = gp.noise_var();
  double expect = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y.at(i, 0) - pred.latent_mean.at(i, 0);
    expect += -0.5 * std::log(2.0 * M_PI * s2) -
              (r * r + pred.latent_var.at(i, 0)) / (2.0 * s2);
  }
  CHECK(kl_whitened(gp).item() == doctest::Approx(0.0));
  CHECK(bound == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("elbo never exceeds the exact log marginal likelihood") {
  Rng rng(23);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const std::size_t n = 12, m = 5;
    Tensor feats = random_tensor({n, 2}, rng, 1.0, 0.0, false);
    std::vector<double> yv(n);
    for (double& v : yv) v = rng.normal();
    Tensor y(Shape{n, 1}, yv);

    GpState gp = random_state(KernelKind::Rbf, m, 2, seed + 60, 0.4);
    LikelihoodSpec lik;
    const double bound = elbo(gp, lik, feats, y, n).item();

    PlainKernelSpec spec;
    spec.lengthscale = std::exp(gp.heads[0].log_lengthscale.item());
    spec.outputscale = std::exp(gp.heads[0].log_outputscale.item());
    spec.mean = gp.heads[0].mean_const.item();
    const double exact =
        exact_gp_log_marginal(spec, feats, yv, gp.noise_var()).total;
    CHECK(bound <= exact + 1e-8);
  }
}

TEST_CASE("tight configuration closes the gap to the exact marginal") {
  // All inducing inputs on the training inputs, variational parameters
  // optimized, hyperparameters frozen.
  const std::size_t n = 14;
  Rng rng(29);
  std::vector<double> fv(n), yv(n);
  for (std::size_t i = 0; i < n; ++i) {
    fv[i] = rng.uniform(-2.0, 2.0);
    yv[i] = std::sin(2.0 * fv[i]) + 0.05 * rng.normal();
  }
  Tensor feats(Shape{n, 1}, fv);
  Tensor y(Shape{n, 1}, yv);

  GpState gp = GpState::create(KernelKind::Rbf, n, 1, 1, true, 0.01);
  std::copy_n(feats.data(), n, gp.inducing.data());
  gp.inducing.set_requires_grad(false);

  LikelihoodSpec lik;
  OptimizerConfig oc;
  oc.lr = 0.02;
  Optimizer opt(oc, {gp.heads[0].whitened_mean, gp.heads[0].cov_factor_raw});
  for (int it = 0; it < 3000; ++it) {
    Tensor loss = neg(elbo(gp, lik, feats, y, n));
    opt.zero_grad();
    backward(loss);
    opt.step();
  }

  PlainKernelSpec spec;
  spec.lengthscale = std::exp(gp.heads[0].log_lengthscale.item());
  spec.outputscale = std::exp(gp.heads[0].log_outputscale.item());
  const double exact =
      exact_gp_log_marginal(spec, feats, yv, gp.noise_var()).total;
  const double bound = elbo(gp, lik, feats, y, n).item();
  CHECK(exact - bound >= -1e-8);
  CHECK(exact - bound < 1e-2);

  // Predictive moments agree with the dense solution.
  Rng trng(31);
  Tensor test = random_tensor({10, 1}, trng, 1.5, 0.0, false);
  auto approx = svgp_predict(gp, test);
  std::vector<double> exact_mean, exact_var;
  exact_gp_predict(spec, feats, yv, gp.noise_var(), test, exact_mean,
                   exact_var);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(std::abs(approx.latent_mean.at(i, 0) - exact_mean[i]) < 1e-3);
    CHECK(std::abs(approx.latent_var.at(i, 0) - exact_var[i]) < 1e-3);
  }
}

TEST_CASE("class probabilities: zero variance reduces to softmax") {
  PredictiveDistribution pred;
  pred.latent_mean = Tensor(Shape{2, 3}, {1.0, 0.0, -1.0, 0.3, 0.3, 0.3});
  pred.latent_var = Tensor::full({2, 3}, 1e-18);
  Rng rng(37);
  predictive_class_probs(pred, 16, rng);
  for (std::size_t i = 0; i < 2; ++i) {
    double z = 0.0;
    for (std::size_t c = 0; c < 3; ++c)
      z += std::exp(pred.latent_mean.at(i, c));
    for (std::size_t c = 0; c < 3; ++c)
      CHECK(pred.probs.at(i, c) ==
            doctest::Approx(std::exp(pred.latent_mean.at(i, c)) / z)
                .epsilon(1e-9));
  }
  CHECK(pred.pred_class[0] == 0);
}

TEST_CASE("symmetric latents approach uniform probabilities") {
  PredictiveDistribution pred;
  pred.latent_mean = Tensor::zeros({1, 4});
  pred.latent_var = Tensor::full({1, 4}, 2.0);
  Rng rng(41);
  predictive_class_probs(pred, 10000, rng);
  // Within three MC standard errors of 1/4.
  const double se = 3.0 * 0.5 / std::sqrt(10000.0);
  for (std::size_t c = 0; c < 4; ++c)
    CHECK(std::abs(pred.probs.at(0, c) - 0.25) < se);
}

TEST_CASE("probability rows are normalized") {
  PredictiveDistribution pred;
  Rng rng(43);
  pred.latent_mean = random_tensor({20, 5}, rng, 2.0, 0.0, false);
  pred.latent_var =
      random_tensor({20, 5}, rng, 0.0, 1.0, false);  // all-ones variance
  predictive_class_probs(pred, 32, rng);
  for (std::size_t i = 0; i < 20; ++i) {
    double z = 0.0;
    for (std::size_t c = 0; c < 5; ++c) z += pred.probs.at(i, c);
    CHECK(std::abs(z - 1.0) <= 1e-9);
  }
}

TEST_CASE("entropy values") {
  Tensor p(Shape{3, 2}, {0.5, 0.5, 1.0, 0.0, 0.9, 0.1});
  auto h = predictive_entropy(p);
  CHECK(h[0] == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(h[1] == doctest::Approx(0.0));
  CHECK(h[2] == doctest::Approx(0.3251).epsilon(1e-3));
}

TEST_CASE("paired prediction is consistent with single-point prediction") {
  GpState gp = random_state(KernelKind::Rbf, 5, 3, 47);
  Rng rng(48);
  Tensor f0 = random_tensor({7, 3}, rng, 1.0, 0.0, false);
  Tensor f1 = random_tensor({7, 3}, rng, 1.0, 0.0, false);
  auto joint = svgp_predict_paired(gp, f0, f1);
  auto p0 = svgp_predict(gp, f0);
  auto p1 = svgp_predict(gp, f1);
  for (std::size_t i = 0; i < 7; ++i) {
    CHECK(joint.mean0[i] == doctest::Approx(p0.latent_mean.at(i, 0)));
    CHECK(joint.mean1[i] == doctest::Approx(p1.latent_mean.at(i, 0)));
    CHECK(joint.var0[i] == doctest::Approx(p0.latent_var.at(i, 0)));
    CHECK(joint.var1[i] == doctest::Approx(p1.latent_var.at(i, 0)));
    // Identical inputs give correlation one.
  }
  auto same = svgp_predict_paired(gp, f0, f0);
  for (std::size_t i = 0; i < 7; ++i)
    CHECK(same.cov01[i] == doctest::Approx(same.var0[i]).epsilon(1e-9));
}

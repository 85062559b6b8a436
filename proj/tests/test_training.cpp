#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "due/core/error.hpp"
#include "due/core/ops.hpp"
#include "due/train/trainer.hpp"
#include "helpers.hpp"

using namespace due;

namespace {

ModelConfig small_regression_config() {
  ModelConfig mc;
  mc.fx.input_dim = 1;
  mc.fx.feature_dim = 32;
  mc.fx.depth = 2;
  mc.fx.spectral_coeff = 0.95;
  mc.kernel = KernelKind::Rbf;
  mc.likelihood.kind = LikelihoodKind::Gaussian;
  mc.likelihood.num_outputs = 1;
  mc.num_inducing = 10;
  return mc;
}

Dataset toy_sine(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = rng.uniform(-2.0, 2.0);
    ys[i] = std::sin(2.0 * xs[i]) + 0.1 * rng.normal();
  }
  Dataset ds;
  Tensor raw(Shape{n, 1}, std::move(xs));
  ds.scaler = Scaler::fit(raw);
  ds.x = ds.scaler.transform(raw);
  ds.y = Tensor(Shape{n, 1}, std::move(ys));
  ds.train_idx.resize(n);
  for (std::size_t i = 0; i < n; ++i) ds.train_idx[i] = i;
  ds.provenance = {"toy_sine", {{"n", double(n)}}, seed};
  return ds;
}

}  // namespace

TEST_CASE("optimizer: zero gradient leaves parameters unchanged") {
  Tensor p = Tensor::scalar(1.5, true);
  OptimizerConfig oc;
  oc.kind = OptimizerConfig::Kind::SgdMomentum;
  oc.lr = 0.1;
  Optimizer opt(oc, {p});
  backward(mul_scalar(p, 0.0));  // gradient exists but is zero
  opt.step();
  CHECK(p.item() == 1.5);
}

TEST_CASE("optimizer: single sgd step descends by lr * grad") {
  Tensor p = Tensor::scalar(2.0, true);
  OptimizerConfig oc;
  oc.kind = OptimizerConfig::Kind::SgdMomentum;
  oc.lr = 0.1;
  oc.momentum = 0.9;
  Optimizer opt(oc, {p});
  backward(p);  // d(p)/dp = 1
  opt.step();
  CHECK(p.item() == doctest::Approx(1.9));
}

TEST_CASE("adam converges on a quadratic bowl") {
  Tensor p(Shape{2}, {3.0, -2.0}, true);
  OptimizerConfig oc;
  oc.kind = OptimizerConfig::Kind::Adam;
  oc.lr = 0.05;
  Optimizer opt(oc, {p});
  for (int it = 0; it < 5000; ++it) {
    Tensor loss = sum(mul(p, p));
    opt.zero_grad();
    backward(loss);
    opt.step();
    if (std::abs(p.at(0)) < 1e-5 && std::abs(p.at(1)) < 1e-5) break;
  }
  CHECK(std::abs(p.at(0)) < 1e-4);
  CHECK(std::abs(p.at(1)) < 1e-4);
}

TEST_CASE("initialization is deterministic and sane") {
  Dataset ds = toy_sine(60, 3);
  TrainConfig tc;
  tc.seed = 42;

  auto make = [&] {
    DueModel model = DueModel::create(small_regression_config(), tc.seed);
    model.scaler = ds.scaler;
    initialize_model(model, ds, tc);
    return model;
  };
  DueModel a = make();
  DueModel b = make();
  for (std::size_t i = 0; i < a.gp.inducing.size(); ++i)
    CHECK(a.gp.inducing.data()[i] == b.gp.inducing.data()[i]);
  CHECK(a.gp.heads[0].log_lengthscale.item() ==
        b.gp.heads[0].log_lengthscale.item());

  // Initial state: whitened mean zero, S identity, default noise.
  for (std::size_t i = 0; i < 10; ++i)
    CHECK(a.gp.heads[0].whitened_mean.data()[i] == 0.0);
  CHECK(a.gp.noise_var() == doctest::Approx(0.01));

  const double l0 = std::exp(a.gp.heads[0].log_lengthscale.item());
  CHECK(l0 > 0.1);
  CHECK(l0 < 10.0);
}

TEST_CASE("dataset of exactly m points pins inducing inputs to the data") {
  Dataset ds = toy_sine(10, 5);
  ModelConfig mc = small_regression_config();
  mc.num_inducing = 10;
  TrainConfig tc;
  tc.seed = 7;
  DueModel model = DueModel::create(mc, tc.seed);
  model.scaler = ds.scaler;
  initialize_model(model, ds, tc);

  model.extractor.spectral_normalize();
  Tensor feats = model.features(ds.x, nullptr, Mode::Eval).detached();
  // Every inducing row must coincide with some feature row.
  for (std::size_t z = 0; z < 10; ++z) {
    double best = 1e18;
    for (std::size_t i = 0; i < 10; ++i) {
      double d2 = 0.0;
      for (std::size_t c = 0; c < feats.cols(); ++c) {
        const double r = model.gp.inducing.at(z, c) - feats.at(i, c);
        d2 += r * r;
      }
      best = std::min(best, d2);
    }
    CHECK(best < 1e-18);
  }
}

TEST_CASE("training lowers the loss and logs every epoch") {
  Dataset ds = toy_sine(80, 11);
  TrainConfig tc;
  tc.opt.kind = OptimizerConfig::Kind::Adam;
  tc.opt.lr = 0.01;
  tc.epochs = 120;
  tc.batch_size = 0;
  tc.seed = 1;

  DueModel model = DueModel::create(small_regression_config(), tc.seed);
  model.scaler = ds.scaler;
  initialize_model(model, ds, tc);
  TrainLog log = train_model(model, ds, tc);
  REQUIRE(log.epochs.size() == tc.epochs);
  CHECK(log.epochs.back().elbo > log.epochs.front().elbo);
  for (const auto& rec : log.epochs) {
    CHECK(std::isfinite(rec.elbo));
    CHECK(std::isfinite(rec.kl));
  }
  CHECK(model_rmse(model, ds, ds.train_idx) < 0.2);  // 2x the noise scale
}

TEST_CASE("smoothed elbo is non-decreasing on the toy problem") {
  Dataset ds = toy_sine(80, 13);
  TrainConfig tc;
  tc.opt.kind = OptimizerConfig::Kind::Adam;
  tc.opt.lr = 0.01;
  tc.epochs = 150;
  tc.seed = 2;
  DueModel model = DueModel::create(small_regression_config(), tc.seed);
  model.scaler = ds.scaler;
  initialize_model(model, ds, tc);
  TrainLog log = train_model(model, ds, tc);

  // 10-epoch window means, later windows never fall below earlier ones
  // beyond a small slack.
  std::vector<double> windows;
  for (std::size_t start = 0; start + 10 <= log.epochs.size(); start += 10) {
    double acc = 0.0;
    for (std::size_t i = start; i < start + 10; ++i)
      acc += log.epochs[i].elbo;
    windows.push_back(acc / 10.0);
  }
  for (std::size_t i = 1; i < windows.size(); ++i)
    CHECK(windows[i] >= windows[i - 1] - 0.5);
}

TEST_CASE("training is bitwise deterministic") {
  Dataset ds = toy_sine(50, 17);
  TrainConfig tc;
  tc.opt.kind = OptimizerConfig::Kind::Adam;
  tc.opt.lr = 0.01;
  tc.epochs = 30;
  tc.batch_size = 16;
  tc.seed = 9;

  auto run = [&] {
    DueModel model = DueModel::create(small_regression_config(), tc.seed);
    model.scaler = ds.scaler;
    initialize_model(model, ds, tc);
    return train_model(model, ds, tc);
  };
  TrainLog a = run();
  TrainLog b = run();
  REQUIRE(a.epochs.size() == b.epochs.size());
  for (std::size_t i = 0; i < a.epochs.size(); ++i) {
    CHECK(a.epochs[i].elbo == b.epochs[i].elbo);
    CHECK(a.epochs[i].kl == b.epochs[i].kl);
    CHECK(a.epochs[i].lengthscale0 == b.epochs[i].lengthscale0);
  }
}

TEST_CASE("non-finite loss aborts with a diagnostic") {
  Dataset ds = toy_sine(40, 19);
  // A huge learning rate reliably blows the loss up.
  TrainConfig tc;
  tc.opt.kind = OptimizerConfig::Kind::SgdMomentum;
  tc.opt.lr = 1e9;
  tc.epochs = 50;
  tc.seed = 3;
  DueModel model = DueModel::create(small_regression_config(), tc.seed);
  model.scaler = ds.scaler;
  initialize_model(model, ds, tc);
  try {
    train_model(model, ds, tc);
    FAIL("expected TrainingAbort");
  } catch (const TrainingAbort& abort) {
    CHECK(abort.diagnostic.find("epoch=") != std::string::npos);
  }
}

TEST_CASE("spectral constraint holds at every epoch boundary") {
  Dataset ds = toy_sine(60, 23);
  TrainConfig tc;
  tc.opt.kind = OptimizerConfig::Kind::Adam;
  tc.opt.lr = 0.02;
  tc.epochs = 40;
  tc.seed = 4;
  DueModel model = DueModel::create(small_regression_config(), tc.seed);
  model.scaler = ds.scaler;
  initialize_model(model, ds, tc);
  train_model(model, ds, tc);
  auto report = model.extractor.lipschitz_audit();
  for (std::size_t i = 1; i < report.layers.size(); ++i)
    CHECK(report.layers[i].sigma <= 0.95 * (1.0 + 1e-3) + 1e-9);
}

TEST_CASE("full elbo gradient on a 5-point toy matches finite differences") {
  const std::size_t n = 5, m = 3;
  Rng rng(29);
  Tensor feats = due::testing::random_tensor({n, 2}, rng);
  std::vector<double> yv(n);
  for (double& v : yv) v = rng.normal();
  Tensor y(Shape{n, 1}, yv);

  GpState gp = GpState::create(KernelKind::Rbf, m, 2, 1, true, 0.05);
  Rng zr(31);
  for (std::size_t i = 0; i < gp.inducing.size(); ++i)
    gp.inducing.data()[i] = zr.normal();
  for (std::size_t i = 0; i < m; ++i)
    gp.heads[0].whitened_mean.data()[i] = 0.4 * zr.normal();
  for (std::size_t i = 0; i < m * m; ++i)
    gp.heads[0].cov_factor_raw.data()[i] = 0.2 * zr.normal();

  LikelihoodSpec lik;
  auto leaves = gp.parameters();
  leaves.push_back(feats);
  const double err = due::testing::grad_check(
      leaves, [&] { return elbo(gp, lik, feats, y, n); });
  CHECK(err < 1e-4);
}

TEST_CASE("collapse probe reports geometry and the marginal decomposition") {
  Dataset ds = toy_sine(40, 37);
  TrainConfig tc;
  tc.seed = 5;
  DueModel model = DueModel::create(small_regression_config(), tc.seed);
  model.scaler = ds.scaler;
  initialize_model(model, ds, tc);

  std::vector<std::size_t> probe(ds.train_idx.begin(),
                                 ds.train_idx.begin() + 20);
  auto report = collapse_probe(model, ds, probe);
  CHECK(std::isfinite(report.marginal.total));
  CHECK(report.min_dist >= 0.0);
  CHECK(report.min_dist <= report.mean_dist);
  CHECK(report.mean_dist <= report.max_dist);
  CHECK_THROWS_AS(
      collapse_probe(model, ds, std::vector<std::size_t>(501, 0)),
      ArgumentError);
}

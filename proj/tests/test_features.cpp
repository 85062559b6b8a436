#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "due/core/error.hpp"
#include "due/core/ops.hpp"
#include "due/features/extractor.hpp"
#include "helpers.hpp"

using namespace due;
using due::testing::random_tensor;

namespace {

double largest_sv(const Tensor& w) {
  Eigen::MatrixXd m(w.rows(), w.cols());
  for (std::size_t i = 0; i < w.rows(); ++i)
    for (std::size_t j = 0; j < w.cols(); ++j) m(i, j) = w.at(i, j);
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

FeatureExtractorConfig small_cfg() {
  FeatureExtractorConfig cfg;
  cfg.input_dim = 3;
  cfg.feature_dim = 8;
  cfg.depth = 3;
  cfg.spectral_coeff = 0.95;
  return cfg;
}

double row_dist(const Tensor& a, std::size_t i, const Tensor& b,
                std::size_t j) {
  double acc = 0.0;
  for (std::size_t c = 0; c < a.cols(); ++c) {
    const double r = a.at(i, c) - b.at(j, c);
    acc += r * r;
  }
  return std::sqrt(acc);
}

}  // namespace

TEST_CASE("depth zero is the input map alone") {
  auto cfg = small_cfg();
  cfg.depth = 0;
  FeatureExtractor fx(cfg, Rng(1));
  Rng rng(2);
  Tensor x = random_tensor({5, 3}, rng, 1.0, 0.0, false);
  Tensor out = fx.forward(x, Mode::Eval);
  Tensor expect = add_rowvec(matmul(x, fx.input_weight()), fx.input_bias());
  for (std::size_t i = 0; i < out.size(); ++i)
    CHECK(out.data()[i] == doctest::Approx(expect.data()[i]));
}

TEST_CASE("zero block weights leave the representation unchanged") {
  auto cfg = small_cfg();
  FeatureExtractor fx(cfg, Rng(1));
  for (auto& block : fx.blocks()) {
    std::fill_n(block.weight.data(), block.weight.size(), 0.0);
    std::fill_n(block.bias.data(), block.bias.size(), 0.0);
  }
  Rng rng(2);
  Tensor x = random_tensor({4, 3}, rng, 1.0, 0.0, false);
  Tensor out = fx.forward(x, Mode::Eval);
  Tensor expect = add_rowvec(matmul(x, fx.input_weight()), fx.input_bias());
  for (std::size_t i = 0; i < out.size(); ++i)
    CHECK(out.data()[i] == doctest::Approx(expect.data()[i]));
}

TEST_CASE("eval forward is deterministic, bitwise") {
  auto cfg = small_cfg();
  cfg.dropout_rate = 0.5;  // must be ignored in eval mode
  FeatureExtractor fx(cfg, Rng(1));
  Rng rng(2);
  Tensor x = random_tensor({6, 3}, rng, 1.0, 0.0, false);
  Tensor a = fx.forward(x, Mode::Eval);
  Tensor b = fx.forward(x, Mode::Eval);
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(a.data()[i] == b.data()[i]);
}

TEST_CASE("spectral normalization rescales to the coefficient") {
  auto cfg = small_cfg();
  FeatureExtractor fx(cfg, Rng(3));
  auto& w = fx.blocks()[0].weight;
  // Inflate so the true sigma is far above the constraint.
  for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] *= 10.0;
  const double before = largest_sv(w);
  REQUIRE(before > 3.0);
  for (int i = 0; i < 30; ++i) fx.spectral_normalize();
  const double after = largest_sv(fx.blocks()[0].weight);
  CHECK(after <= 0.95 * (1.0 + 1e-3));
  CHECK(after > 0.95 - 1e-2);
}

TEST_CASE("weights already inside the constraint are untouched") {
  auto cfg = small_cfg();
  cfg.spectral_coeff = 3.0;
  FeatureExtractor fx(cfg, Rng(4));
  auto& w = fx.blocks()[1].weight;
  // He-initialized 8x8 weights have sigma well below 3.
  REQUIRE(largest_sv(w) < 3.0);
  std::vector<double> before(w.data(), w.data() + w.size());
  fx.spectral_normalize();
  for (std::size_t i = 0; i < w.size(); ++i)
    CHECK(w.data()[i] == before[i]);
}

TEST_CASE("batch-norm Lipschitz formula and constraint") {
  BatchNormState bn;
  bn.gamma = Tensor(Shape{2}, {2.0, -3.0}, true);
  bn.beta = Tensor::zeros({2});
  bn.running_mean = {0.0, 0.0};
  bn.running_var = {4.0, 1.0};
  bn.eps = 0.0;
  CHECK(batchnorm_lipschitz(bn) == doctest::Approx(3.0));

  batchnorm_constrain(bn, 1.0);
  CHECK(bn.gamma.at(0) == doctest::Approx(2.0 / 3.0));
  CHECK(bn.gamma.at(1) == doctest::Approx(-1.0));
  CHECK(batchnorm_lipschitz(bn) <= 1.0 + 1e-9);

  // Within the bound: no change.
  BatchNormState id;
  id.gamma = Tensor(Shape{1}, {1.0}, true);
  id.beta = Tensor::zeros({1});
  id.running_mean = {0.0};
  id.running_var = {1.0};
  id.eps = 0.0;
  batchnorm_constrain(id, 1.0);
  CHECK(id.gamma.at(0) == 1.0);
}

TEST_CASE("lipschitz audit: zero blocks bound to one") {
  auto cfg = small_cfg();
  FeatureExtractor fx(cfg, Rng(5));
  for (auto& block : fx.blocks())
    std::fill_n(block.weight.data(), block.weight.size(), 0.0);
  auto report = fx.lipschitz_audit();
  for (std::size_t i = 1; i < report.layers.size(); ++i)
    CHECK(report.layers[i].bound == doctest::Approx(1.0));
}

TEST_CASE("lipschitz audit: residual block bound is 1 + sigma") {
  auto cfg = small_cfg();
  cfg.depth = 1;
  FeatureExtractor fx(cfg, Rng(6));
  for (int i = 0; i < 30; ++i) fx.spectral_normalize();
  auto report = fx.lipschitz_audit();
  REQUIRE(report.layers.size() == 2);
  const double sigma = report.layers[1].sigma;
  CHECK(sigma <= 0.95 * (1.0 + 1e-3));
  CHECK(report.layers[1].bound == doctest::Approx(1.0 + sigma));
}

TEST_CASE("audit after normalization reports sigma within the constraint") {
  auto cfg = small_cfg();
  FeatureExtractor fx(cfg, Rng(7));
  for (auto& block : fx.blocks())
    for (std::size_t i = 0; i < block.weight.size(); ++i)
      block.weight.data()[i] *= 5.0;
  for (int i = 0; i < 30; ++i) fx.spectral_normalize();
  auto report = fx.lipschitz_audit();
  for (std::size_t i = 1; i < report.layers.size(); ++i)
    CHECK(report.layers[i].sigma <= 0.95 * (1.0 + 1e-3));
}

TEST_CASE("dropout identity cases and Monte Carlo mean") {
  Rng rng(8);
  Tensor x = Tensor::full({10, 4}, 1.0);
  Tensor same_rate0 = dropout(x, 0.0, rng, Mode::Train);
  Tensor same_eval = dropout(x, 0.7, rng, Mode::Eval);
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(same_rate0.data()[i] == 1.0);
    CHECK(same_eval.data()[i] == 1.0);
  }

  // Inverted dropout preserves the expectation.
  const double rate = 0.3;
  double acc = 0.0;
  std::size_t count = 0;
  Tensor big = Tensor::full({100, 10}, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    Tensor masked = dropout(big, rate, rng, Mode::Train);
    for (std::size_t i = 0; i < masked.size(); ++i) acc += masked.data()[i];
    count += masked.size();
  }
  CHECK(std::abs(acc / count - 1.0) < 0.02);

  CHECK_THROWS_AS(dropout(x, 1.0, rng, Mode::Train), ArgumentError);
}

TEST_CASE("upper Lipschitz bound holds on random pairs") {
  auto cfg = small_cfg();
  cfg.input_dim = 4;
  FeatureExtractor fx(cfg, Rng(9));
  for (int i = 0; i < 30; ++i) fx.spectral_normalize();
  const double bound = fx.lipschitz_audit().product_bound;

  Rng rng(10);
  const std::size_t pairs = 1000;
  Tensor a = random_tensor({pairs, 4}, rng, 2.0, 0.0, false);
  Tensor b = random_tensor({pairs, 4}, rng, 2.0, 0.0, false);
  Tensor fa = fx.forward(a, Mode::Eval);
  Tensor fb = fx.forward(b, Mode::Eval);
  for (std::size_t i = 0; i < pairs; ++i) {
    const double dx = row_dist(a, i, b, i);
    const double df = row_dist(fa, i, fb, i);
    CHECK(df <= bound * dx + 1e-9);
  }
}

TEST_CASE("lower Lipschitz: residual blocks contract by at most 1 - c") {
  // Square pure-residual stack: input map off (identity dimensions), no
  // normalization layers, c < 1.
  FeatureExtractorConfig cfg;
  cfg.input_dim = 6;
  cfg.feature_dim = 6;
  cfg.depth = 4;
  cfg.spectral_coeff = 0.9;
  FeatureExtractor fx(cfg, Rng(11));
  // Bypass the input map: make it the identity.
  std::fill_n(fx.input_weight().data(), fx.input_weight().size(), 0.0);
  for (std::size_t i = 0; i < 6; ++i)
    fx.input_weight().data()[i * 6 + i] = 1.0;
  for (int i = 0; i < 30; ++i) fx.spectral_normalize();

  Rng rng(12);
  const std::size_t pairs = 500;
  Tensor a = random_tensor({pairs, 6}, rng, 1.5, 0.0, false);
  Tensor b = random_tensor({pairs, 6}, rng, 1.5, 0.0, false);
  Tensor fa = fx.forward(a, Mode::Eval);
  Tensor fb = fx.forward(b, Mode::Eval);
  const double lower = std::pow(1.0 - 0.9, cfg.depth);
  for (std::size_t i = 0; i < pairs; ++i) {
    const double dx = row_dist(a, i, b, i);
    const double df = row_dist(fa, i, fb, i);
    CHECK(df >= lower * dx - 1e-9);
  }
}

TEST_CASE("train-mode batch norm keeps batch statistics standardized") {
  auto cfg = small_cfg();
  cfg.use_batchnorm = true;
  FeatureExtractor fx(cfg, Rng(13));
  Rng rng(14);
  Tensor x = random_tensor({64, 3}, rng, 3.0, 1.0, false);
  Rng drop(15);
  Tensor out = fx.forward(x, Mode::Train, &drop);
  CHECK(out.all_finite());
  // Running stats moved away from their init after a train pass.
  bool moved = false;
  for (const double v : fx.blocks()[0].bn->running_mean)
    if (v != 0.0) moved = true;
  CHECK(moved);
}

#include "due/baselines/ensemble.hpp"

#include <cmath>
#include <numeric>
#include <thread>

#include "due/core/error.hpp"
#include "due/core/ops.hpp"

namespace due {

GaussianMlp GaussianMlp::create(const FeatureExtractorConfig& cfg,
                                Rng init_rng) {
  GaussianMlp net;
  net.extractor = FeatureExtractor(cfg, init_rng.substream("body"));
  Rng head_rng = init_rng.substream("head");
  const std::size_t j = cfg.feature_dim;
  std::vector<double> w(j * 2);
  const double std = std::sqrt(1.0 / static_cast<double>(j));
  for (double& v : w) v = head_rng.normal(0.0, std);
  net.head_weight = Tensor(Shape{j, 2}, std::move(w), true);
  net.head_bias = Tensor::zeros(Shape{2}, true);
  return net;
}

std::pair<Tensor, Tensor> GaussianMlp::forward(const Tensor& x, Mode mode,
                                               Rng* rng) {
  Tensor h = extractor.forward(x, mode, rng);
  Tensor out = add_rowvec(matmul(h, head_weight), head_bias);
  const std::size_t n = x.rows();
  Tensor mean = take_per_row(out, std::vector<std::size_t>(n, 0));
  Tensor var = add_scalar(
      softplus(take_per_row(out, std::vector<std::size_t>(n, 1))), 1e-6);
  return {mean, var};
}

std::vector<Tensor> GaussianMlp::parameters() {
  auto params = extractor.parameters();
  params.push_back(head_weight);
  params.push_back(head_bias);
  return params;
}

namespace {

void train_member(GaussianMlp& net, const Dataset& data,
                  const EnsembleConfig& cfg, std::uint64_t member_seed) {
  Rng root(member_seed);
  Rng shuffle_rng = root.substream("shuffle");
  Rng dropout_rng = root.substream("dropout");
  Optimizer opt(cfg.opt, net.parameters());

  auto order = data.train_idx;
  const std::size_t n = order.size();
  const std::size_t batch = cfg.batch_size == 0 ? n : cfg.batch_size;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t stop = std::min(start + batch, n);
      std::vector<std::size_t> rows(order.begin() + start,
                                    order.begin() + stop);
      net.extractor.spectral_normalize();
      Tensor xb = data.x_rows(rows);
      Tensor yb = data.y_rows(rows);
      auto [mean_t, var_t] = net.forward(xb, Mode::Train, &dropout_rng);
      Tensor resid = sub(yb, mean_t);
      Tensor loss =
          mean(add(mul_scalar(log(mul_scalar(var_t, 2.0 * M_PI)), 0.5),
                   div(mul(resid, resid), mul_scalar(var_t, 2.0))));
      if (!std::isfinite(loss.item()))
        throw TrainingAbort("ensemble member diverged",
                            "epoch=" + std::to_string(epoch));
      opt.zero_grad();
      backward(loss);
      opt.step();
    }
  }
}

}  // namespace

DeepEnsemble DeepEnsemble::train(const Dataset& data,
                                 const EnsembleConfig& cfg) {
  if (cfg.members < 2)
    throw ArgumentError("ensemble: needs at least two members");
  DeepEnsemble ens;
  Rng root(cfg.seed);
  ens.members_.reserve(cfg.members);
  std::vector<std::uint64_t> seeds;
  for (std::size_t k = 0; k < cfg.members; ++k) {
    Rng sub = root.substream("member-" + std::to_string(k));
    ens.members_.push_back(GaussianMlp::create(cfg.fx, sub));
    seeds.push_back(sub.substream("train").next_u64());
  }

  // Members are independent; train a pair at a time.
  const std::size_t workers = 2;
  for (std::size_t start = 0; start < cfg.members; start += workers) {
    std::vector<std::thread> pool;
    for (std::size_t k = start; k < std::min(start + workers, cfg.members);
         ++k) {
      pool.emplace_back([&, k] {
        train_member(ens.members_[k], data, cfg, seeds[k]);
      });
    }
    for (auto& th : pool) th.join();
  }
  return ens;
}

void DeepEnsemble::predict(const Tensor& x, std::vector<double>& mean_out,
                           std::vector<double>& var_out) {
  const std::size_t n = x.rows(), k = members_.size();
  std::vector<double> mix_mean(n, 0.0), second(n, 0.0);
  for (auto& member : members_) {
    auto [mean, var] = member.forward(x, Mode::Eval, nullptr);
    for (std::size_t i = 0; i < n; ++i) {
      mix_mean[i] += mean.at(i);
      second[i] += var.at(i) + mean.at(i) * mean.at(i);
    }
  }
  mean_out.assign(n, 0.0);
  var_out.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    mean_out[i] = mix_mean[i] / static_cast<double>(k);
    var_out[i] =
        std::max(0.0, second[i] / static_cast<double>(k) -
                          mean_out[i] * mean_out[i]);
  }
}

}  // namespace due

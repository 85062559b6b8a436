#include "due/baselines/softmax_net.hpp"

#include <algorithm>
#include <cmath>

#include "due/core/error.hpp"
#include "due/core/ops.hpp"
#include "due/gp/svgp.hpp"

namespace due {

SoftmaxNet SoftmaxNet::train(const Dataset& data, const SoftmaxNetConfig& cfg) {
  SoftmaxNet net;
  Rng root(cfg.seed);
  net.extractor_ = FeatureExtractor(cfg.fx, root.substream("init"));
  Rng head_rng = root.substream("head");
  const std::size_t j = cfg.fx.feature_dim, t = cfg.num_classes;
  std::vector<double> w(j * t);
  const double std = std::sqrt(1.0 / static_cast<double>(j));
  for (double& v : w) v = head_rng.normal(0.0, std);
  net.head_weight_ = Tensor(Shape{j, t}, std::move(w), true);
  net.head_bias_ = Tensor::zeros(Shape{t}, true);

  auto params = net.extractor_.parameters();
  params.push_back(net.head_weight_);
  params.push_back(net.head_bias_);
  Optimizer opt(cfg.opt, params);

  Rng shuffle_rng = root.substream("shuffle");
  Rng dropout_rng = root.substream("dropout");
  auto order = data.train_idx;
  const std::size_t n = order.size();
  const std::size_t batch = cfg.batch_size == 0 ? n : cfg.batch_size;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t stop = std::min(start + batch, n);
      std::vector<std::size_t> rows(order.begin() + start,
                                    order.begin() + stop);
      net.extractor_.spectral_normalize();
      Tensor xb = data.x_rows(rows);
      const auto labels = labels_from_onehot(data.y_rows(rows));
      Tensor h = net.extractor_.forward(xb, Mode::Train, &dropout_rng);
      Tensor logits = add_rowvec(matmul(h, net.head_weight_), net.head_bias_);
      Tensor loss =
          mean(sub(logsumexp_rows(logits), take_per_row(logits, labels)));
      if (!std::isfinite(loss.item()))
        throw TrainingAbort("softmax net diverged",
                            "epoch=" + std::to_string(epoch));
      opt.zero_grad();
      backward(loss);
      opt.step();
    }
  }
  return net;
}

Tensor SoftmaxNet::predict_probs(const Tensor& x) {
  Tensor h = extractor_.forward(x, Mode::Eval, nullptr);
  Tensor logits = add_rowvec(matmul(h, head_weight_), head_bias_);
  const std::size_t n = logits.rows(), t = logits.cols();
  std::vector<double> probs(n * t);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = logits.data() + i * t;
    const double mx = *std::max_element(row, row + t);
    double z = 0.0;
    for (std::size_t c = 0; c < t; ++c) {
      probs[i * t + c] = std::exp(row[c] - mx);
      z += probs[i * t + c];
    }
    for (std::size_t c = 0; c < t; ++c) probs[i * t + c] /= z;
  }
  return Tensor(Shape{n, t}, std::move(probs));
}

double SoftmaxNet::accuracy(const Dataset& data,
                            const std::vector<std::size_t>& idx) {
  Tensor probs = predict_probs(data.x_rows(idx));
  const auto labels = labels_from_onehot(data.y_rows(idx));
  const std::size_t t = probs.cols();
  std::size_t hits = 0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const double* row = probs.data() + i * t;
    const std::size_t pred =
        static_cast<std::size_t>(std::max_element(row, row + t) - row);
    if (pred == labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(idx.size());
}

}  // namespace due

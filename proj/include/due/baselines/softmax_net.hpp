#pragma once

#include <cstdint>

#include "due/data/dataset.hpp"
#include "due/features/extractor.hpp"
#include "due/train/optimizer.hpp"

namespace due {

struct SoftmaxNetConfig {
  FeatureExtractorConfig fx;  // residual body, usually without the constraint
  OptimizerConfig opt;
  std::size_t num_classes = 2;
  std::size_t epochs = 200;
  std::size_t batch_size = 0;
  std::uint64_t seed = 0;
};

// The plain discriminative baseline: same residual body, linear + softmax
// head, cross-entropy training.
class SoftmaxNet {
public:
  static SoftmaxNet train(const Dataset& data, const SoftmaxNetConfig& cfg);

  // Row-normalized class probabilities.
  Tensor predict_probs(const Tensor& x);
  double accuracy(const Dataset& data, const std::vector<std::size_t>& idx);

private:
  FeatureExtractor extractor_;
  Tensor head_weight_;
  Tensor head_bias_;
};

}  // namespace due

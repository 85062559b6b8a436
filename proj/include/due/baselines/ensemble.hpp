#pragma once

#include <cstdint>
#include <vector>

#include "due/data/dataset.hpp"
#include "due/features/extractor.hpp"
#include "due/train/optimizer.hpp"

namespace due {

// One network of the deep ensemble: the shared residual architecture with
// a two-unit head predicting a Gaussian mean and (softplus) variance,
// trained on the Gaussian log-likelihood.
struct GaussianMlp {
  FeatureExtractor extractor;
  Tensor head_weight;  // [J x 2]
  Tensor head_bias;    // {2}

  static GaussianMlp create(const FeatureExtractorConfig& cfg, Rng init_rng);
  // Returns per-row mean and variance (variance floored at 1e-6).
  std::pair<Tensor, Tensor> forward(const Tensor& x, Mode mode, Rng* rng);
  std::vector<Tensor> parameters();
};

struct EnsembleConfig {
  FeatureExtractorConfig fx;  // spectral_norm typically off
  OptimizerConfig opt;
  std::size_t members = 10;
  std::size_t epochs = 200;
  std::size_t batch_size = 0;
  std::uint64_t seed = 0;
};

// Independently initialized members with per-member data order, trained in
// parallel on disjoint random streams and merged deterministically.
class DeepEnsemble {
public:
  static DeepEnsemble train(const Dataset& data, const EnsembleConfig& cfg);

  // Mixture moments: mean of means, and average(var + mean^2) - mean^2.
  void predict(const Tensor& x, std::vector<double>& mean_out,
               std::vector<double>& var_out);

  std::size_t size() const { return members_.size(); }
  GaussianMlp& member(std::size_t i) { return members_.at(i); }

private:
  std::vector<GaussianMlp> members_;
};

}  // namespace due

#pragma once

#include "due/data/dataset.hpp"
#include "due/features/extractor.hpp"
#include "due/gp/svgp.hpp"

namespace due {

// Full model bundle: feature extractor, inducing-point GP, likelihood, and
// the input scaler carried from the dataset.
struct ModelConfig {
  FeatureExtractorConfig fx;
  KernelKind kernel = KernelKind::Rbf;
  LikelihoodSpec likelihood;
  std::size_t num_inducing = 20;
  // Treatment models append the 0/1 indicator to the extractor output, so
  // the GP feature space is feature_dim + 1.
  bool append_treatment = false;
  double init_noise_var = 0.01;

  std::size_t gp_feature_dim() const {
    return fx.feature_dim + (append_treatment ? 1 : 0);
  }
};

struct DueModel {
  ModelConfig cfg;
  FeatureExtractor extractor;
  GpState gp;
  Scaler scaler;

  static DueModel create(const ModelConfig& cfg, std::uint64_t seed);

  // Extractor features for standardized inputs, with the treatment column
  // appended when the model expects one.
  Tensor features(const Tensor& x_std, const std::vector<double>* treatment,
                  Mode mode, Rng* dropout_rng = nullptr);

  std::vector<Tensor> parameters();
};

}  // namespace due

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "due/core/rng.hpp"
#include "due/core/tensor.hpp"

namespace due {

enum class Activation { Relu, Elu };
enum class Mode { Train, Eval };

Activation activation_from_string(const std::string& s);
std::string to_string(Activation a);

struct FeatureExtractorConfig {
  std::size_t input_dim = 2;
  std::size_t feature_dim = 128;
  std::size_t depth = 4;  // residual blocks after the input map
  double spectral_coeff = 0.95;
  std::size_t power_iterations = 1;
  double dropout_rate = 0.0;
  bool use_batchnorm = false;
  Activation activation = Activation::Relu;
  // Variant switches for the baseline architectures: a plain feed-forward
  // stack (no skip connections) and/or no spectral constraint.
  bool residual = true;
  bool spectral_norm = true;

  void validate() const;
};

struct BatchNormState {
  Tensor gamma;  // learnable, length = feature_dim
  Tensor beta;
  std::vector<double> running_mean;
  std::vector<double> running_var;
  double momentum = 0.99;
  double eps = 1e-5;
};

// Lipschitz bound of the batch-norm map under running statistics:
// max_i |gamma_i| / sqrt(running_var_i + eps).
double batchnorm_lipschitz(const BatchNormState& bn);

// Rescales gamma in place so the bound does not exceed coeff.
void batchnorm_constrain(BatchNormState& bn, double coeff);

// Inverted dropout: train mode masks and rescales by 1/(1-rate); eval mode
// is the identity.
Tensor dropout(const Tensor& x, double rate, Rng& rng, Mode mode);

struct LipschitzReport {
  struct Layer {
    std::string name;
    double sigma;        // largest singular value of the weight
    double bound;        // Lipschitz bound of the whole layer/block
  };
  std::vector<Layer> layers;
  double product_bound = 1.0;
};

// Residual fully connected feature extractor. The input map is a plain
// linear layer (no activation); each of the `depth` blocks computes
// x + f(x) with f = activation(linear(x)) plus optional batch norm and
// dropout. Spectral normalization rescales any weight whose largest
// singular value exceeds the coefficient.
class FeatureExtractor {
public:
  struct Block {
    Tensor weight;  // [J x J]
    Tensor bias;    // {J}
    std::vector<double> u;  // power-iteration state
    std::optional<BatchNormState> bn;
  };

  FeatureExtractor() = default;
  FeatureExtractor(const FeatureExtractorConfig& cfg, Rng init_rng);

  Tensor forward(const Tensor& x, Mode mode, Rng* dropout_rng = nullptr);

  // Applies the spectral constraint (and batch-norm constraint when
  // enabled) to all weights in place, updating the power-iteration states.
  void spectral_normalize();

  // Diagnostic: per-layer singular values (power iteration run to 1e-6
  // stationarity) and the product upper bound over the network.
  LipschitzReport lipschitz_audit() const;

  std::vector<Tensor> parameters();
  const FeatureExtractorConfig& config() const { return cfg_; }

  Tensor& input_weight() { return w_in_; }
  Tensor& input_bias() { return b_in_; }
  std::vector<Block>& blocks() { return blocks_; }
  const std::vector<Block>& blocks() const { return blocks_; }

private:
  FeatureExtractorConfig cfg_;
  Tensor w_in_;  // [input_dim x J]
  Tensor b_in_;  // {J}
  std::vector<double> u_in_;
  std::vector<Block> blocks_;
};

}  // namespace due

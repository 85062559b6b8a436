#pragma once

#include <string>
#include <vector>

#include "due/core/tensor.hpp"

namespace due {

struct OptimizerConfig {
  enum class Kind { SgdMomentum, Adam };
  Kind kind = Kind::Adam;
  double lr = 0.01;
  double momentum = 0.9;   // SGD
  double beta1 = 0.9;      // Adam
  double beta2 = 0.999;
  double eps = 1e-8;
};

OptimizerConfig::Kind optimizer_from_string(const std::string& s);
std::string to_string(OptimizerConfig::Kind k);

// First-order updates on a fixed parameter list. Gradients are read from
// the tensors' grad buffers; ascent on an objective is realized as descent
// on its negation by the caller.
class Optimizer {
public:
  Optimizer(OptimizerConfig cfg, std::vector<Tensor> params);

  void zero_grad();
  void step();
  std::size_t steps_taken() const { return t_; }

private:
  OptimizerConfig cfg_;
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> velocity_;  // SGD momentum
  std::vector<std::vector<double>> m_;         // Adam first moment
  std::vector<std::vector<double>> v_;         // Adam second moment
  std::size_t t_ = 0;
};

}  // namespace due

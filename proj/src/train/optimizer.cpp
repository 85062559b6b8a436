#include "due/train/optimizer.hpp"

#include <cmath>

#include "due/core/error.hpp"

namespace due {

OptimizerConfig::Kind optimizer_from_string(const std::string& s) {
  if (s == "sgd") return OptimizerConfig::Kind::SgdMomentum;
  if (s == "adam") return OptimizerConfig::Kind::Adam;
  throw ArgumentError("unknown optimizer: " + s);
}

std::string to_string(OptimizerConfig::Kind k) {
  return k == OptimizerConfig::Kind::SgdMomentum ? "sgd" : "adam";
}

Optimizer::Optimizer(OptimizerConfig cfg, std::vector<Tensor> params)
    : cfg_(cfg), params_(std::move(params)) {
  if (cfg_.lr <= 0.0) throw ArgumentError("optimizer: lr must be positive");
  if (cfg_.kind == OptimizerConfig::Kind::SgdMomentum) {
    velocity_.resize(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i)
      velocity_[i].assign(params_[i].size(), 0.0);
  } else {
    m_.resize(params_.size());
    v_.resize(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i) {
      m_[i].assign(params_[i].size(), 0.0);
      v_[i].assign(params_[i].size(), 0.0);
    }
  }
}

void Optimizer::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

void Optimizer::step() {
  ++t_;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor& p = params_[i];
    if (!p.has_grad()) continue;  // untouched this step
    const auto& g = p.grad();
    double* x = p.data();
    if (cfg_.kind == OptimizerConfig::Kind::SgdMomentum) {
      auto& vel = velocity_[i];
      for (std::size_t j = 0; j < g.size(); ++j) {
        vel[j] = cfg_.momentum * vel[j] + g[j];
        x[j] -= cfg_.lr * vel[j];
      }
    } else {
      auto& m = m_[i];
      auto& v = v_[i];
      const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
      const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
      for (std::size_t j = 0; j < g.size(); ++j) {
        m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g[j];
        v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g[j] * g[j];
        const double mhat = m[j] / bc1;
        const double vhat = v[j] / bc2;
        x[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
      }
    }
  }
}

}  // namespace due

#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "due/core/rng.hpp"
#include "due/core/tensor.hpp"

namespace due::testing {

inline Tensor random_tensor(Shape shape, Rng& rng, double scale = 1.0,
                            double offset = 0.0, bool requires_grad = true) {
  std::vector<double> v(shape_size(shape));
  for (double& x : v) x = offset + scale * rng.normal();
  return Tensor(std::move(shape), std::move(v), requires_grad);
}

inline double rel_err(double a, double b, double floor = 1e-3) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// Central finite differences (step 1e-5) of build() w.r.t. each leaf entry,
// compared with the backward pass. Returns the worst relative error.
inline double grad_check(std::vector<Tensor> leaves,
                         const std::function<Tensor()>& build,
                         double step = 1e-5) {
  Tensor out = build();
  for (auto& leaf : leaves) leaf.zero_grad();
  backward(out);
  std::vector<std::vector<double>> analytic;
  for (auto& leaf : leaves) {
    analytic.emplace_back(leaf.size(), 0.0);
    if (leaf.has_grad()) analytic.back() = leaf.grad();
  }

  double worst = 0.0;
  for (std::size_t li = 0; li < leaves.size(); ++li) {
    Tensor& leaf = leaves[li];
    for (std::size_t i = 0; i < leaf.size(); ++i) {
      const double saved = leaf.data()[i];
      leaf.data()[i] = saved + step;
      const double up = build().item();
      leaf.data()[i] = saved - step;
      const double down = build().item();
      leaf.data()[i] = saved;
      const double fd = (up - down) / (2.0 * step);
      worst = std::max(worst, rel_err(analytic[li][i], fd));
    }
  }
  return worst;
}

}  // namespace due::testing

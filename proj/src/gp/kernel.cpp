#include "due/gp/kernel.hpp"

#include <cmath>

#include "due/core/clustering.hpp"
#include "due/core/error.hpp"
#include "due/core/ops.hpp"
#include "due/simd/kernels.hpp"

namespace due {

KernelKind kernel_from_string(const std::string& s) {
  if (s == "rbf") return KernelKind::Rbf;
  if (s == "matern32") return KernelKind::Matern32;
  throw ArgumentError("unknown kernel: " + s);
}

std::string to_string(KernelKind k) {
  return k == KernelKind::Rbf ? "rbf" : "matern32";
}

Tensor kernel_from_sqdist(KernelKind kind, const Tensor& d2, const Tensor& l,
                          const Tensor& s) {
  if (l.size() != 1 || s.size() != 1)
    throw ShapeError("kernel hyperparameters must be scalars");
  const double lv = l.item(), sv = s.item();
  const std::size_t n = d2.size();
  std::vector<double> out(n);
  const double* dp = d2.data();

  if (kind == KernelKind::Rbf) {
    const double inv2l2 = 1.0 / (2.0 * lv * lv);
    for (std::size_t i = 0; i < n; ++i) out[i] = sv * std::exp(-dp[i] * inv2l2);
    auto d2n = d2.node(), ln = l.node(), sn = s.node();
    return detail::make_op(
        "rbf_kernel", d2.shape(), std::move(out), {d2, l, s},
        [=](TensorNode& o) {
          const double lvv = ln->data[0], svv = sn->data[0];
          const double c = 1.0 / (2.0 * lvv * lvv);
          if (d2n->requires_grad) {
            auto& g = d2n->grad_buffer();
            for (std::size_t i = 0; i < o.size(); ++i)
              g[i] += -o.grad[i] * o.data[i] * c;
          }
          if (ln->requires_grad) {
            double acc = 0.0;
            for (std::size_t i = 0; i < o.size(); ++i)
              acc += o.grad[i] * o.data[i] * d2n->data[i];
            ln->grad_buffer()[0] += acc / (lvv * lvv * lvv);
          }
          if (sn->requires_grad) {
            double acc = 0.0;
            for (std::size_t i = 0; i < o.size(); ++i)
              acc += o.grad[i] * o.data[i];
            sn->grad_buffer()[0] += acc / svv;
          }
        });
  }

  // matern 3/2
  const double sqrt3 = std::sqrt(3.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = sqrt3 * std::sqrt(dp[i]) / lv;
    out[i] = sv * (1.0 + a) * std::exp(-a);
  }
  auto d2n = d2.node(), ln = l.node(), sn = s.node();
  return detail::make_op(
      "matern32_kernel", d2.shape(), std::move(out), {d2, l, s},
      [=](TensorNode& o) {
        const double lvv = ln->data[0], svv = sn->data[0];
        if (d2n->requires_grad) {
          // dk/dd2 = -(3 s)/(2 l^2) exp(-a), finite at d2 = 0
          auto& g = d2n->grad_buffer();
          const double c = -1.5 * svv / (lvv * lvv);
          for (std::size_t i = 0; i < o.size(); ++i) {
            const double a = sqrt3 * std::sqrt(d2n->data[i]) / lvv;
            g[i] += o.grad[i] * c * std::exp(-a);
          }
        }
        if (ln->requires_grad) {
          // dk/dl = s a^2 exp(-a) / l
          double acc = 0.0;
          for (std::size_t i = 0; i < o.size(); ++i) {
            const double a = sqrt3 * std::sqrt(d2n->data[i]) / lvv;
            acc += o.grad[i] * svv * a * a * std::exp(-a) / lvv;
          }
          ln->grad_buffer()[0] += acc;
        }
        if (sn->requires_grad) {
          double acc = 0.0;
          for (std::size_t i = 0; i < o.size(); ++i)
            acc += o.grad[i] * o.data[i];
          sn->grad_buffer()[0] += acc / svv;
        }
      });
}

Tensor kernel_eval(KernelKind kind, const Tensor& a, const Tensor& b,
                   const Tensor& lengthscale, const Tensor& outputscale) {
  return kernel_from_sqdist(kind, pairwise_sqdist(a, b), lengthscale,
                            outputscale);
}

void kernel_gram(KernelKind kind, const double* a, std::size_t n,
                 const double* b, std::size_t m, std::size_t dim,
                 double lengthscale, double outputscale, double* out) {
  const auto& kr = simd::active();
  const double sqrt3 = std::sqrt(3.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double d2 = std::max(0.0, kr.sqdist(a + i * dim, b + j * dim, dim));
      if (kind == KernelKind::Rbf) {
        out[i * m + j] =
            outputscale * std::exp(-d2 / (2.0 * lengthscale * lengthscale));
      } else {
        const double av = sqrt3 * std::sqrt(d2) / lengthscale;
        out[i * m + j] = outputscale * (1.0 + av) * std::exp(-av);
      }
    }
  }
}

double init_lengthscale(const Tensor& features) {
  const std::size_t p = features.rows(), d = features.cols();
  if (p < 2) throw ArgumentError("init_lengthscale needs at least two rows");
  const auto& kr = simd::active();
  double acc = 0.0;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i + 1; j < p; ++j)
      acc += std::sqrt(
          std::max(0.0, kr.sqdist(features.data() + i * d,
                                  features.data() + j * d, d)));
  const double pairs = 0.5 * static_cast<double>(p) * static_cast<double>(p - 1);
  const double l = acc / pairs;
  return l > 0.0 ? l : 1.0;
}

Tensor init_inducing(const Tensor& features, std::size_t m,
                     std::uint64_t seed) {
  if (features.rows() < m)
    throw ArgumentError("init_inducing: fewer points than inducing inputs");
  return kmeans(features, m, seed).centroids;
}

}  // namespace due

#include "due/core/ops.hpp"

#include <algorithm>
#include <cmath>

#include "due/core/error.hpp"
#include "due/simd/kernels.hpp"

namespace due {
namespace {

const simd::Kernels& K() { return simd::active(); }

using NodePtr = std::shared_ptr<TensorNode>;

bool is_scalar(const Tensor& t) { return t.size() == 1; }

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape())
    throw ShapeError(std::string(op) + ": shape mismatch " +
                     shape_str(a.shape()) + " vs " + shape_str(b.shape()));
}

void require_rank2(const Tensor& a, const char* op) {
  if (a.rank() != 2)
    throw ShapeError(std::string(op) + ": expected rank-2 tensor, got " +
                     shape_str(a.shape()));
}

// Binary elementwise with optional size-1 broadcast on either side.
template <typename Fwd, typename BwA, typename BwB>
Tensor binary_op(const char* name, const Tensor& a, const Tensor& b, Fwd fwd,
                 BwA bwa, BwB bwb) {
  const bool sa = is_scalar(a), sb = is_scalar(b);
  if (!sa && !sb) require_same_shape(a, b, name);
  const Tensor& shaped = sa ? b : a;
  const std::size_t n = shaped.size();
  std::vector<double> out(n);
  const double* pa = a.data();
  const double* pb = b.data();
  for (std::size_t i = 0; i < n; ++i) fwd(out[i], pa[sa ? 0 : i], pb[sb ? 0 : i]);

  NodePtr an = a.node(), bn = b.node();
  return detail::make_op(
      name, shaped.shape(), std::move(out), {a, b}, [=](TensorNode& o) {
        const std::size_t m = o.size();
        if (an->requires_grad) {
          auto& g = an->grad_buffer();
          for (std::size_t i = 0; i < m; ++i)
            bwa(g[sa ? 0 : i], o.grad[i], an->data[sa ? 0 : i],
                bn->data[sb ? 0 : i], o.data[i]);
        }
        if (bn->requires_grad) {
          auto& g = bn->grad_buffer();
          for (std::size_t i = 0; i < m; ++i)
            bwb(g[sb ? 0 : i], o.grad[i], an->data[sa ? 0 : i],
                bn->data[sb ? 0 : i], o.data[i]);
        }
      });
}

template <typename Fwd, typename Bw>
Tensor unary_op(const char* name, const Tensor& a, Fwd fwd, Bw bw) {
  const std::size_t n = a.size();
  std::vector<double> out(n);
  const double* pa = a.data();
  for (std::size_t i = 0; i < n; ++i) out[i] = fwd(pa[i]);
  NodePtr an = a.node();
  return detail::make_op(name, a.shape(), std::move(out), {a},
                         [=](TensorNode& o) {
                           auto& g = an->grad_buffer();
                           for (std::size_t i = 0; i < o.size(); ++i)
                             g[i] += bw(o.grad[i], an->data[i], o.data[i]);
                         });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary_op(
      "add", a, b, [](double& o, double x, double y) { o = x + y; },
      [](double& g, double d, double, double, double) { g += d; },
      [](double& g, double d, double, double, double) { g += d; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary_op(
      "sub", a, b, [](double& o, double x, double y) { o = x - y; },
      [](double& g, double d, double, double, double) { g += d; },
      [](double& g, double d, double, double, double) { g -= d; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary_op(
      "mul", a, b, [](double& o, double x, double y) { o = x * y; },
      [](double& g, double d, double, double y, double) { g += d * y; },
      [](double& g, double d, double x, double, double) { g += d * x; });
}

Tensor div(const Tensor& a, const Tensor& b) {
  return binary_op(
      "div", a, b, [](double& o, double x, double y) { o = x / y; },
      [](double& g, double d, double, double y, double) { g += d / y; },
      [](double& g, double d, double, double y, double o) { g -= d * o / y; });
}

Tensor neg(const Tensor& a) {
  return unary_op(
      "neg", a, [](double x) { return -x; },
      [](double d, double, double) { return -d; });
}

Tensor add_scalar(const Tensor& a, double c) {
  return unary_op(
      "add_scalar", a, [c](double x) { return x + c; },
      [](double d, double, double) { return d; });
}

Tensor mul_scalar(const Tensor& a, double c) {
  return unary_op(
      "mul_scalar", a, [c](double x) { return x * c; },
      [c](double d, double, double) { return d * c; });
}

Tensor exp(const Tensor& a) {
  return unary_op(
      "exp", a, [](double x) { return std::exp(x); },
      [](double d, double, double o) { return d * o; });
}

Tensor log(const Tensor& a) {
  return unary_op(
      "log", a, [](double x) { return std::log(x); },
      [](double d, double x, double) { return d / x; });
}

Tensor sqrt(const Tensor& a) {
  return unary_op(
      "sqrt", a, [](double x) { return std::sqrt(x); },
      [](double d, double, double o) { return 0.5 * d / o; });
}

Tensor relu(const Tensor& a) {
  return unary_op(
      "relu", a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double d, double x, double) { return x > 0.0 ? d : 0.0; });
}

Tensor elu(const Tensor& a) {
  return unary_op(
      "elu", a, [](double x) { return x > 0.0 ? x : std::expm1(x); },
      [](double d, double x, double o) { return x > 0.0 ? d : d * (o + 1.0); });
}

Tensor softplus(const Tensor& a) {
  return unary_op(
      "softplus", a,
      [](double x) { return std::log1p(std::exp(-std::abs(x))) + std::max(x, 0.0); },
      [](double d, double x, double) { return d / (1.0 + std::exp(-x)); });
}

Tensor clamp_min(const Tensor& a, double floor) {
  return unary_op(
      "clamp_min", a, [floor](double x) { return x > floor ? x : floor; },
      [floor](double d, double x, double) { return x > floor ? d : 0.0; });
}

Tensor sum(const Tensor& a) {
  NodePtr an = a.node();
  return detail::make_op("sum", Shape{1}, {K().sum(a.data(), a.size())}, {a},
                         [=](TensorNode& o) {
                           auto& g = an->grad_buffer();
                           const double d = o.grad[0];
                           for (double& gi : g) gi += d;
                         });
}

Tensor mean(const Tensor& a) {
  const double inv = 1.0 / static_cast<double>(a.size());
  NodePtr an = a.node();
  return detail::make_op("mean", Shape{1},
                         {K().sum(a.data(), a.size()) * inv}, {a},
                         [=](TensorNode& o) {
                           auto& g = an->grad_buffer();
                           const double d = o.grad[0] * inv;
                           for (double& gi : g) gi += d;
                         });
}

Tensor col_mean(const Tensor& a) {
  require_rank2(a, "col_mean");
  const std::size_t n = a.rows(), d = a.cols();
  std::vector<double> out(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    K().add(out.data(), out.data(), a.data() + i * d, d);
  const double inv = 1.0 / static_cast<double>(n);
  K().scale(out.data(), out.data(), inv, d);
  NodePtr an = a.node();
  return detail::make_op("col_mean", Shape{d}, std::move(out), {a},
                         [=](TensorNode& o) {
                           auto& g = an->grad_buffer();
                           for (std::size_t i = 0; i < n; ++i)
                             K().axpy(g.data() + i * d, o.grad.data(), inv, d);
                         });
}

namespace {

Tensor rowvec_op(const char* name, const Tensor& x, const Tensor& v, int mode) {
  require_rank2(x, name);
  if (v.rank() != 1 || v.size() != x.cols())
    throw ShapeError(std::string(name) + ": vector shape " +
                     shape_str(v.shape()) + " does not match columns of " +
                     shape_str(x.shape()));
  const std::size_t n = x.rows(), d = x.cols();
  std::vector<double> out(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    double* orow = out.data() + i * d;
    const double* xrow = x.data() + i * d;
    if (mode == 0) K().add(orow, xrow, v.data(), d);
    if (mode == 1) K().sub(orow, xrow, v.data(), d);
    if (mode == 2) K().mul(orow, xrow, v.data(), d);
  }
  NodePtr xn = x.node(), vn = v.node();
  return detail::make_op(
      name, x.shape(), std::move(out), {x, v}, [=](TensorNode& o) {
        if (xn->requires_grad) {
          auto& g = xn->grad_buffer();
          if (mode == 2) {
            for (std::size_t i = 0; i < n; ++i)
              for (std::size_t j = 0; j < d; ++j)
                g[i * d + j] += o.grad[i * d + j] * vn->data[j];
          } else {
            K().add(g.data(), g.data(), o.grad.data(), n * d);
          }
        }
        if (vn->requires_grad) {
          auto& g = vn->grad_buffer();
          for (std::size_t i = 0; i < n; ++i) {
            const double* drow = o.grad.data() + i * d;
            if (mode == 0) K().add(g.data(), g.data(), drow, d);
            if (mode == 1) K().sub(g.data(), g.data(), drow, d);
            if (mode == 2)
              for (std::size_t j = 0; j < d; ++j)
                g[j] += drow[j] * xn->data[i * d + j];
          }
        }
      });
}

}  // namespace

Tensor add_rowvec(const Tensor& x, const Tensor& v) {
  return rowvec_op("add_rowvec", x, v, 0);
}
Tensor sub_rowvec(const Tensor& x, const Tensor& v) {
  return rowvec_op("sub_rowvec", x, v, 1);
}
Tensor mul_rowvec(const Tensor& x, const Tensor& v) {
  return rowvec_op("mul_rowvec", x, v, 2);
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k)
    throw ShapeError("matmul: inner dimensions " + shape_str(a.shape()) +
                     " x " + shape_str(b.shape()));
  std::vector<double> out(m * n, 0.0);
  K().matmul_nn(out.data(), a.data(), b.data(), m, k, n);
  NodePtr an = a.node(), bn = b.node();
  return detail::make_op(
      "matmul", Shape{m, n}, std::move(out), {a, b}, [=](TensorNode& o) {
        if (an->requires_grad) {
          // dA += dC * B^T
          K().matmul_nt(an->grad_buffer().data(), o.grad.data(),
                        bn->data.data(), m, n, k);
        }
        if (bn->requires_grad) {
          // dB += A^T * dC
          K().matmul_tn(bn->grad_buffer().data(), an->data.data(),
                        o.grad.data(), k, m, n);
        }
      });
}

Tensor transpose(const Tensor& a) {
  require_rank2(a, "transpose");
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = a.data()[i * n + j];
  NodePtr an = a.node();
  return detail::make_op("transpose", Shape{n, m}, std::move(out), {a},
                         [=](TensorNode& o) {
                           auto& g = an->grad_buffer();
                           for (std::size_t i = 0; i < m; ++i)
                             for (std::size_t j = 0; j < n; ++j)
                               g[i * n + j] += o.grad[j * m + i];
                         });
}

Tensor pairwise_sqdist(const Tensor& a, const Tensor& b) {
  require_rank2(a, "pairwise_sqdist");
  require_rank2(b, "pairwise_sqdist");
  const std::size_t n = a.rows(), m = b.rows(), d = a.cols();
  if (b.cols() != d)
    throw ShapeError("pairwise_sqdist: feature dims " + shape_str(a.shape()) +
                     " vs " + shape_str(b.shape()));
  std::vector<double> out(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = a.data() + i * d;
    for (std::size_t j = 0; j < m; ++j) {
      out[i * m + j] = std::max(0.0, K().sqdist(arow, b.data() + j * d, d));
    }
  }
  NodePtr an = a.node(), bn = b.node();
  return detail::make_op(
      "pairwise_sqdist", Shape{n, m}, std::move(out), {a, b},
      [=](TensorNode& o) {
        // dA = 2 (rowsum(D) . a - D b), dB = 2 (colsum(D) . b - D^T a)
        if (an->requires_grad) {
          std::vector<double> db(n * d, 0.0);
          K().matmul_nn(db.data(), o.grad.data(), bn->data.data(), n, m, d);
          auto& g = an->grad_buffer();
          for (std::size_t i = 0; i < n; ++i) {
            const double rs = K().sum(o.grad.data() + i * m, m);
            for (std::size_t c = 0; c < d; ++c)
              g[i * d + c] += 2.0 * (rs * an->data[i * d + c] - db[i * d + c]);
          }
        }
        if (bn->requires_grad) {
          std::vector<double> da(m * d, 0.0);
          K().matmul_tn(da.data(), o.grad.data(), an->data.data(), m, n, d);
          std::vector<double> cs(m, 0.0);
          for (std::size_t i = 0; i < n; ++i)
            K().add(cs.data(), cs.data(), o.grad.data() + i * m, m);
          auto& g = bn->grad_buffer();
          for (std::size_t j = 0; j < m; ++j)
            for (std::size_t c = 0; c < d; ++c)
              g[j * d + c] +=
                  2.0 * (cs[j] * bn->data[j * d + c] - da[j * d + c]);
        }
      });
}

Tensor colwise_sqnorm(const Tensor& a) {
  require_rank2(a, "colwise_sqnorm");
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = a.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) out[j] += row[j] * row[j];
  }
  NodePtr an = a.node();
  return detail::make_op("colwise_sqnorm", Shape{n, 1}, std::move(out), {a},
                         [=](TensorNode& o) {
                           auto& g = an->grad_buffer();
                           for (std::size_t i = 0; i < m; ++i)
                             for (std::size_t j = 0; j < n; ++j)
                               g[i * n + j] +=
                                   2.0 * o.grad[j] * an->data[i * n + j];
                         });
}

Tensor diag_part(const Tensor& a) {
  require_rank2(a, "diag_part");
  const std::size_t n = a.rows();
  if (a.cols() != n) throw ShapeError("diag_part: matrix must be square");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = a.data()[i * n + i];
  NodePtr an = a.node();
  return detail::make_op("diag_part", Shape{n, 1}, std::move(out), {a},
                         [=](TensorNode& o) {
                           auto& g = an->grad_buffer();
                           for (std::size_t i = 0; i < n; ++i)
                             g[i * n + i] += o.grad[i];
                         });
}

Tensor lower_tri_posdiag(const Tensor& raw) {
  require_rank2(raw, "lower_tri_posdiag");
  const std::size_t n = raw.rows();
  if (raw.cols() != n)
    throw ShapeError("lower_tri_posdiag: matrix must be square");
  std::vector<double> out(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) out[i * n + j] = raw.data()[i * n + j];
    out[i * n + i] = std::exp(raw.data()[i * n + i]);
  }
  NodePtr rn = raw.node();
  return detail::make_op("lower_tri_posdiag", raw.shape(), std::move(out),
                         {raw}, [=](TensorNode& o) {
                           auto& g = rn->grad_buffer();
                           for (std::size_t i = 0; i < n; ++i) {
                             for (std::size_t j = 0; j < i; ++j)
                               g[i * n + j] += o.grad[i * n + j];
                             g[i * n + i] += o.grad[i * n + i] * o.data[i * n + i];
                           }
                         });
}

Tensor hstack(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ArgumentError("hstack: no tensors given");
  const std::size_t n = parts.front().rows();
  std::size_t total = 0;
  for (const Tensor& p : parts) {
    if (p.rank() > 2) throw ShapeError("hstack: rank-2 tensors required");
    if (p.rows() != n) throw ShapeError("hstack: row count mismatch");
    total += p.cols();
  }
  std::vector<double> out(n * total);
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const Tensor& p : parts) {
    const std::size_t c = p.cols();
    offsets.push_back(off);
    for (std::size_t i = 0; i < n; ++i)
      std::copy_n(p.data() + i * c, c, out.data() + i * total + off);
    off += c;
  }
  std::vector<NodePtr> nodes;
  std::vector<std::size_t> widths;
  for (const Tensor& p : parts) {
    nodes.push_back(p.node());
    widths.push_back(p.cols());
  }
  return detail::make_op(
      "hstack", Shape{n, total}, std::move(out), parts, [=](TensorNode& o) {
        for (std::size_t pi = 0; pi < nodes.size(); ++pi) {
          if (!nodes[pi]->requires_grad) continue;
          auto& g = nodes[pi]->grad_buffer();
          const std::size_t c = widths[pi], o0 = offsets[pi];
          for (std::size_t i = 0; i < n; ++i)
            K().add(g.data() + i * c, g.data() + i * c,
                    o.grad.data() + i * total + o0, c);
        }
      });
}

Tensor reshape(const Tensor& a, Shape target) {
  if (shape_size(target) != a.size())
    throw ShapeError("reshape: size mismatch " + shape_str(a.shape()) +
                     " -> " + shape_str(target));
  std::vector<double> out(a.data(), a.data() + a.size());
  NodePtr an = a.node();
  return detail::make_op("reshape", std::move(target), std::move(out), {a},
                         [=](TensorNode& o) {
                           auto& g = an->grad_buffer();
                           K().add(g.data(), g.data(), o.grad.data(), o.size());
                         });
}

Tensor logsumexp_rows(const Tensor& f) {
  require_rank2(f, "logsumexp_rows");
  const std::size_t n = f.rows(), t = f.cols();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = f.data() + i * t;
    const double mx = *std::max_element(row, row + t);
    double acc = 0.0;
    for (std::size_t c = 0; c < t; ++c) acc += std::exp(row[c] - mx);
    out[i] = mx + std::log(acc);
  }
  NodePtr fn = f.node();
  return detail::make_op("logsumexp_rows", Shape{n, 1}, std::move(out), {f},
                         [=](TensorNode& o) {
                           auto& g = fn->grad_buffer();
                           for (std::size_t i = 0; i < n; ++i) {
                             const double* row = fn->data.data() + i * t;
                             const double lse = o.data[i];
                             for (std::size_t c = 0; c < t; ++c)
                               g[i * t + c] +=
                                   o.grad[i] * std::exp(row[c] - lse);
                           }
                         });
}

Tensor take_per_row(const Tensor& f, const std::vector<std::size_t>& idx) {
  require_rank2(f, "take_per_row");
  const std::size_t n = f.rows(), t = f.cols();
  if (idx.size() != n)
    throw ShapeError("take_per_row: index count does not match rows");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (idx[i] >= t) throw ArgumentError("take_per_row: index out of range");
    out[i] = f.data()[i * t + idx[i]];
  }
  NodePtr fn = f.node();
  auto saved = idx;
  return detail::make_op("take_per_row", Shape{n, 1}, std::move(out), {f},
                         [=](TensorNode& o) {
                           auto& g = fn->grad_buffer();
                           for (std::size_t i = 0; i < n; ++i)
                             g[i * t + saved[i]] += o.grad[i];
                         });
}

}  // namespace due

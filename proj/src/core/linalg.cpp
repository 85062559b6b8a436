#include "due/core/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "due/core/error.hpp"
#include "due/simd/kernels.hpp"

namespace due {
namespace linalg {

bool cholesky_in_place(double* a, std::size_t n) {
  const auto& kr = simd::active();
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j * n + j] - kr.dot(a + j * n, a + j * n, j);
    if (!(d > 0.0) || !std::isfinite(d)) return false;
    d = std::sqrt(d);
    a[j * n + j] = d;
    const double inv = 1.0 / d;
    for (std::size_t i = j + 1; i < n; ++i) {
      a[i * n + j] = (a[i * n + j] - kr.dot(a + i * n, a + j * n, j)) * inv;
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a[i * n + j] = 0.0;
  return true;
}

double cholesky_jittered(const double* k, std::size_t n, double* l_out) {
  double mean_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean_diag += k[i * n + i];
  mean_diag /= static_cast<double>(n);
  const double base = std::abs(mean_diag) > 0.0 ? std::abs(mean_diag) : 1.0;

  double jitter = 1e-8 * base;
  const double cap = 1e-3 * base;
  while (true) {
    std::copy_n(k, n * n, l_out);
    for (std::size_t i = 0; i < n; ++i) l_out[i * n + i] += jitter;
    if (cholesky_in_place(l_out, n)) return jitter;
    if (jitter >= cap) {
      throw DecompositionError(
          "cholesky failed after jitter escalation up to " +
              std::to_string(jitter),
          jitter);
    }
    jitter = std::min(jitter * 10.0, cap);
  }
}

void solve_lower(const double* l, std::size_t n, double* b, std::size_t ncols) {
  const auto& kr = simd::active();
  for (std::size_t i = 0; i < n; ++i) {
    const double d = l[i * n + i];
    if (d == 0.0)
      throw SingularMatrixError("triangular solve: zero diagonal at row " +
                                std::to_string(i));
    double* brow = b + i * ncols;
    for (std::size_t p = 0; p < i; ++p) {
      kr.axpy(brow, b + p * ncols, -l[i * n + p], ncols);
    }
    kr.scale(brow, brow, 1.0 / d, ncols);
  }
}

void solve_lower_transposed(const double* l, std::size_t n, double* b,
                            std::size_t ncols) {
  const auto& kr = simd::active();
  for (std::size_t ii = n; ii-- > 0;) {
    const double d = l[ii * n + ii];
    if (d == 0.0)
      throw SingularMatrixError("triangular solve: zero diagonal at row " +
                                std::to_string(ii));
    double* brow = b + ii * ncols;
    for (std::size_t p = ii + 1; p < n; ++p) {
      kr.axpy(brow, b + p * ncols, -l[p * n + ii], ncols);
    }
    kr.scale(brow, brow, 1.0 / d, ncols);
  }
}

void solve_upper(const double* u, std::size_t n, double* b, std::size_t ncols) {
  const auto& kr = simd::active();
  for (std::size_t ii = n; ii-- > 0;) {
    const double d = u[ii * n + ii];
    if (d == 0.0)
      throw SingularMatrixError("triangular solve: zero diagonal at row " +
                                std::to_string(ii));
    double* brow = b + ii * ncols;
    for (std::size_t p = ii + 1; p < n; ++p) {
      kr.axpy(brow, b + p * ncols, -u[ii * n + p], ncols);
    }
    kr.scale(brow, brow, 1.0 / d, ncols);
  }
}

double logdet_from_cholesky(const double* l, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::log(l[i * n + i]);
  return 2.0 * acc;
}

}  // namespace linalg

Tensor cholesky(const Tensor& k) {
  if (k.rank() != 2 || k.rows() != k.cols())
    throw ShapeError("cholesky: square matrix required, got " +
                     shape_str(k.shape()));
  const std::size_t n = k.rows();
  std::vector<double> l(n * n);
  linalg::cholesky_jittered(k.data(), n, l.data());

  auto kn = k.node();
  return detail::make_op(
      "cholesky", k.shape(), std::move(l), {k}, [=](TensorNode& o) {
        // Reverse rule: with P = phi(L^T dL) (phi keeps the lower triangle
        // and halves the diagonal), dK = 0.5 (M + M^T) with
        // M = L^{-T} P L^{-1}.
        const double* lp = o.data.data();
        std::vector<double> p(n * n, 0.0);
        simd::active().matmul_tn(p.data(), lp, o.grad.data(), n, n, n);
        for (std::size_t i = 0; i < n; ++i) {
          p[i * n + i] *= 0.5;
          for (std::size_t j = i + 1; j < n; ++j) p[i * n + j] = 0.0;
        }
        linalg::solve_lower_transposed(lp, n, p.data(), n);
        // Now p = L^{-T} P; apply L^{-1} from the right via transposes.
        std::vector<double> pt(n * n);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) pt[j * n + i] = p[i * n + j];
        linalg::solve_lower_transposed(lp, n, pt.data(), n);
        auto& g = kn->grad_buffer();
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j)
            g[i * n + j] += 0.5 * (pt[j * n + i] + pt[i * n + j]);
      });
}

Tensor triangular_solve(const Tensor& l, const Tensor& b, bool lower) {
  if (l.rank() != 2 || l.rows() != l.cols())
    throw ShapeError("triangular_solve: square matrix required");
  if (b.rank() != 2 || b.rows() != l.rows())
    throw ShapeError("triangular_solve: rhs rows must match matrix size");
  const std::size_t n = l.rows(), c = b.cols();
  std::vector<double> x(b.data(), b.data() + n * c);
  if (lower)
    linalg::solve_lower(l.data(), n, x.data(), c);
  else
    linalg::solve_upper(l.data(), n, x.data(), c);

  auto ln = l.node(), bn = b.node();
  return detail::make_op(
      "triangular_solve", b.shape(), std::move(x), {l, b},
      [=](TensorNode& o) {
        // dB = L^{-T} dX; dL = -dB X^T masked to the stored triangle.
        std::vector<double> db(o.grad);
        if (lower)
          linalg::solve_lower_transposed(ln->data.data(), n, db.data(), c);
        else {
          // (U^T)^{-1} dX: U^T is lower triangular.
          std::vector<double> ut(n * n);
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
              ut[j * n + i] = ln->data[i * n + j];
          linalg::solve_lower(ut.data(), n, db.data(), c);
        }
        if (bn->requires_grad)
          simd::active().add(bn->grad_buffer().data(),
                             bn->grad_buffer().data(), db.data(), n * c);
        if (ln->requires_grad) {
          std::vector<double> dl(n * n, 0.0);
          simd::active().matmul_nt(dl.data(), db.data(), o.data.data(), n, c,
                                   n);
          auto& g = ln->grad_buffer();
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
              const bool in_tri = lower ? j <= i : j >= i;
              if (in_tri) g[i * n + j] -= dl[i * n + j];
            }
        }
      });
}

}  // namespace due

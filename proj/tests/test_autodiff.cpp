#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "due/core/linalg.hpp"
#include "due/core/ops.hpp"
#include "due/gp/kernel.hpp"
#include "helpers.hpp"

using namespace due;
using due::testing::grad_check;
using due::testing::random_tensor;

namespace {
constexpr double kTol = 1e-4;
}

TEST_CASE("elementwise and broadcast gradients") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    Tensor a = random_tensor({3, 4}, rng);
    Tensor b = random_tensor({3, 4}, rng, 0.5, 1.5);
    Tensor s = random_tensor({1}, rng, 0.2, 2.0);
    CHECK(grad_check({a, b}, [&] { return sum(mul(add(a, b), b)); }) < kTol);
    CHECK(grad_check({a, b}, [&] { return sum(mul(sub(a, b), a)); }) < kTol);
    CHECK(grad_check({a, b}, [&] { return sum(div(a, b)); }) < kTol);
    CHECK(grad_check({a, s}, [&] { return sum(div(mul(a, s), s)); }) < kTol);
    CHECK(grad_check({a}, [&] { return sum(neg(mul_scalar(a, 2.5))); }) < kTol);
    CHECK(grad_check({a}, [&] { return mean(add_scalar(a, 3.0)); }) < kTol);
  }
}

TEST_CASE("unary nonlinearity gradients") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed + 100);
    Tensor a = random_tensor({4, 3}, rng, 0.6, 0.0);
    Tensor pos = random_tensor({4, 3}, rng, 0.3, 2.0);
    // Keep inputs away from the relu/clamp kinks so FD stays valid.
    Tensor off = random_tensor({4, 3}, rng, 1.0, 0.4);
    CHECK(grad_check({a}, [&] { return sum(exp(a)); }) < kTol);
    CHECK(grad_check({pos}, [&] { return sum(log(pos)); }) < kTol);
    CHECK(grad_check({pos}, [&] { return sum(sqrt(pos)); }) < kTol);
    CHECK(grad_check({off}, [&] { return sum(relu(off)); }) < kTol);
    CHECK(grad_check({off}, [&] { return sum(elu(off)); }) < kTol);
    CHECK(grad_check({a}, [&] { return sum(softplus(a)); }) < kTol);
    CHECK(grad_check({pos}, [&] { return sum(clamp_min(pos, 1.9)); }) < kTol);
  }
}

TEST_CASE("matrix op gradients") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed + 200);
    Tensor a = random_tensor({3, 4}, rng);
    Tensor b = random_tensor({4, 2}, rng);
    Tensor v = random_tensor({4}, rng);
    CHECK(grad_check({a, b}, [&] {
            Tensor c = matmul(a, b);
            return sum(mul(c, c));
          }) < kTol);
    CHECK(grad_check({a}, [&] {
            Tensor t = transpose(a);
            return sum(mul(t, t));
          }) < kTol);
    CHECK(grad_check({a, v}, [&] {
            return sum(mul(add_rowvec(a, v), sub_rowvec(a, v)));
          }) < kTol);
    CHECK(grad_check({a, v}, [&] { return sum(mul_rowvec(a, v)); }) < kTol);
    CHECK(grad_check({a}, [&] {
            return sum(mul(col_mean(a), col_mean(a)));
          }) < kTol);
    CHECK(grad_check({a}, [&] { return sum(log(colwise_sqnorm(a))); }) < kTol);
  }
}

TEST_CASE("pairwise squared distance gradients (both arguments)") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed + 300);
    Tensor a = random_tensor({4, 3}, rng);
    Tensor b = random_tensor({5, 3}, rng);
    CHECK(grad_check({a, b}, [&] {
            return sum(exp(neg(pairwise_sqdist(a, b))));
          }) < kTol);
  }
}

TEST_CASE("structured op gradients") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed + 400);
    Tensor sq = random_tensor({4, 4}, rng);
    CHECK(grad_check({sq}, [&] { return sum(diag_part(sq)); }) < kTol);
    CHECK(grad_check({sq}, [&] {
            Tensor l = lower_tri_posdiag(sq);
            return sum(mul(l, l));
          }) < kTol);
    Tensor f = random_tensor({4, 3}, rng);
    std::vector<std::size_t> idx{2, 0, 1, 2};
    CHECK(grad_check({f}, [&] { return sum(logsumexp_rows(f)); }) < kTol);
    CHECK(grad_check({f}, [&] {
            return sum(sub(take_per_row(f, idx), logsumexp_rows(f)));
          }) < kTol);
    Tensor g = random_tensor({4, 2}, rng);
    CHECK(grad_check({f, g}, [&] {
            Tensor h = hstack({f, g});
            return sum(mul(h, h));
          }) < kTol);
    CHECK(grad_check({f}, [&] {
            Tensor r = reshape(f, {3, 4});
            return sum(mul(r, r));
          }) < kTol);
  }
}

TEST_CASE("cholesky and triangular solve gradients") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed + 500);
    Tensor m = random_tensor({4, 4}, rng, 0.5);
    Tensor eye = Tensor::zeros({4, 4});
    for (std::size_t i = 0; i < 4; ++i) eye.data()[i * 4 + i] = 2.0;
    auto spd = [&] { return add(matmul(m, transpose(m)), eye); };

    CHECK(grad_check({m}, [&] {
            return sum(log(diag_part(cholesky(spd()))));
          }) < kTol);

    Tensor b = random_tensor({4, 2}, rng);
    CHECK(grad_check({m, b}, [&] {
            Tensor x = triangular_solve(cholesky(spd()), b, true);
            return sum(mul(x, x));
          }) < kTol);
    CHECK(grad_check({m, b}, [&] {
            Tensor x = triangular_solve(transpose(cholesky(spd())), b, false);
            return sum(mul(x, x));
          }) < kTol);
  }
}

TEST_CASE("kernel gradients stay finite at zero distance") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed + 600);
    Tensor pts = random_tensor({4, 2}, rng);
    Tensor l = random_tensor({1}, rng, 0.1, 1.1);
    Tensor s = random_tensor({1}, rng, 0.1, 1.4);
    // Gram on identical sets: the diagonal sits exactly at d2 = 0.
    CHECK(grad_check({pts, l, s}, [&] {
            return sum(kernel_eval(KernelKind::Rbf, pts, pts, l, s));
          }) < kTol);
    CHECK(grad_check({pts, l, s}, [&] {
            return sum(kernel_eval(KernelKind::Matern32, pts, pts, l, s));
          }) < kTol);
  }
}

TEST_CASE("matmul gradient against finite differences (sum of product)") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed + 700);
    Tensor a = random_tensor({3, 5}, rng);
    Tensor b = random_tensor({5, 4}, rng);
    CHECK(grad_check({a}, [&] { return sum(matmul(a, b.detached())); },
                     1e-5) < 1e-5);
  }
}

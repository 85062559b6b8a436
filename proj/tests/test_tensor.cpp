#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "due/core/error.hpp"
#include "due/core/ops.hpp"
#include "due/core/tensor.hpp"

using namespace due;

TEST_CASE("shape and data length must agree") {
  CHECK_THROWS_AS(Tensor(Shape{2, 3}, std::vector<double>(5)), ShapeError);
  Tensor t(Shape{2, 3}, std::vector<double>(6, 1.0));
  CHECK(t.rows() == 2);
  CHECK(t.cols() == 3);
  CHECK(t.size() == 6);
}

TEST_CASE("identity matmul returns the other operand") {
  Tensor eye(Shape{3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  Tensor a(Shape{3, 2}, {1, 2, 3, 4, 5, 6});
  Tensor out = matmul(eye, a);
  for (std::size_t i = 0; i < 6; ++i) CHECK(out.data()[i] == a.data()[i]);
}

TEST_CASE("hand-expanded 2x2 product") {
  Tensor a(Shape{2, 2}, {1, 2, 3, 4});
  Tensor b(Shape{2, 1}, {0, 1});
  Tensor out = matmul(a, b);
  CHECK(out.at(0, 0) == 2.0);
  CHECK(out.at(1, 0) == 4.0);
}

TEST_CASE("matmul rejects mismatched inner dimensions") {
  Tensor a(Shape{2, 3}, std::vector<double>(6, 1.0));
  Tensor b(Shape{2, 2}, std::vector<double>(4, 1.0));
  CHECK_THROWS_AS(matmul(a, b), ShapeError);
}

TEST_CASE("pairwise_sqdist basics") {
  Tensor a(Shape{1, 1}, {0.0});
  Tensor b(Shape{1, 1}, {3.0});
  CHECK(pairwise_sqdist(a, b).item() == doctest::Approx(9.0));

  Tensor pts(Shape{3, 2}, {0, 0, 1, 1, -2, 0.5});
  Tensor d = pairwise_sqdist(pts, pts);
  for (std::size_t i = 0; i < 3; ++i) CHECK(d.at(i, i) == 0.0);
  CHECK(d.at(0, 1) == doctest::Approx(2.0));
  CHECK(d.at(1, 0) == doctest::Approx(2.0));
}

TEST_CASE("backward requires a scalar root") {
  Tensor a(Shape{2}, {1.0, 2.0}, true);
  Tensor b = mul(a, a);
  CHECK_THROWS_AS(backward(b), ContractError);
}

TEST_CASE("power rule at x = 3") {
  Tensor x = Tensor::scalar(3.0, true);
  Tensor y = mul(x, x);
  backward(y);
  CHECK(x.grad()[0] == doctest::Approx(6.0));
}

TEST_CASE("sum of exp at zero has unit gradients") {
  Tensor x = Tensor::zeros(Shape{4}, true);
  backward(sum(exp(x)));
  for (double g : x.grad()) CHECK(g == doctest::Approx(1.0));
}

TEST_CASE("gradients accumulate until zeroed") {
  Tensor x = Tensor::scalar(2.0, true);
  backward(mul(x, x));
  CHECK(x.grad()[0] == doctest::Approx(4.0));
  backward(mul(x, x));
  CHECK(x.grad()[0] == doctest::Approx(8.0));  // accumulated
  x.zero_grad();
  backward(mul(x, x));
  CHECK(x.grad()[0] == doctest::Approx(4.0));
}

TEST_CASE("node reused twice in one graph is visited once") {
  Tensor x = Tensor::scalar(1.5, true);
  Tensor shared = mul(x, x);          // x^2
  Tensor y = add(shared, shared);     // 2 x^2, d/dx = 4x
  backward(y);
  CHECK(x.grad()[0] == doctest::Approx(6.0));
}

TEST_CASE("detached tensors do not join the graph") {
  Tensor x = Tensor::scalar(2.0, true);
  Tensor d = x.detached();
  CHECK_FALSE(d.requires_grad());
  Tensor y = mul(x, d);
  backward(y);
  CHECK(x.grad()[0] == doctest::Approx(2.0));
}

TEST_CASE("scalar broadcast works on either side") {
  Tensor a(Shape{2, 2}, {1, 2, 3, 4});
  Tensor s = Tensor::scalar(2.0);
  Tensor left = mul(s, a);
  Tensor right = mul(a, s);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(left.data()[i] == doctest::Approx(2.0 * a.data()[i]));
    CHECK(right.data()[i] == doctest::Approx(2.0 * a.data()[i]));
  }
  Tensor diff = sub(s, a);
  CHECK(diff.at(1, 1) == doctest::Approx(-2.0));
}

TEST_CASE("hstack concatenates columns and routes gradients") {
  Tensor a(Shape{2, 2}, {1, 2, 3, 4}, true);
  Tensor b(Shape{2, 1}, {5, 6}, true);
  Tensor h = hstack({a, b});
  CHECK(h.cols() == 3);
  CHECK(h.at(0, 2) == 5.0);
  CHECK(h.at(1, 0) == 3.0);
  backward(sum(h));
  CHECK(a.grad()[3] == doctest::Approx(1.0));
  CHECK(b.grad()[1] == doctest::Approx(1.0));
}

TEST_CASE("all_finite flags inf and nan") {
  Tensor ok(Shape{2}, {1.0, 2.0});
  CHECK(ok.all_finite());
  Tensor bad(Shape{2}, {1.0, std::numeric_limits<double>::infinity()});
  CHECK_FALSE(bad.all_finite());
}

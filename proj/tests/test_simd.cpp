#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "due/core/rng.hpp"
#include "due/simd/kernels.hpp"

using namespace due;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

// Sizes chosen to exercise full vector widths plus every remainder lane.
const std::size_t kSizes[] = {1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17,
                              31, 32, 33, 100, 257, 1000};

void check_close(const std::vector<double>& a, const std::vector<double>& b,
                 double tol = 1e-12) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double scale = std::max({std::abs(a[i]), std::abs(b[i]), 1.0});
    CHECK(std::abs(a[i] - b[i]) <= tol * scale);
  }
}

void equivalence(const simd::Kernels& variant) {
  const auto& ref = simd::scalar_kernels();
  Rng rng(42);
  for (const std::size_t n : kSizes) {
    auto a = random_vec(n, rng);
    auto b = random_vec(n, rng);
    std::vector<double> r1(n), r2(n);

    ref.add(r1.data(), a.data(), b.data(), n);
    variant.add(r2.data(), a.data(), b.data(), n);
    check_close(r1, r2, 0.0);

    ref.sub(r1.data(), a.data(), b.data(), n);
    variant.sub(r2.data(), a.data(), b.data(), n);
    check_close(r1, r2, 0.0);

    ref.mul(r1.data(), a.data(), b.data(), n);
    variant.mul(r2.data(), a.data(), b.data(), n);
    check_close(r1, r2, 0.0);

    ref.scale(r1.data(), a.data(), 1.7, n);
    variant.scale(r2.data(), a.data(), 1.7, n);
    check_close(r1, r2, 0.0);

    r1 = b;
    r2 = b;
    ref.axpy(r1.data(), a.data(), -0.3, n);
    variant.axpy(r2.data(), a.data(), -0.3, n);
    check_close(r1, r2);

    const double scale = std::max(1.0, std::abs(ref.dot(a.data(), b.data(), n)));
    CHECK(std::abs(ref.dot(a.data(), b.data(), n) -
                   variant.dot(a.data(), b.data(), n)) <= 1e-12 * scale * n);
    CHECK(std::abs(ref.sum(a.data(), n) - variant.sum(a.data(), n)) <=
          1e-12 * n * 10.0);
    CHECK(std::abs(ref.sqdist(a.data(), b.data(), n) -
                   variant.sqdist(a.data(), b.data(), n)) <= 1e-11 * n);
  }

  // Matrix products across shapes with awkward strides.
  const std::size_t dims[][3] = {{1, 1, 1}, {2, 3, 4}, {5, 7, 3},
                                 {8, 8, 8}, {13, 9, 17}, {32, 33, 31}};
  for (const auto& d : dims) {
    const std::size_t m = d[0], k = d[1], n = d[2];
    auto a = random_vec(m * k, rng);
    auto b = random_vec(k * n, rng);
    std::vector<double> c1(m * n, 0.0), c2(m * n, 0.0);
    ref.matmul_nn(c1.data(), a.data(), b.data(), m, k, n);
    variant.matmul_nn(c2.data(), a.data(), b.data(), m, k, n);
    check_close(c1, c2);

    auto at = random_vec(k * m, rng);
    std::fill(c1.begin(), c1.end(), 0.0);
    std::fill(c2.begin(), c2.end(), 0.0);
    ref.matmul_tn(c1.data(), at.data(), b.data(), m, k, n);
    variant.matmul_tn(c2.data(), at.data(), b.data(), m, k, n);
    check_close(c1, c2);

    auto bt = random_vec(n * k, rng);
    std::fill(c1.begin(), c1.end(), 0.0);
    std::fill(c2.begin(), c2.end(), 0.0);
    ref.matmul_nt(c1.data(), a.data(), bt.data(), m, k, n);
    variant.matmul_nt(c2.data(), a.data(), bt.data(), m, k, n);
    check_close(c1, c2);
  }
}

}  // namespace

TEST_CASE("scalar reference sanity") {
  const auto& k = simd::scalar_kernels();
  const double a[] = {1.0, 2.0, 3.0};
  const double b[] = {4.0, 5.0, 6.0};
  CHECK(k.dot(a, b, 3) == doctest::Approx(32.0));
  CHECK(k.sum(a, 3) == doctest::Approx(6.0));
  CHECK(k.sqdist(a, b, 3) == doctest::Approx(27.0));

  // 2x2 product by hand: [[1,2],[3,4]] * [[0],[1]] = [[2],[4]]
  const double m1[] = {1.0, 2.0, 3.0, 4.0};
  const double m2[] = {0.0, 1.0};
  double c[2] = {0.0, 0.0};
  k.matmul_nn(c, m1, m2, 2, 2, 1);
  CHECK(c[0] == doctest::Approx(2.0));
  CHECK(c[1] == doctest::Approx(4.0));
}

TEST_CASE("avx2 kernels match the scalar reference") {
  if (!simd::avx2_available()) return;
  equivalence(*simd::avx2_kernels());
}

TEST_CASE("neon kernels match the scalar reference") {
  if (!simd::neon_available()) return;
  equivalence(*simd::neon_kernels());
}

TEST_CASE("active table is one of the known variants") {
  const auto& k = simd::active();
  const std::string name = k.name;
  CHECK((name == "scalar" || name == "avx2" || name == "neon"));
}

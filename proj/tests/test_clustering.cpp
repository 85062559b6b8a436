#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "due/core/clustering.hpp"
#include "due/core/error.hpp"
#include "helpers.hpp"

using namespace due;

TEST_CASE("k equal to point count returns the points") {
  Tensor pts(Shape{3, 2}, {0, 0, 5, 5, -5, 2});
  auto res = kmeans(pts, 3, 1);
  CHECK(res.inertia == doctest::Approx(0.0));
  // Each point is its own centroid (order free).
  for (std::size_t i = 0; i < 3; ++i) {
    bool found = false;
    for (std::size_t c = 0; c < 3; ++c) {
      if (pts.at(i, 0) == res.centroids.at(c, 0) &&
          pts.at(i, 1) == res.centroids.at(c, 1))
        found = true;
    }
    CHECK(found);
  }
}

TEST_CASE("two well-separated blobs are recovered") {
  Rng rng(9);
  const std::size_t per = 50;
  std::vector<double> data(per * 2 * 2);
  double means[2][2] = {{-4.0, 0.0}, {4.0, 1.0}};
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t i = 0; i < per; ++i) {
      data[(c * per + i) * 2 + 0] = means[c][0] + 0.3 * rng.normal();
      data[(c * per + i) * 2 + 1] = means[c][1] + 0.3 * rng.normal();
    }
  // Empirical blob means are the oracle the centroids must approach.
  double emp[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t i = 0; i < per; ++i) {
      emp[c][0] += data[(c * per + i) * 2 + 0] / per;
      emp[c][1] += data[(c * per + i) * 2 + 1] / per;
    }
  auto res = kmeans(Tensor(Shape{per * 2, 2}, data), 2, 5);
  for (std::size_t c = 0; c < 2; ++c) {
    double best = 1e9;
    for (std::size_t k = 0; k < 2; ++k) {
      const double dx = res.centroids.at(k, 0) - emp[c][0];
      const double dy = res.centroids.at(k, 1) - emp[c][1];
      best = std::min(best, std::sqrt(dx * dx + dy * dy));
    }
    CHECK(best < 0.2);
  }
}

TEST_CASE("same seed reproduces centroids bitwise") {
  Rng rng(3);
  Tensor pts = due::testing::random_tensor({40, 3}, rng, 1.0, 0.0, false);
  auto a = kmeans(pts, 5, 77);
  auto b = kmeans(pts, 5, 77);
  for (std::size_t i = 0; i < a.centroids.size(); ++i)
    CHECK(a.centroids.data()[i] == b.centroids.data()[i]);
}

TEST_CASE("inertia is non-increasing across Lloyd iterations") {
  Rng rng(13);
  Tensor pts = due::testing::random_tensor({120, 2}, rng, 2.0, 0.0, false);
  auto res = kmeans(pts, 6, 21);
  for (std::size_t i = 1; i < res.inertia_trace.size(); ++i)
    CHECK(res.inertia_trace[i] <= res.inertia_trace[i - 1] + 1e-12);
}

TEST_CASE("fewer points than clusters is an error") {
  Tensor pts(Shape{2, 1}, {0.0, 1.0});
  CHECK_THROWS_AS(kmeans(pts, 3, 0), ArgumentError);
}

TEST_CASE("power iteration on a diagonal matrix") {
  Tensor w(Shape{2, 2}, {3, 0, 0, 1});
  std::vector<double> u{1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
  auto res = power_iteration(w, u, 50);
  CHECK(res.sigma == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("power iteration on the identity") {
  Tensor w(Shape{3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  std::vector<double> u{1.0, 0.0, 0.0};
  CHECK(power_iteration(w, u, 5).sigma == doctest::Approx(1.0));
}

TEST_CASE("zero matrix reports sigma zero") {
  Tensor w = Tensor::zeros({3, 2});
  std::vector<double> u{1.0, 0.0, 0.0};
  CHECK(power_iteration(w, u, 3).sigma == 0.0);
}

TEST_CASE("sigma approaches the SVD oracle from below") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    Rng rng(seed);
    Tensor w = due::testing::random_tensor({8, 5}, rng, 1.0, 0.0, false);
    Eigen::MatrixXd ew(8, 5);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 5; ++j) ew(i, j) = w.at(i, j);
    const double oracle =
        Eigen::JacobiSVD<Eigen::MatrixXd>(ew).singularValues()(0);

    std::vector<double> u(8);
    for (double& v : u) v = rng.normal();
    auto res = power_iteration(w, u, 20);
    CHECK(due::testing::rel_err(res.sigma, oracle) < 1e-3);
    CHECK(res.sigma <= oracle + 1e-6);

    auto tight = power_iteration_to_tolerance(w, 1e-10, 10000, seed);
    CHECK(tight.sigma == doctest::Approx(oracle).epsilon(1e-8));
  }
}

TEST_CASE("warm start state persists") {
  Rng rng(5);
  Tensor w = due::testing::random_tensor({6, 6}, rng, 1.0, 0.0, false);
  std::vector<double> u(6);
  for (double& v : u) v = rng.normal();
  auto first = power_iteration(w, u, 1);
  auto second = power_iteration(w, first.u, 1);
  auto direct = power_iteration(w, u, 2);
  CHECK(second.sigma == doctest::Approx(direct.sigma).epsilon(1e-12));
}

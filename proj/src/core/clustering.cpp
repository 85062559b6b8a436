#include "due/core/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "due/core/error.hpp"
#include "due/simd/kernels.hpp"

namespace due {
namespace {

const simd::Kernels& K() { return simd::active(); }

double sqdist_row(const double* a, const double* b, std::size_t d) {
  return K().sqdist(a, b, d);
}

}  // namespace

KmeansResult kmeans(const Tensor& points, std::size_t k, std::uint64_t seed) {
  const std::size_t p = points.rows(), d = points.cols();
  if (k == 0) throw ArgumentError("kmeans: k must be positive");
  if (p < k)
    throw ArgumentError("kmeans: " + std::to_string(p) + " points for k=" +
                        std::to_string(k));
  Rng rng(seed);
  const double* x = points.data();

  // k-means++ seeding.
  std::vector<double> centroids(k * d);
  std::vector<double> min_d2(p, std::numeric_limits<double>::infinity());
  {
    const std::size_t first = rng.uniform_index(p);
    std::copy_n(x + first * d, d, centroids.data());
    for (std::size_t c = 1; c < k; ++c) {
      double total = 0.0;
      for (std::size_t i = 0; i < p; ++i) {
        const double dist =
            sqdist_row(x + i * d, centroids.data() + (c - 1) * d, d);
        min_d2[i] = std::min(min_d2[i], dist);
        total += min_d2[i];
      }
      std::size_t chosen = 0;
      if (total > 0.0) {
        const double target = rng.uniform() * total;
        double acc = 0.0;
        chosen = p - 1;
        for (std::size_t i = 0; i < p; ++i) {
          acc += min_d2[i];
          if (acc >= target) {
            chosen = i;
            break;
          }
        }
      } else {
        chosen = rng.uniform_index(p);
      }
      std::copy_n(x + chosen * d, d, centroids.data() + c * d);
    }
  }

  KmeansResult res;
  res.labels.assign(p, 0);
  std::vector<std::size_t> counts(k);
  std::vector<double> sums(k * d);
  constexpr std::size_t kMaxIters = 100;

  for (std::size_t it = 0; it < kMaxIters; ++it) {
    bool changed = it == 0;
    double inertia = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double dist = sqdist_row(x + i * d, centroids.data() + c * d, d);
        if (dist < best_d) {
          best_d = dist;
          best = c;
        }
      }
      if (res.labels[i] != best) {
        res.labels[i] = best;
        changed = true;
      }
      inertia += best_d;
    }
    res.inertia = inertia;
    res.inertia_trace.push_back(inertia);
    res.iterations = it + 1;
    if (!changed) break;

    std::fill(counts.begin(), counts.end(), 0);
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t i = 0; i < p; ++i) {
      counts[res.labels[i]]++;
      K().add(sums.data() + res.labels[i] * d, sums.data() + res.labels[i] * d,
              x + i * d, d);
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        K().scale(centroids.data() + c * d, sums.data() + c * d,
                  1.0 / static_cast<double>(counts[c]), d);
      } else {
        // Reseed from the point farthest from its assigned centroid.
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < p; ++i) {
          const double dist = sqdist_row(
              x + i * d, centroids.data() + res.labels[i] * d, d);
          if (dist > far_d) {
            far_d = dist;
            far = i;
          }
        }
        std::copy_n(x + far * d, d, centroids.data() + c * d);
      }
    }
  }

  res.centroids = Tensor(Shape{k, d}, std::move(centroids));
  return res;
}

PowerIterationResult power_iteration(const Tensor& w,
                                     const std::vector<double>& u_state,
                                     std::size_t iters) {
  const std::size_t a = w.rows(), b = w.cols();
  if (u_state.size() != a)
    throw ArgumentError("power_iteration: u state length must equal rows");
  if (iters == 0) throw ArgumentError("power_iteration: iters must be >= 1");

  PowerIterationResult res;
  res.u = u_state;
  std::vector<double> v(b);
  const double* wp = w.data();

  for (std::size_t it = 0; it < iters; ++it) {
    // v = normalize(W^T u)
    std::fill(v.begin(), v.end(), 0.0);
    K().matmul_tn(v.data(), wp, res.u.data(), b, a, 1);
    const double vn = std::sqrt(K().dot(v.data(), v.data(), b));
    if (vn == 0.0) {
      res.sigma = 0.0;
      return res;
    }
    K().scale(v.data(), v.data(), 1.0 / vn, b);
    // u = normalize(W v)
    std::vector<double> wu(a, 0.0);
    K().matmul_nn(wu.data(), wp, v.data(), a, b, 1);
    const double un = std::sqrt(K().dot(wu.data(), wu.data(), a));
    if (un == 0.0) {
      res.sigma = 0.0;
      return res;
    }
    K().scale(res.u.data(), wu.data(), 1.0 / un, a);
    res.sigma = un;  // |W v| with unit v equals u^T W v after normalization
  }
  return res;
}

PowerIterationResult power_iteration_to_tolerance(const Tensor& w, double tol,
                                                  std::size_t max_iters,
                                                  std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> u(w.rows());
  for (double& ui : u) ui = rng.normal();
  double norm = std::sqrt(K().dot(u.data(), u.data(), u.size()));
  if (norm == 0.0) {
    u.assign(w.rows(), 0.0);
    u[0] = 1.0;
    norm = 1.0;
  }
  K().scale(u.data(), u.data(), 1.0 / norm, u.size());

  PowerIterationResult res;
  res.u = u;
  double prev = -1.0;
  for (std::size_t it = 0; it < max_iters; ++it) {
    res = power_iteration(w, res.u, 1);
    if (res.sigma == 0.0) break;
    if (std::abs(res.sigma - prev) < tol) break;
    prev = res.sigma;
  }
  return res;
}

}  // namespace due

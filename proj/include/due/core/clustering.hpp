#pragma once

#include <cstdint>
#include <vector>

#include "due/core/rng.hpp"
#include "due/core/tensor.hpp"

namespace due {

struct KmeansResult {
  Tensor centroids;                  // [k x d]
  std::vector<std::size_t> labels;   // per input point
  double inertia = 0.0;
  std::size_t iterations = 0;
  std::vector<double> inertia_trace;  // one entry per Lloyd iteration
};

// Lloyd's algorithm with k-means++ seeding, at most 100 iterations.
// Deterministic for a given seed. Empty clusters are repaired by reseeding
// from the point farthest from its assigned centroid. Requires p >= k.
KmeansResult kmeans(const Tensor& points, std::size_t k, std::uint64_t seed);

struct PowerIterationResult {
  double sigma = 0.0;
  std::vector<double> u;  // left singular vector estimate, length = rows
};

// Estimates the largest singular value of w ([rows x cols]) with warm-start
// state u. A zero matrix yields sigma 0 with u unchanged.
PowerIterationResult power_iteration(const Tensor& w,
                                     const std::vector<double>& u_state,
                                     std::size_t iters);

// Runs power iteration until the sigma estimate changes by less than tol,
// capped at max_iters.
PowerIterationResult power_iteration_to_tolerance(const Tensor& w, double tol,
                                                  std::size_t max_iters,
                                                  std::uint64_t seed = 7);

}  // namespace due

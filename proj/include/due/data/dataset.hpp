#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "due/core/tensor.hpp"

namespace due {

// Column-wise standardization fitted on training data and applied
// identically to any evaluation grid.
struct Scaler {
  std::vector<double> mean;
  std::vector<double> std;

  static Scaler identity(std::size_t dim);
  static Scaler fit(const Tensor& x);
  Tensor transform(const Tensor& x) const;
  Tensor inverse(const Tensor& x) const;
};

struct Provenance {
  std::string generator;
  std::map<std::string, double> params;
  std::uint64_t seed = 0;
};

struct Dataset {
  Tensor x;  // [n x d], standardized unless provenance says otherwise
  Tensor y;  // [n x T]; one-hot rows for classification
  std::vector<double> treatment;  // empty when absent
  std::vector<double> true_cate;  // empty when absent
  std::vector<double> propensity; // empty when absent
  std::vector<std::size_t> train_idx, val_idx, test_idx;
  Scaler scaler;
  Provenance provenance;

  std::size_t n() const { return x.rows(); }
  std::size_t dim() const { return x.cols(); }
  std::size_t outputs() const { return y.cols(); }

  Tensor x_rows(const std::vector<std::size_t>& idx) const;
  Tensor y_rows(const std::vector<std::size_t>& idx) const;
  std::vector<double> treatment_rows(const std::vector<std::size_t>& idx) const;
};

// Two interleaving arcs with isotropic Gaussian noise, balanced classes,
// standardized inputs. One-hot targets, all rows tagged train.
Dataset gen_two_moons(std::size_t n, double noise_std, std::uint64_t seed);

// 1D regression with an empty interval: x uniform on [-6,-3] u [3,6],
// y = sin(2x) + N(0, 0.1^2). The gap (-3, 3) contains no inputs.
Dataset gen_gap_regression(std::size_t n, std::uint64_t seed);

struct BlobsGrid {
  Dataset data;                        // two labeled Gaussian blobs
  Tensor grid;                         // standardized grid coordinates
  Tensor grid_raw;                     // raw coordinates, row-major lexicographic
  std::vector<double> grid_logdensity; // mixture log-density per grid point
  Tensor star;                         // {1, 2} standardized far-field point
  Tensor star_raw;
};

// Fig-style blobs task: blob means (-2, 0) and (2, 0) with std 0.5,
// 100 samples per class, a 25x25 grid over [-6, 6]^2 and a designated
// far-field star point at (4.5, 4.5).
BlobsGrid gen_blobs_grid(std::uint64_t seed);

// Synthetic treatment-effect data: x in R^8 standard normal, propensity
// sigmoid(3 x0), outcome y = mu0(x) + t * tau(x) + N(0, 0.5^2) with
//   mu0(x) = x0 + 0.5 x1^2 + sin(x2) + 0.5 x3 x4
//   tau(x) = tau_scale * (1 + x0 + 0.5 x1)
// True CATE stored per row; splits 63/27/10 train/val/test.
Dataset gen_synthetic_cate(std::size_t n, std::uint64_t seed,
                           double tau_scale = 1.0);

}  // namespace due

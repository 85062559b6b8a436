#pragma once

#include <cstdint>
#include <string>

#include "due/metrics/metrics.hpp"

namespace due {

// Experiment drivers behind `due demo <name>`. Each trains the models of
// one figure/table protocol and returns the headline numbers; when out_dir
// is nonempty the plot-ready CSV series and a manifest are written there.

struct TwoMoonsResult {
  double due_train_accuracy = 0.0;
  double due_far_entropy = 0.0;      // mean over the far-field ring, nats
  double gpdnn_far_entropy = 0.0;    // plain feed-forward DKL variant
  double softmax_far_entropy = 0.0;
  double due_train_entropy = 0.0;    // mean entropy on the training set
  double due_test_nll = 0.0;         // held-out two-moons sample
};
TwoMoonsResult run_two_moons(std::uint64_t seed, const std::string& out_dir);

struct Gap1dResult {
  double train_rmse = 0.0;
  double gap_mean_std = 0.0;
  double support_mean_std = 0.0;
};
Gap1dResult run_gap_1d(std::uint64_t seed, const std::string& out_dir);

struct CollapseResult {
  CollapseMetrics constrained;
  CollapseMetrics unconstrained;
  double constrained_accuracy = 0.0;
  double unconstrained_accuracy = 0.0;
};
CollapseResult run_collapse(std::uint64_t seed, const std::string& out_dir);

struct RffCompareResult {
  // Mean predictive standard deviation (including observation noise) over
  // the empty interval and over the data support, at both dataset sizes.
  double due_gap_std_small = 0.0, due_gap_std_large = 0.0;
  double due_support_std_small = 0.0, due_support_std_large = 0.0;
  double rff_gap_std_small = 0.0, rff_gap_std_large = 0.0;
  double rff_support_std_small = 0.0, rff_support_std_large = 0.0;
  std::size_t n_small = 0, n_large = 0;
};
RffCompareResult run_rff_compare(std::uint64_t seed, const std::string& out_dir);

struct CateDeferralResult {
  std::size_t trials = 0;
  double mean_rmse_full = 0.0;
  double mean_rmse_uncertainty_10 = 0.0, mean_rmse_random_10 = 0.0;
  double mean_rmse_uncertainty_50 = 0.0, mean_rmse_random_50 = 0.0;
  std::size_t wins_10 = 0;  // trials where the uncertainty policy is better
  std::size_t wins_50 = 0;
};
CateDeferralResult run_cate_deferral(std::uint64_t seed, std::size_t trials,
                                     const std::string& out_dir);

// Criterion-style ablation: two-moons test NLL across inducing counts.
struct InducingAblationResult {
  std::vector<std::size_t> counts;
  std::vector<double> test_nll;
};
InducingAblationResult run_inducing_ablation(std::uint64_t seed,
                                             const std::vector<std::size_t>& ms,
                                             const std::string& out_dir);

}  // namespace due

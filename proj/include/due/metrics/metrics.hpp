#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "due/core/rng.hpp"
#include "due/core/tensor.hpp"
#include "due/train/model.hpp"

namespace due {

// Probability that a random out-of-distribution score exceeds a random
// in-distribution score, ties counted one half (rank-sum form).
double auroc(const std::vector<double>& scores_in,
             const std::vector<double>& scores_out);

// Expected calibration error with equal-width confidence bins on the
// maximum class probability and no post-hoc scaling.
double ece(const Tensor& probs, const std::vector<std::size_t>& labels,
           std::size_t bins = 15);

double rmse(const std::vector<double>& predictions,
            const std::vector<double>& targets);

// Mean Gaussian negative log-likelihood from predictive means/variances.
double gaussian_nll(const std::vector<double>& mean,
                    const std::vector<double>& var,
                    const std::vector<double>& targets);

// Mean negative log of the probability assigned to the true class.
double classification_nll(const Tensor& probs,
                          const std::vector<std::size_t>& labels);

struct CateEstimate {
  std::vector<double> mean;  // exact, from posterior means
  std::vector<double> var;   // Monte Carlo over the per-row joint posterior
  std::size_t mc_samples = 0;
};

// Treatment-effect posterior per row of x (standardized): the model is
// evaluated jointly at (x, t=0) and (x, t=1); the effect mean is the
// difference of posterior means and the effect variance comes from MC
// samples of the correlated 2x2 joint latent.
CateEstimate cate_estimate(DueModel& model, const Tensor& x_std,
                           std::size_t mc_samples, Rng& rng);

enum class DeferralPolicy { Random, Uncertainty };

struct DeferralResult {
  double rate = 0.0;
  double retained_rmse = 0.0;
  DeferralPolicy policy = DeferralPolicy::Uncertainty;
  std::size_t retained = 0;
  std::uint64_t seed = 0;
};

// Defers ceil(rate * n) rows (highest uncertainty first, ties broken by row
// index; or a seeded uniform sample) and reports RMSE on the kept rows.
DeferralResult deferral_curve(const std::vector<double>& predictions,
                              const std::vector<double>& targets,
                              const std::vector<double>& uncertainties,
                              double rate, DeferralPolicy policy,
                              std::uint64_t seed = 0);

struct CollapseMetrics {
  // Median over out-of-distribution points of
  //   (feature distance to nearest in-distribution feature)
  //   / (input distance to nearest in-distribution input).
  double contraction_ratio = 0.0;
  double star_feature_distance = 0.0;  // nan when no star index given
  double star_feature_distance_normalized = 0.0;  // by in-dist feature scatter
  double gram_logdet = 0.0;  // unit-scale RBF gram on pooled features;
                             // -inf sentinel when degenerate
};

CollapseMetrics collapse_metrics(const Tensor& features_in,
                                 const Tensor& features_ood,
                                 const Tensor& inputs_in,
                                 const Tensor& inputs_ood,
                                 std::size_t star_index = SIZE_MAX);

}  // namespace due

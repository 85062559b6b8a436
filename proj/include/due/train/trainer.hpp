#pragma once

#include <string>
#include <vector>

#include "due/data/dataset.hpp"
#include "due/gp/exact.hpp"
#include "due/train/model.hpp"
#include "due/train/optimizer.hpp"

namespace due {

struct TrainConfig {
  OptimizerConfig opt;
  std::size_t epochs = 100;
  std::size_t batch_size = 0;  // 0 = full batch
  std::size_t init_subset = 1000;
  std::uint64_t seed = 0;
  // When the dataset has a validation split, keep the parameters with the
  // lowest validation NLL instead of the final ones.
  bool select_on_val_nll = false;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double elbo = 0.0;  // mean of minibatch full-dataset estimates
  double ell = 0.0;   // expected log-likelihood term (scaled)
  double kl = 0.0;    // KL at the last batch of the epoch
  double lengthscale0 = 0.0;
  double outputscale0 = 0.0;
  double noise_var = 0.0;  // nan for noiseless likelihoods
  double val_nll = 0.0;    // nan when not evaluated
  double wall_seconds = 0.0;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  void write_csv(const std::string& path) const;
};

// Inducing inputs from k-means on the extractor features of a random init
// subset; length scale from the mean pairwise feature distance. The
// extractor is spectrally normalized before computing the init features.
void initialize_model(DueModel& model, const Dataset& data,
                      const TrainConfig& cfg);

// Minibatch gradient ascent on the ELBO: each step spectrally normalizes
// the extractor, evaluates the bound on the shuffled batch, and updates
// feature, variational, and hyper parameters jointly with one optimizer.
// Throws TrainingAbort on a non-finite loss.
TrainLog train_model(DueModel& model, const Dataset& data,
                     const TrainConfig& cfg);

// Classification accuracy / regression metrics on a subset of rows.
double model_accuracy(DueModel& model, const Dataset& data,
                      const std::vector<std::size_t>& idx, Rng& rng);
double model_nll(DueModel& model, const Dataset& data,
                 const std::vector<std::size_t>& idx, Rng& rng);
double model_rmse(DueModel& model, const Dataset& data,
                  const std::vector<std::size_t>& idx);

struct CollapseProbe {
  MarginalParts marginal;       // dense log-marginal decomposition
  double min_dist = 0.0;        // pairwise feature distances on the probe
  double mean_dist = 0.0;
  double max_dist = 0.0;
};

// Dense-GP diagnostic on a small probe subset: evaluates the log-marginal
// decomposition with the model's current kernel hyperparameters and the
// probe's feature geometry. Regression targets use the first output column.
CollapseProbe collapse_probe(DueModel& model, const Dataset& data,
                             const std::vector<std::size_t>& probe_idx);

}  // namespace due

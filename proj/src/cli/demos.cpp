#include "due/cli/demos.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <filesystem>
#include <thread>

#include "due/baselines/rff.hpp"
#include "due/baselines/softmax_net.hpp"
#include "due/data/csv.hpp"
#include "due/io/manifest.hpp"
#include "due/train/trainer.hpp"

namespace due {
namespace {

namespace fs = std::filesystem;

void ensure_dir(const std::string& dir) {
  if (!dir.empty()) fs::create_directories(dir);
}

FeatureExtractorConfig toy_extractor(std::size_t input_dim, bool residual,
                                     bool spectral) {
  FeatureExtractorConfig fx;
  fx.input_dim = input_dim;
  fx.feature_dim = 128;
  fx.depth = 4;
  fx.activation = Activation::Relu;
  fx.spectral_coeff = 0.95;
  fx.power_iterations = 1;
  fx.residual = residual;
  fx.spectral_norm = spectral;
  return fx;
}

DueModel train_two_moons_model(const Dataset& ds, std::size_t num_inducing,
                               bool residual, bool spectral,
                               std::uint64_t seed, std::size_t epochs) {
  ModelConfig mc;
  mc.fx = toy_extractor(2, residual, spectral);
  mc.kernel = KernelKind::Rbf;
  mc.likelihood.kind = LikelihoodKind::Softmax;
  mc.likelihood.num_outputs = 2;
  mc.num_inducing = num_inducing;

  TrainConfig tc;
  tc.opt.kind = OptimizerConfig::Kind::SgdMomentum;
  tc.opt.lr = 0.01;
  tc.opt.momentum = 0.9;
  tc.epochs = epochs;
  tc.batch_size = 0;  // full batch at this scale
  tc.seed = seed;

  DueModel model = DueModel::create(mc, seed);
  model.scaler = ds.scaler;
  initialize_model(model, ds, tc);
  train_model(model, ds, tc);
  return model;
}

// Evenly spaced circle in standardized input space.
Tensor ring_points(const Dataset& ds, double radius_factor, std::size_t count) {
  double data_radius = 0.0;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    double r2 = 0.0;
    for (std::size_t c = 0; c < ds.dim(); ++c)
      r2 += ds.x.at(i, c) * ds.x.at(i, c);
    data_radius = std::max(data_radius, std::sqrt(r2));
  }
  const double radius = radius_factor * data_radius;
  std::vector<double> pts(count * 2);
  for (std::size_t i = 0; i < count; ++i) {
    const double angle =
        2.0 * M_PI * static_cast<double>(i) / static_cast<double>(count);
    pts[i * 2 + 0] = radius * std::cos(angle);
    pts[i * 2 + 1] = radius * std::sin(angle);
  }
  return Tensor(Shape{count, 2}, std::move(pts));
}

std::vector<double> model_entropies(DueModel& model, const Tensor& x_std,
                                    Rng& rng) {
  Tensor feats = model.features(x_std, nullptr, Mode::Eval).detached();
  auto pred = svgp_predict(model.gp, feats);
  predictive_class_probs(pred, model.cfg.likelihood.mc_predict, rng);
  return pred.entropy;
}

double mean_of(const std::vector<double>& v) {
  double acc = 0.0;
  for (const double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

constexpr std::size_t kTwoMoonsEpochs = 1200;

}  // namespace

TwoMoonsResult run_two_moons(std::uint64_t seed, const std::string& out_dir) {
  ensure_dir(out_dir);
  Dataset ds = gen_two_moons(200, 0.1, seed);
  Dataset test = gen_two_moons(400, 0.1, seed + 1000);
  // Evaluate held-out points through the training scaler.
  Tensor test_x_std = ds.scaler.transform(test.scaler.inverse(test.x));

  DueModel due =
      train_two_moons_model(ds, 4, true, true, seed, kTwoMoonsEpochs);
  DueModel gpdnn =
      train_two_moons_model(ds, 4, false, false, seed, kTwoMoonsEpochs);

  SoftmaxNetConfig sm;
  sm.fx = toy_extractor(2, true, false);
  sm.opt.kind = OptimizerConfig::Kind::SgdMomentum;
  sm.opt.lr = 0.01;
  sm.opt.momentum = 0.9;
  sm.epochs = kTwoMoonsEpochs;
  sm.batch_size = 0;
  sm.seed = seed;
  SoftmaxNet softmax = SoftmaxNet::train(ds, sm);

  Rng eval_rng = Rng(seed).substream("demo-eval");
  TwoMoonsResult res;
  res.due_train_accuracy = model_accuracy(due, ds, ds.train_idx, eval_rng);

  Tensor ring = ring_points(ds, 5.0, 64);
  res.due_far_entropy = mean_of(model_entropies(due, ring, eval_rng));
  res.gpdnn_far_entropy = mean_of(model_entropies(gpdnn, ring, eval_rng));
  res.softmax_far_entropy =
      mean_of(predictive_entropy(softmax.predict_probs(ring)));
  res.due_train_entropy = mean_of(model_entropies(due, ds.x, eval_rng));

  {
    Tensor feats = due.features(test_x_std, nullptr, Mode::Eval).detached();
    auto pred = svgp_predict(due.gp, feats);
    predictive_class_probs(pred, due.cfg.likelihood.mc_predict, eval_rng);
    res.due_test_nll =
        classification_nll(pred.probs, labels_from_onehot(test.y));
  }

  if (!out_dir.empty()) {
    // Entropy fields over a grid, all three models.
    constexpr std::size_t kRes = 61;
    constexpr double kBox = 3.5;
    std::vector<double> grid(kRes * kRes * 2);
    for (std::size_t i = 0; i < kRes; ++i)
      for (std::size_t j = 0; j < kRes; ++j) {
        grid[(i * kRes + j) * 2 + 0] =
            -kBox + 2.0 * kBox * static_cast<double>(i) / (kRes - 1);
        grid[(i * kRes + j) * 2 + 1] =
            -kBox + 2.0 * kBox * static_cast<double>(j) / (kRes - 1);
      }
    Tensor grid_t(Shape{kRes * kRes, 2}, std::move(grid));
    auto due_h = model_entropies(due, grid_t, eval_rng);
    auto gpdnn_h = model_entropies(gpdnn, grid_t, eval_rng);
    auto softmax_h = predictive_entropy(softmax.predict_probs(grid_t));

    std::vector<std::vector<double>> rows;
    for (std::size_t g = 0; g < kRes * kRes; ++g)
      rows.push_back({grid_t.at(g, 0), grid_t.at(g, 1), due_h[g], gpdnn_h[g],
                      softmax_h[g]});
    write_csv_table(out_dir + "/two_moons_entropy_grid.csv",
                    {"x0", "x1", "due_entropy", "gpdnn_entropy",
                     "softmax_entropy"},
                    rows);

    std::vector<std::vector<double>> train_rows;
    for (std::size_t i = 0; i < ds.n(); ++i)
      train_rows.push_back({ds.x.at(i, 0), ds.x.at(i, 1), ds.y.at(i, 1)});
    write_csv_table(out_dir + "/two_moons_train.csv", {"x0", "x1", "class"},
                    train_rows);

    Manifest man;
    man.set_command("demo two-moons");
    man.set_provenance(ds.provenance);
    man.add_metric("due_train_accuracy", res.due_train_accuracy);
    man.add_metric("due_far_entropy", res.due_far_entropy);
    man.add_metric("gpdnn_far_entropy", res.gpdnn_far_entropy);
    man.add_metric("softmax_far_entropy", res.softmax_far_entropy);
    man.add_metric("due_train_entropy", res.due_train_entropy);
    man.add_metric("due_test_nll", res.due_test_nll);
    man.add_output(out_dir + "/two_moons_entropy_grid.csv");
    man.add_output(out_dir + "/two_moons_train.csv");
    man.write(out_dir + "/manifest.json");
  }
  return res;
}

namespace {

struct GapModels {
  DueModel due;
  RffModel rff;
};

DueModel train_gap_due(const Dataset& ds, std::uint64_t seed,
                       std::size_t epochs, std::size_t batch) {
  ModelConfig mc;
  mc.fx = toy_extractor(1, true, true);
  mc.kernel = KernelKind::Rbf;
  mc.likelihood.kind = LikelihoodKind::Gaussian;
  mc.likelihood.num_outputs = 1;
  mc.num_inducing = 20;

  TrainConfig tc;
  tc.opt.kind = OptimizerConfig::Kind::Adam;
  tc.opt.lr = 0.01;
  tc.epochs = epochs;
  tc.batch_size = batch;
  tc.seed = seed;

  DueModel model = DueModel::create(mc, seed);
  model.scaler = ds.scaler;
  initialize_model(model, ds, tc);
  train_model(model, ds, tc);
  return model;
}

GapModels train_gap_pair(const Dataset& ds, std::uint64_t seed,
                         std::size_t epochs, std::size_t batch) {
  GapModels out;
  out.due = train_gap_due(ds, seed, epochs, batch);

  // The parametric baseline reuses the trained extractor and the learned
  // kernel hyperparameters; only the GP approximation differs.
  const auto& head = out.due.gp.heads[0];
  out.rff = rff_create(1024, out.due.cfg.fx.feature_dim,
                       std::exp(head.log_lengthscale.item()),
                       std::exp(head.log_outputscale.item()),
                       out.due.gp.noise_var(), seed, /*ridge=*/1.0);
  Tensor feats = out.due.features(ds.x, nullptr, Mode::Eval).detached();
  std::vector<double> y(ds.n());
  for (std::size_t i = 0; i < ds.n(); ++i) y[i] = ds.y.at(i, 0);
  rff_fit(out.rff, feats, y);
  return out;
}

struct GapEval {
  std::vector<double> due_mean, due_std, rff_mean, rff_std;
  double due_gap_std = 0.0, due_support_std = 0.0;
  double rff_gap_std = 0.0, rff_support_std = 0.0;
};

GapEval eval_gap_models(GapModels& models, const Dataset& ds,
                        const Tensor& grid_raw) {
  GapEval ev;
  Tensor grid_std = ds.scaler.transform(grid_raw);
  Tensor feats = models.due.features(grid_std, nullptr, Mode::Eval).detached();
  auto pred = svgp_predict(models.due.gp, feats);
  const double noise = models.due.gp.noise_var();
  const std::size_t g = grid_raw.rows();
  ev.due_mean.resize(g);
  ev.due_std.resize(g);
  for (std::size_t i = 0; i < g; ++i) {
    ev.due_mean[i] = pred.latent_mean.at(i, 0);
    ev.due_std[i] = std::sqrt(pred.latent_var.at(i, 0) + noise);
  }
  rff_predict(models.rff, feats, ev.rff_mean, ev.rff_std);
  for (double& v : ev.rff_std) v = std::sqrt(v);

  double dg = 0.0, dsup = 0.0, rg = 0.0, rsup = 0.0;
  std::size_t ng = 0, ns = 0;
  for (std::size_t i = 0; i < g; ++i) {
    const double x = grid_raw.at(i, 0);
    if (std::abs(x) < 3.0) {
      dg += ev.due_std[i];
      rg += ev.rff_std[i];
      ++ng;
    } else if (std::abs(x) <= 6.0) {
      dsup += ev.due_std[i];
      rsup += ev.rff_std[i];
      ++ns;
    }
  }
  ev.due_gap_std = dg / ng;
  ev.due_support_std = dsup / ns;
  ev.rff_gap_std = rg / ng;
  ev.rff_support_std = rsup / ns;
  return ev;
}

Tensor gap_grid() {
  constexpr std::size_t kPoints = 321;
  std::vector<double> xs(kPoints);
  for (std::size_t i = 0; i < kPoints; ++i)
    xs[i] = -8.0 + 16.0 * static_cast<double>(i) / (kPoints - 1);
  return Tensor(Shape{kPoints, 1}, std::move(xs));
}

}  // namespace

Gap1dResult run_gap_1d(std::uint64_t seed, const std::string& out_dir) {
  ensure_dir(out_dir);
  Dataset ds = gen_gap_regression(1000, seed);
  GapModels models = train_gap_pair(ds, seed, 300, 256);
  Tensor grid_raw = gap_grid();
  GapEval ev = eval_gap_models(models, ds, grid_raw);

  Gap1dResult res;
  res.train_rmse = model_rmse(models.due, ds, ds.train_idx);
  res.gap_mean_std = ev.due_gap_std;
  res.support_mean_std = ev.due_support_std;

  if (!out_dir.empty()) {
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < grid_raw.rows(); ++i) {
      const double m = ev.due_mean[i], s = ev.due_std[i];
      rows.push_back({grid_raw.at(i, 0), m, m - 2.0 * s, m + 2.0 * s, s});
    }
    write_csv_table(out_dir + "/gap_1d_due.csv",
                    {"x", "mean", "lo2std", "hi2std", "std"}, rows);

    std::vector<std::vector<double>> train_rows;
    Tensor raw_x = ds.scaler.inverse(ds.x);
    for (std::size_t i = 0; i < std::min<std::size_t>(ds.n(), 300); ++i)
      train_rows.push_back({raw_x.at(i, 0), ds.y.at(i, 0)});
    write_csv_table(out_dir + "/gap_1d_train.csv", {"x", "y"}, train_rows);

    Manifest man;
    man.set_command("demo gap-1d");
    man.set_provenance(ds.provenance);
    man.add_metric("train_rmse", res.train_rmse);
    man.add_metric("gap_mean_std", res.gap_mean_std);
    man.add_metric("support_mean_std", res.support_mean_std);
    man.add_output(out_dir + "/gap_1d_due.csv");
    man.add_output(out_dir + "/gap_1d_train.csv");
    man.write(out_dir + "/manifest.json");
  }
  return res;
}

RffCompareResult run_rff_compare(std::uint64_t seed,
                                 const std::string& out_dir) {
  ensure_dir(out_dir);
  RffCompareResult res;
  res.n_small = 1000;
  res.n_large = 100000;

  Dataset ds_small = gen_gap_regression(res.n_small, seed);
  Dataset ds_large = gen_gap_regression(res.n_large, seed + 1);

  GapModels small_models, large_models;
  // The two sizes are independent runs; train them concurrently.
  std::thread small_thread([&] {
    small_models = train_gap_pair(ds_small, seed, 300, 256);
  });
  large_models = train_gap_pair(ds_large, seed + 1, 12, 512);
  small_thread.join();

  Tensor grid_raw = gap_grid();
  GapEval ev_small = eval_gap_models(small_models, ds_small, grid_raw);
  GapEval ev_large = eval_gap_models(large_models, ds_large, grid_raw);

  res.due_gap_std_small = ev_small.due_gap_std;
  res.due_support_std_small = ev_small.due_support_std;
  res.rff_gap_std_small = ev_small.rff_gap_std;
  res.rff_support_std_small = ev_small.rff_support_std;
  res.due_gap_std_large = ev_large.due_gap_std;
  res.due_support_std_large = ev_large.due_support_std;
  res.rff_gap_std_large = ev_large.rff_gap_std;
  res.rff_support_std_large = ev_large.rff_support_std;

  if (!out_dir.empty()) {
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < grid_raw.rows(); ++i) {
      auto band = [&](const GapEval& ev, std::size_t g) {
        return std::array<double, 3>{ev.due_mean[g],
                                     ev.due_mean[g] - 2.0 * ev.due_std[g],
                                     ev.due_mean[g] + 2.0 * ev.due_std[g]};
      };
      (void)band;
      rows.push_back({grid_raw.at(i, 0),
                      ev_small.due_mean[i],
                      ev_small.due_mean[i] - 2.0 * ev_small.due_std[i],
                      ev_small.due_mean[i] + 2.0 * ev_small.due_std[i],
                      ev_large.due_mean[i],
                      ev_large.due_mean[i] - 2.0 * ev_large.due_std[i],
                      ev_large.due_mean[i] + 2.0 * ev_large.due_std[i],
                      ev_small.rff_mean[i],
                      ev_small.rff_mean[i] - 2.0 * ev_small.rff_std[i],
                      ev_small.rff_mean[i] + 2.0 * ev_small.rff_std[i],
                      ev_large.rff_mean[i],
                      ev_large.rff_mean[i] - 2.0 * ev_large.rff_std[i],
                      ev_large.rff_mean[i] + 2.0 * ev_large.rff_std[i]});
    }
    write_csv_table(
        out_dir + "/rff_compare_series.csv",
        {"x", "due_small_mean", "due_small_lo", "due_small_hi",
         "due_large_mean", "due_large_lo", "due_large_hi", "rff_small_mean",
         "rff_small_lo", "rff_small_hi", "rff_large_mean", "rff_large_lo",
         "rff_large_hi"},
        rows);

    Manifest man;
    man.set_command("demo rff-compare");
    man.set_provenance(ds_small.provenance);
    man.add_metric("due_gap_std_small", res.due_gap_std_small);
    man.add_metric("due_gap_std_large", res.due_gap_std_large);
    man.add_metric("due_support_std_small", res.due_support_std_small);
    man.add_metric("due_support_std_large", res.due_support_std_large);
    man.add_metric("rff_gap_std_small", res.rff_gap_std_small);
    man.add_metric("rff_gap_std_large", res.rff_gap_std_large);
    man.add_metric("rff_support_std_small", res.rff_support_std_small);
    man.add_metric("rff_support_std_large", res.rff_support_std_large);
    man.add_metric("series_count", 8.0);
    man.add_output(out_dir + "/rff_compare_series.csv");
    man.write(out_dir + "/manifest.json");
  }
  return res;
}

CollapseResult run_collapse(std::uint64_t seed, const std::string& out_dir) {
  ensure_dir(out_dir);
  BlobsGrid bg = gen_blobs_grid(seed);

  auto train_variant = [&](bool residual, bool spectral) {
    ModelConfig mc;
    mc.fx = toy_extractor(2, residual, spectral);
    mc.fx.feature_dim = 8;
    mc.kernel = KernelKind::Rbf;
    mc.likelihood.kind = LikelihoodKind::Softmax;
    mc.likelihood.num_outputs = 2;
    mc.num_inducing = 8;

    TrainConfig tc;
    tc.opt.kind = OptimizerConfig::Kind::SgdMomentum;
    tc.opt.lr = 0.01;
    tc.opt.momentum = 0.9;
    tc.epochs = 800;
    tc.batch_size = 0;
    tc.seed = seed;

    DueModel model = DueModel::create(mc, seed);
    model.scaler = bg.data.scaler;
    initialize_model(model, bg.data, tc);
    train_model(model, bg.data, tc);
    return model;
  };

  DueModel constrained = train_variant(true, true);
  DueModel unconstrained = train_variant(false, false);

  // OoD set: the grid plus the star as the final row.
  const std::size_t g = bg.grid.rows();
  std::vector<double> ood(bg.grid.data(), bg.grid.data() + g * 2);
  ood.push_back(bg.star.at(0, 0));
  ood.push_back(bg.star.at(0, 1));
  Tensor ood_inputs(Shape{g + 1, 2}, std::move(ood));

  auto metrics_for = [&](DueModel& model) {
    Tensor f_in = model.features(bg.data.x, nullptr, Mode::Eval).detached();
    Tensor f_ood = model.features(ood_inputs, nullptr, Mode::Eval).detached();
    return collapse_metrics(f_in, f_ood, bg.data.x, ood_inputs, g);
  };

  Rng eval_rng = Rng(seed).substream("collapse-eval");
  CollapseResult res;
  res.constrained = metrics_for(constrained);
  res.unconstrained = metrics_for(unconstrained);
  res.constrained_accuracy =
      model_accuracy(constrained, bg.data, bg.data.train_idx, eval_rng);
  res.unconstrained_accuracy =
      model_accuracy(unconstrained, bg.data, bg.data.train_idx, eval_rng);

  if (!out_dir.empty()) {
    std::vector<std::vector<double>> rows;
    Tensor fc = constrained.features(ood_inputs, nullptr, Mode::Eval).detached();
    Tensor fu =
        unconstrained.features(ood_inputs, nullptr, Mode::Eval).detached();
    Tensor fc_in = constrained.features(bg.data.x, nullptr, Mode::Eval).detached();
    Tensor fu_in =
        unconstrained.features(bg.data.x, nullptr, Mode::Eval).detached();
    auto nearest = [](const Tensor& q, std::size_t row, const Tensor& set) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < set.rows(); ++i) {
        double d2 = 0.0;
        for (std::size_t c = 0; c < set.cols(); ++c) {
          const double r = q.at(row, c) - set.at(i, c);
          d2 += r * r;
        }
        best = std::min(best, d2);
      }
      return std::sqrt(best);
    };
    for (std::size_t i = 0; i < g; ++i) {
      rows.push_back({bg.grid_raw.at(i, 0), bg.grid_raw.at(i, 1),
                      bg.grid_logdensity[i], nearest(fc, i, fc_in),
                      nearest(fu, i, fu_in)});
    }
    write_csv_table(out_dir + "/collapse_grid.csv",
                    {"x0", "x1", "log_density", "constrained_feature_dist",
                     "unconstrained_feature_dist"},
                    rows);

    Manifest man;
    man.set_command("demo collapse");
    man.set_provenance(bg.data.provenance);
    man.add_metric("constrained_contraction_ratio",
                   res.constrained.contraction_ratio);
    man.add_metric("unconstrained_contraction_ratio",
                   res.unconstrained.contraction_ratio);
    man.add_metric("constrained_star_distance_normalized",
                   res.constrained.star_feature_distance_normalized);
    man.add_metric("unconstrained_star_distance_normalized",
                   res.unconstrained.star_feature_distance_normalized);
    man.add_metric("constrained_gram_logdet", res.constrained.gram_logdet);
    man.add_metric("unconstrained_gram_logdet", res.unconstrained.gram_logdet);
    man.add_metric("constrained_accuracy", res.constrained_accuracy);
    man.add_metric("unconstrained_accuracy", res.unconstrained_accuracy);
    man.add_output(out_dir + "/collapse_grid.csv");
    man.write(out_dir + "/manifest.json");
  }
  return res;
}

CateDeferralResult run_cate_deferral(std::uint64_t seed, std::size_t trials,
                                     const std::string& out_dir) {
  ensure_dir(out_dir);
  CateDeferralResult res;
  res.trials = trials;

  std::vector<std::vector<double>> rows;
  double sum_full = 0.0, sum_u10 = 0.0, sum_r10 = 0.0, sum_u50 = 0.0,
         sum_r50 = 0.0;

  for (std::size_t trial = 0; trial < trials; ++trial) {
    const std::uint64_t trial_seed = seed + 1000 * (trial + 1);
    Dataset ds = gen_synthetic_cate(750, trial_seed);

    ModelConfig mc;
    mc.fx.input_dim = 8;
    mc.fx.feature_dim = 64;
    mc.fx.depth = 3;
    mc.fx.activation = Activation::Elu;
    mc.fx.dropout_rate = 0.1;
    mc.fx.spectral_coeff = 0.95;
    mc.fx.residual = true;
    mc.fx.spectral_norm = true;
    mc.kernel = KernelKind::Matern32;
    mc.likelihood.kind = LikelihoodKind::Gaussian;
    mc.likelihood.num_outputs = 1;
    mc.num_inducing = 64;
    mc.append_treatment = true;

    TrainConfig tc;
    tc.opt.kind = OptimizerConfig::Kind::Adam;
    tc.opt.lr = 0.001;
    tc.epochs = 60;
    tc.batch_size = 100;
    tc.seed = trial_seed;
    tc.select_on_val_nll = true;

    DueModel model = DueModel::create(mc, trial_seed);
    model.scaler = ds.scaler;
    initialize_model(model, ds, tc);
    train_model(model, ds, tc);

    Rng cate_rng = Rng(trial_seed).substream("cate-mc");
    Tensor x_test = ds.x_rows(ds.test_idx);
    CateEstimate est = cate_estimate(model, x_test, 128, cate_rng);
    std::vector<double> truth(ds.test_idx.size());
    for (std::size_t i = 0; i < ds.test_idx.size(); ++i)
      truth[i] = ds.true_cate[ds.test_idx[i]];

    const double full = rmse(est.mean, truth);
    auto u10 = deferral_curve(est.mean, truth, est.var, 0.1,
                              DeferralPolicy::Uncertainty);
    auto r10 = deferral_curve(est.mean, truth, est.var, 0.1,
                              DeferralPolicy::Random, trial_seed);
    auto u50 = deferral_curve(est.mean, truth, est.var, 0.5,
                              DeferralPolicy::Uncertainty);
    auto r50 = deferral_curve(est.mean, truth, est.var, 0.5,
                              DeferralPolicy::Random, trial_seed + 1);

    sum_full += full;
    sum_u10 += u10.retained_rmse;
    sum_r10 += r10.retained_rmse;
    sum_u50 += u50.retained_rmse;
    sum_r50 += r50.retained_rmse;
    if (u10.retained_rmse < r10.retained_rmse) ++res.wins_10;
    if (u50.retained_rmse < r50.retained_rmse) ++res.wins_50;
    rows.push_back({static_cast<double>(trial), full, u10.retained_rmse,
                    r10.retained_rmse, u50.retained_rmse, r50.retained_rmse});
  }

  const double nt = static_cast<double>(trials);
  res.mean_rmse_full = sum_full / nt;
  res.mean_rmse_uncertainty_10 = sum_u10 / nt;
  res.mean_rmse_random_10 = sum_r10 / nt;
  res.mean_rmse_uncertainty_50 = sum_u50 / nt;
  res.mean_rmse_random_50 = sum_r50 / nt;

  if (!out_dir.empty()) {
    write_csv_table(out_dir + "/cate_deferral_trials.csv",
                    {"trial", "rmse_full", "rmse_uncertainty_10",
                     "rmse_random_10", "rmse_uncertainty_50",
                     "rmse_random_50"},
                    rows);
    Manifest man;
    man.set_command("demo cate-deferral");
    man.add_metric("trials", nt);
    man.add_metric("mean_rmse_full", res.mean_rmse_full);
    man.add_metric("mean_rmse_uncertainty_10", res.mean_rmse_uncertainty_10);
    man.add_metric("mean_rmse_random_10", res.mean_rmse_random_10);
    man.add_metric("mean_rmse_uncertainty_50", res.mean_rmse_uncertainty_50);
    man.add_metric("mean_rmse_random_50", res.mean_rmse_random_50);
    man.add_metric("wins_10", static_cast<double>(res.wins_10));
    man.add_metric("wins_50", static_cast<double>(res.wins_50));
    man.add_output(out_dir + "/cate_deferral_trials.csv");
    man.write(out_dir + "/manifest.json");
  }
  return res;
}

InducingAblationResult run_inducing_ablation(
    std::uint64_t seed, const std::vector<std::size_t>& ms,
    const std::string& out_dir) {
  ensure_dir(out_dir);
  Dataset ds = gen_two_moons(200, 0.1, seed);
  Dataset test = gen_two_moons(400, 0.1, seed + 1000);
  Tensor test_x_std = ds.scaler.transform(test.scaler.inverse(test.x));
  const auto test_labels = labels_from_onehot(test.y);

  InducingAblationResult res;
  res.counts = ms;
  for (const std::size_t m : ms) {
    DueModel model =
        train_two_moons_model(ds, m, true, true, seed, kTwoMoonsEpochs);
    Rng eval_rng = Rng(seed).substream("ablation-eval");
    Tensor feats = model.features(test_x_std, nullptr, Mode::Eval).detached();
    auto pred = svgp_predict(model.gp, feats);
    predictive_class_probs(pred, model.cfg.likelihood.mc_predict, eval_rng);
    res.test_nll.push_back(classification_nll(pred.probs, test_labels));
  }

  if (!out_dir.empty()) {
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < ms.size(); ++i)
      rows.push_back({static_cast<double>(ms[i]), res.test_nll[i]});
    write_csv_table(out_dir + "/inducing_ablation.csv", {"m", "test_nll"},
                    rows);
    Manifest man;
    man.set_command("demo inducing-ablation");
    man.set_provenance(ds.provenance);
    for (std::size_t i = 0; i < ms.size(); ++i)
      man.add_metric("test_nll_m" + std::to_string(ms[i]), res.test_nll[i]);
    man.add_output(out_dir + "/inducing_ablation.csv");
    man.write(out_dir + "/manifest.json");
  }
  return res;
}

}  // namespace due

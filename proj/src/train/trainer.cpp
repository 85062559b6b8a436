#include "due/train/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "due/core/error.hpp"
#include "due/core/ops.hpp"
#include "due/metrics/metrics.hpp"

namespace due {

DueModel DueModel::create(const ModelConfig& cfg, std::uint64_t seed) {
  DueModel model;
  model.cfg = cfg;
  Rng root(seed);
  model.extractor = FeatureExtractor(cfg.fx, root.substream("fx-init"));
  const bool with_noise = cfg.likelihood.kind == LikelihoodKind::Gaussian;
  model.gp = GpState::create(cfg.kernel, cfg.num_inducing, cfg.gp_feature_dim(),
                             cfg.likelihood.num_outputs, with_noise,
                             cfg.init_noise_var);
  model.scaler = Scaler::identity(cfg.fx.input_dim);
  return model;
}

Tensor DueModel::features(const Tensor& x_std,
                          const std::vector<double>* treatment, Mode mode,
                          Rng* dropout_rng) {
  Tensor feats = extractor.forward(x_std, mode, dropout_rng);
  if (!cfg.append_treatment) return feats;
  if (treatment == nullptr || treatment->size() != x_std.rows())
    throw ContractError("model expects a treatment column");
  Tensor t_col(Shape{treatment->size(), 1}, *treatment);
  return hstack({feats, t_col});
}

std::vector<Tensor> DueModel::parameters() {
  auto params = extractor.parameters();
  for (auto& p : gp.parameters()) params.push_back(p);
  return params;
}

void initialize_model(DueModel& model, const Dataset& data,
                      const TrainConfig& cfg) {
  const auto& train_idx = data.train_idx;
  const std::size_t m = model.cfg.num_inducing;
  if (train_idx.size() < std::max<std::size_t>(m, 2))
    throw ArgumentError("initialize: dataset smaller than inducing count");

  Rng root(cfg.seed);
  Rng subset_rng = root.substream("init-subset");
  auto pool = train_idx;
  subset_rng.shuffle(pool);
  const std::size_t p =
      std::min(pool.size(), std::max<std::size_t>(cfg.init_subset, m));
  pool.resize(p);

  model.extractor.spectral_normalize();
  Tensor x_init = data.x_rows(pool);
  auto t_init = data.treatment_rows(pool);
  Tensor feats = model.features(
      x_init, model.cfg.append_treatment ? &t_init : nullptr, Mode::Eval);
  Tensor feats_plain = feats.detached();

  Tensor z = init_inducing(feats_plain, m,
                           root.substream("inducing").next_u64());
  std::copy_n(z.data(), z.size(), model.gp.inducing.data());

  const double l0 = init_lengthscale(feats_plain);
  for (auto& head : model.gp.heads) {
    head.log_lengthscale.data()[0] = std::log(l0);
    head.log_outputscale.data()[0] = 0.0;
    head.mean_const.data()[0] = 0.0;
  }
}

namespace {

struct ElboRecord {
  double elbo = 0.0;
  double kl = 0.0;
};

std::string diag_string(const DueModel& model, std::size_t epoch,
                        std::size_t batch, double loss) {
  std::ostringstream os;
  os << "epoch=" << epoch << " batch=" << batch << " loss=" << loss;
  for (std::size_t t = 0; t < model.gp.heads.size(); ++t) {
    os << " l" << t << "=" << std::exp(model.gp.heads[t].log_lengthscale.item())
       << " s" << t << "=" << std::exp(model.gp.heads[t].log_outputscale.item());
  }
  if (model.gp.log_noise.defined())
    os << " noise=" << std::exp(model.gp.log_noise.item());
  return os.str();
}

struct ParamSnapshot {
  std::vector<std::vector<double>> values;
  std::vector<std::vector<double>> bn_running;

  static ParamSnapshot take(DueModel& model) {
    ParamSnapshot snap;
    for (const Tensor& p : model.parameters())
      snap.values.emplace_back(p.data(), p.data() + p.size());
    for (const auto& block : model.extractor.blocks()) {
      if (block.bn.has_value()) {
        snap.bn_running.push_back(block.bn->running_mean);
        snap.bn_running.push_back(block.bn->running_var);
      }
    }
    return snap;
  }

  void restore(DueModel& model) const {
    auto params = model.parameters();
    for (std::size_t i = 0; i < params.size(); ++i)
      std::copy(values[i].begin(), values[i].end(), params[i].data());
    std::size_t r = 0;
    for (auto& block : model.extractor.blocks()) {
      if (block.bn.has_value()) {
        block.bn->running_mean = bn_running[r++];
        block.bn->running_var = bn_running[r++];
      }
    }
  }
};

}  // namespace

TrainLog train_model(DueModel& model, const Dataset& data,
                     const TrainConfig& cfg) {
  const auto& train_idx = data.train_idx;
  const std::size_t n_train = train_idx.size();
  if (n_train == 0) throw ArgumentError("train: empty training split");
  const std::size_t batch =
      cfg.batch_size == 0 ? n_train : std::min(cfg.batch_size, n_train);

  Rng root(cfg.seed);
  Rng shuffle_rng = root.substream("shuffle");
  Rng dropout_rng = root.substream("dropout");
  Rng mc_rng = root.substream("elbo-mc");
  Rng eval_rng = root.substream("eval-mc");

  Optimizer opt(cfg.opt, model.parameters());
  TrainLog log;
  double best_val = std::numeric_limits<double>::infinity();
  ParamSnapshot best;
  bool have_best = false;

  auto order = train_idx;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    shuffle_rng.shuffle(order);

    double elbo_sum = 0.0, ell_sum = 0.0, kl_last = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n_train; start += batch) {
      const std::size_t stop = std::min(start + batch, n_train);
      std::vector<std::size_t> rows(order.begin() + start,
                                    order.begin() + stop);
      model.extractor.spectral_normalize();
      Tensor xb = data.x_rows(rows);
      auto tb = data.treatment_rows(rows);
      Tensor feats = model.features(
          xb, model.cfg.append_treatment ? &tb : nullptr, Mode::Train,
          &dropout_rng);
      Tensor yb = data.y_rows(rows);
      Tensor kl = kl_whitened(model.gp);
      Tensor bound = elbo(model.gp, model.cfg.likelihood, feats, yb, n_train,
                          &mc_rng);
      Tensor loss = neg(bound);
      const double loss_v = loss.item();
      if (!std::isfinite(loss_v)) {
        throw TrainingAbort("non-finite loss",
                            diag_string(model, epoch, batches, loss_v));
      }
      opt.zero_grad();
      backward(loss);
      opt.step();

      const double kl_v = kl.item();
      elbo_sum += -loss_v;
      ell_sum += -loss_v + kl_v;
      kl_last = kl_v;
      ++batches;
    }
    // Keep the saved/evaluated parameters inside the constraint set.
    model.extractor.spectral_normalize();

    EpochRecord rec;
    rec.epoch = epoch;
    rec.elbo = elbo_sum / static_cast<double>(batches);
    rec.ell = ell_sum / static_cast<double>(batches);
    rec.kl = kl_last;
    rec.lengthscale0 = std::exp(model.gp.heads[0].log_lengthscale.item());
    rec.outputscale0 = std::exp(model.gp.heads[0].log_outputscale.item());
    rec.noise_var = model.gp.log_noise.defined()
                        ? std::exp(model.gp.log_noise.item())
                        : std::numeric_limits<double>::quiet_NaN();
    rec.val_nll = std::numeric_limits<double>::quiet_NaN();

    if (cfg.select_on_val_nll && !data.val_idx.empty()) {
      rec.val_nll = model_nll(model, data, data.val_idx, eval_rng);
      if (rec.val_nll < best_val) {
        best_val = rec.val_nll;
        best = ParamSnapshot::take(model);
        have_best = true;
      }
    }

    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    log.epochs.push_back(rec);
  }

  if (cfg.select_on_val_nll && have_best) best.restore(model);
  return log;
}

void TrainLog::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ArgumentError("train log: cannot write " + path);
  out << "epoch,elbo,ell,kl,lengthscale0,outputscale0,noise_var,val_nll,"
         "wall_seconds\n";
  char buf[256];
  for (const auto& r : epochs) {
    std::snprintf(buf, sizeof(buf),
                  "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.6f\n",
                  r.epoch, r.elbo, r.ell, r.kl, r.lengthscale0, r.outputscale0,
                  r.noise_var, r.val_nll, r.wall_seconds);
    out << buf;
  }
}

namespace {

PredictiveDistribution predict_rows(DueModel& model, const Dataset& data,
                                    const std::vector<std::size_t>& idx) {
  Tensor x = data.x_rows(idx);
  auto t = data.treatment_rows(idx);
  Tensor feats = model.features(
      x, model.cfg.append_treatment ? &t : nullptr, Mode::Eval);
  return svgp_predict(model.gp, feats.detached());
}

}  // namespace

double model_accuracy(DueModel& model, const Dataset& data,
                      const std::vector<std::size_t>& idx, Rng& rng) {
  if (model.cfg.likelihood.kind != LikelihoodKind::Softmax)
    throw ContractError("accuracy needs a classification model");
  auto pred = predict_rows(model, data, idx);
  predictive_class_probs(pred, model.cfg.likelihood.mc_predict, rng);
  const auto labels = labels_from_onehot(data.y_rows(idx));
  std::size_t hits = 0;
  for (std::size_t i = 0; i < idx.size(); ++i)
    if (pred.pred_class[i] == labels[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(idx.size());
}

double model_nll(DueModel& model, const Dataset& data,
                 const std::vector<std::size_t>& idx, Rng& rng) {
  auto pred = predict_rows(model, data, idx);
  Tensor y = data.y_rows(idx);
  if (model.cfg.likelihood.kind == LikelihoodKind::Softmax) {
    predictive_class_probs(pred, model.cfg.likelihood.mc_predict, rng);
    return classification_nll(pred.probs, labels_from_onehot(y));
  }
  const double noise = model.gp.noise_var();
  std::vector<double> mean(idx.size()), var(idx.size()), target(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    mean[i] = pred.latent_mean.at(i, 0);
    var[i] = pred.latent_var.at(i, 0) + noise;
    target[i] = y.at(i, 0);
  }
  return gaussian_nll(mean, var, target);
}

double model_rmse(DueModel& model, const Dataset& data,
                  const std::vector<std::size_t>& idx) {
  if (model.cfg.likelihood.kind != LikelihoodKind::Gaussian)
    throw ContractError("rmse needs a regression model");
  auto pred = predict_rows(model, data, idx);
  std::vector<double> mean(idx.size()), target(idx.size());
  Tensor y = data.y_rows(idx);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    mean[i] = pred.latent_mean.at(i, 0);
    target[i] = y.at(i, 0);
  }
  return rmse(mean, target);
}

CollapseProbe collapse_probe(DueModel& model, const Dataset& data,
                             const std::vector<std::size_t>& probe_idx) {
  if (probe_idx.size() > 500)
    throw ArgumentError("collapse_probe: probe subset must stay small");
  Tensor x = data.x_rows(probe_idx);
  auto t = data.treatment_rows(probe_idx);
  Tensor feats = model
                     .features(x, model.cfg.append_treatment ? &t : nullptr,
                               Mode::Eval)
                     .detached();

  std::vector<double> y(probe_idx.size());
  for (std::size_t i = 0; i < probe_idx.size(); ++i)
    y[i] = data.y.at(probe_idx[i], 0);

  const auto& head = model.gp.heads[0];
  const double sigma_f = std::exp(head.log_outputscale.item());
  const double sigma_n =
      model.gp.log_noise.defined() ? std::sqrt(model.gp.noise_var()) : 0.1;

  CollapseProbe probe;
  probe.marginal = exact_gp_marginal(
      model.gp.kernel, feats, y, sigma_f, sigma_n,
      std::exp(head.log_lengthscale.item()), head.mean_const.item());

  const std::size_t n = feats.rows(), d = feats.cols();
  double mn = std::numeric_limits<double>::infinity(), mx = 0.0, acc = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double d2 = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double r = feats.at(i, c) - feats.at(j, c);
        d2 += r * r;
      }
      const double dist = std::sqrt(d2);
      mn = std::min(mn, dist);
      mx = std::max(mx, dist);
      acc += dist;
      ++pairs;
    }
  probe.min_dist = pairs ? mn : 0.0;
  probe.mean_dist = pairs ? acc / static_cast<double>(pairs) : 0.0;
  probe.max_dist = mx;
  return probe;
}

}  // namespace due

#include "due/cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "due/cli/check.hpp"
#include "due/cli/demos.hpp"
#include "due/core/error.hpp"
#include "due/data/csv.hpp"
#include "due/io/config.hpp"
#include "due/io/manifest.hpp"
#include "due/io/model_file.hpp"
#include "due/train/trainer.hpp"

namespace due {
namespace {

namespace fs = std::filesystem;

double elapsed_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

int cmd_train(const std::string& config_path, const std::string& out_override) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg = ExperimentConfig::from_raw(parse_config_file(config_path));
  if (!out_override.empty()) cfg.out_dir = out_override;

  Dataset ds = build_dataset(cfg.data);
  if (cfg.model.fx.input_dim != ds.dim()) {
    // The dataset fixes the input width; an explicit mismatch is an error.
    if (cfg.model.fx.input_dim != 2 /* schema default */)
      throw ConfigError("config: model.input_dim " +
                            std::to_string(cfg.model.fx.input_dim) +
                            " does not match dataset dimension " +
                            std::to_string(ds.dim()),
                        "model.input_dim");
    cfg.model.fx.input_dim = ds.dim();
  }
  if (cfg.model.append_treatment && ds.treatment.empty())
    throw ConfigError("config: append_treatment needs a treatment column",
                      "model.append_treatment");

  DueModel model = DueModel::create(cfg.model, cfg.train.seed);
  model.scaler = ds.scaler;
  initialize_model(model, ds, cfg.train);

  TrainLog log;
  try {
    log = train_model(model, ds, cfg.train);
  } catch (const TrainingAbort& abort) {
    std::cerr << "training aborted: " << abort.what() << " [" << abort.diagnostic
              << "]\n";
    return 1;
  }

  fs::create_directories(cfg.out_dir);
  const std::string model_path = cfg.out_dir + "/model.bin";
  const std::string log_path = cfg.out_dir + "/train_log.csv";
  const std::string manifest_path = cfg.out_dir + "/manifest.json";
  save_model(model, model_path);
  log.write_csv(log_path);

  Manifest man;
  man.set_command("train " + config_path);
  man.set_config_echo(cfg.echo());
  man.set_provenance(ds.provenance);
  if (!log.epochs.empty()) {
    man.add_metric("final_elbo", log.epochs.back().elbo);
    man.add_metric("final_kl", log.epochs.back().kl);
    man.add_metric("final_lengthscale0", log.epochs.back().lengthscale0);
    man.add_metric("final_outputscale0", log.epochs.back().outputscale0);
    if (std::isfinite(log.epochs.back().noise_var))
      man.add_metric("final_noise_var", log.epochs.back().noise_var);
  }
  Rng eval_rng = Rng(cfg.train.seed).substream("manifest-eval");
  if (cfg.model.likelihood.kind == LikelihoodKind::Softmax) {
    man.add_metric("train_accuracy",
                   model_accuracy(model, ds, ds.train_idx, eval_rng));
    man.add_metric("train_nll", model_nll(model, ds, ds.train_idx, eval_rng));
  } else {
    man.add_metric("train_rmse", model_rmse(model, ds, ds.train_idx));
    man.add_metric("train_nll", model_nll(model, ds, ds.train_idx, eval_rng));
  }
  if (!ds.test_idx.empty()) {
    if (cfg.model.likelihood.kind == LikelihoodKind::Softmax)
      man.add_metric("test_accuracy",
                     model_accuracy(model, ds, ds.test_idx, eval_rng));
    else
      man.add_metric("test_rmse", model_rmse(model, ds, ds.test_idx));
  }
  man.add_output(model_path);
  man.add_output(log_path);
  man.add_timing("total", elapsed_since(t0));
  man.write(manifest_path);
  std::cout << "wrote " << model_path << ", " << log_path << ", "
            << manifest_path << "\n";
  return 0;
}

namespace {

Tensor parse_grid(const std::string& spec, std::size_t input_dim) {
  std::vector<double> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(std::stod(item));
  if (input_dim == 1 && parts.size() == 3) {
    const std::size_t res = static_cast<std::size_t>(parts[2]);
    if (res < 2) throw ArgumentError("grid: resolution must be >= 2");
    std::vector<double> xs(res);
    for (std::size_t i = 0; i < res; ++i)
      xs[i] = parts[0] + (parts[1] - parts[0]) * static_cast<double>(i) /
                             static_cast<double>(res - 1);
    return Tensor(Shape{res, 1}, std::move(xs));
  }
  if (input_dim == 2 && parts.size() == 5) {
    const std::size_t res = static_cast<std::size_t>(parts[4]);
    if (res < 2) throw ArgumentError("grid: resolution must be >= 2");
    std::vector<double> xs(res * res * 2);
    for (std::size_t i = 0; i < res; ++i)
      for (std::size_t j = 0; j < res; ++j) {
        xs[(i * res + j) * 2 + 0] =
            parts[0] + (parts[1] - parts[0]) * static_cast<double>(i) /
                           static_cast<double>(res - 1);
        xs[(i * res + j) * 2 + 1] =
            parts[2] + (parts[3] - parts[2]) * static_cast<double>(j) /
                           static_cast<double>(res - 1);
      }
    return Tensor(Shape{res * res, 2}, std::move(xs));
  }
  throw ArgumentError(
      "grid: expected 'min,max,res' (1D input) or "
      "'xmin,xmax,ymin,ymax,res' (2D input)");
}

}  // namespace

int cmd_eval(const EvalOptions& opts) {
  DueModel model = load_model(opts.model_path);
  const std::size_t d = model.cfg.fx.input_dim;

  Tensor x_raw;
  std::vector<double> treatment;
  if (!opts.grid_spec.empty()) {
    x_raw = parse_grid(opts.grid_spec, d);
  } else if (!opts.csv_path.empty()) {
    CsvSchema schema;
    schema.target_column =
        opts.target_column.empty() ? "y" : opts.target_column;
    schema.treatment_column = opts.treatment_column;
    Dataset ds = [&] {
      try {
        return load_csv(opts.csv_path, schema);
      } catch (const ConfigError&) {
        // No target column present: treat every column as a feature.
        CsvSchema all;
        all.target_column = "";
        std::ifstream in(opts.csv_path);
        std::string header;
        std::getline(in, header);
        std::stringstream hs(header);
        std::string col;
        while (std::getline(hs, col, ',')) {
          if (col == opts.treatment_column) continue;
          all.feature_columns.push_back(col);
        }
        all.target_column = all.feature_columns.back();
        all.feature_columns.pop_back();
        all.treatment_column = opts.treatment_column;
        return load_csv(opts.csv_path, all);
      }
    }();
    x_raw = ds.x;
    treatment = ds.treatment;
    if (ds.dim() != d)
      throw ArgumentError("eval: csv has " + std::to_string(ds.dim()) +
                          " feature columns, model expects " +
                          std::to_string(d));
  } else {
    throw ArgumentError("eval: provide --csv or --grid");
  }

  Tensor x_std = model.scaler.transform(x_raw);
  Tensor feats = model
                     .features(x_std, model.cfg.append_treatment
                                          ? &treatment
                                          : nullptr,
                               Mode::Eval)
                     .detached();
  auto pred = svgp_predict(model.gp, feats);

  std::vector<std::string> header;
  for (std::size_t c = 0; c < d; ++c) header.push_back("x" + std::to_string(c));
  std::vector<std::vector<double>> rows(x_raw.rows());
  for (std::size_t i = 0; i < x_raw.rows(); ++i)
    for (std::size_t c = 0; c < d; ++c) rows[i].push_back(x_raw.at(i, c));

  if (model.cfg.likelihood.kind == LikelihoodKind::Gaussian) {
    header.insert(header.end(),
                  {"mean", "latent_variance", "predictive_variance"});
    const double noise = model.gp.noise_var();
    for (std::size_t i = 0; i < x_raw.rows(); ++i) {
      rows[i].push_back(pred.latent_mean.at(i, 0));
      rows[i].push_back(pred.latent_var.at(i, 0));
      rows[i].push_back(pred.latent_var.at(i, 0) + noise);
    }
  } else {
    Rng rng = Rng(opts.seed).substream("eval-mc");
    predictive_class_probs(pred, model.cfg.likelihood.mc_predict, rng);
    const std::size_t t = model.cfg.likelihood.num_outputs;
    for (std::size_t c = 0; c < t; ++c)
      header.push_back("prob_" + std::to_string(c));
    header.insert(header.end(), {"entropy", "pred_class"});
    for (std::size_t i = 0; i < x_raw.rows(); ++i) {
      for (std::size_t c = 0; c < t; ++c)
        rows[i].push_back(pred.probs.at(i, c));
      rows[i].push_back(pred.entropy[i]);
      rows[i].push_back(static_cast<double>(pred.pred_class[i]));
    }
  }

  write_csv_table(opts.out_path, header, rows);
  std::cout << "wrote " << opts.out_path << "\n";
  return 0;
}

int cmd_demo(const std::string& name, const std::string& out_dir,
             std::uint64_t seed, std::size_t trials) {
  const std::string dir = out_dir.empty() ? "out/" + name : out_dir;
  if (name == "two-moons") {
    auto res = run_two_moons(seed, dir);
    std::cout << "due_train_accuracy=" << res.due_train_accuracy
              << " due_far_entropy=" << res.due_far_entropy
              << " gpdnn_far_entropy=" << res.gpdnn_far_entropy
              << " softmax_far_entropy=" << res.softmax_far_entropy << "\n";
    return 0;
  }
  if (name == "gap-1d") {
    auto res = run_gap_1d(seed, dir);
    std::cout << "train_rmse=" << res.train_rmse
              << " gap_mean_std=" << res.gap_mean_std
              << " support_mean_std=" << res.support_mean_std << "\n";
    return 0;
  }
  if (name == "collapse") {
    auto res = run_collapse(seed, dir);
    std::cout << "constrained_ratio=" << res.constrained.contraction_ratio
              << " unconstrained_ratio=" << res.unconstrained.contraction_ratio
              << "\n";
    return 0;
  }
  if (name == "rff-compare") {
    auto res = run_rff_compare(seed, dir);
    std::cout << "rff_gap_shrink=" << res.rff_gap_std_small / res.rff_gap_std_large
              << " due_gap_change="
              << res.due_gap_std_small / res.due_gap_std_large << "\n";
    return 0;
  }
  if (name == "cate-deferral") {
    auto res = run_cate_deferral(seed, trials, dir);
    std::cout << "uncertainty50=" << res.mean_rmse_uncertainty_50
              << " random50=" << res.mean_rmse_random_50
              << " uncertainty10=" << res.mean_rmse_uncertainty_10
              << " random10=" << res.mean_rmse_random_10 << "\n";
    return 0;
  }
  if (name == "inducing-ablation") {
    auto res = run_inducing_ablation(seed, {4, 10, 50}, dir);
    std::cout << "test_nll:";
    for (std::size_t i = 0; i < res.counts.size(); ++i)
      std::cout << " m" << res.counts[i] << "=" << res.test_nll[i];
    std::cout << "\n";
    return 0;
  }
  std::cerr << "unknown demo '" << name
            << "'; valid names: two-moons, gap-1d, collapse, rff-compare, "
               "cate-deferral, inducing-ablation\n";
  return 2;
}

int cmd_check(const std::string& corrupt_op) {
  CheckReport report = run_self_checks(corrupt_op);
  std::cout << report.render();
  if (report.all_pass()) {
    std::cout << "all checks passed\n";
    return 0;
  }
  for (const auto& item : report.items)
    if (!item.pass) {
      std::cerr << "FAILED: " << item.name << "\n";
      break;
    }
  return 1;
}

}  // namespace due

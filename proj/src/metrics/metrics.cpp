#include "due/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "due/core/error.hpp"
#include "due/core/linalg.hpp"
#include "due/gp/kernel.hpp"
#include "due/simd/kernels.hpp"

namespace due {

double auroc(const std::vector<double>& scores_in,
             const std::vector<double>& scores_out) {
  if (scores_in.empty() || scores_out.empty())
    throw ArgumentError("auroc: both score sets must be nonempty");
  double wins = 0.0;
  for (const double o : scores_out) {
    for (const double i : scores_in) {
      if (o > i)
        wins += 1.0;
      else if (o == i)
        wins += 0.5;
    }
  }
  return wins / (static_cast<double>(scores_in.size()) *
                 static_cast<double>(scores_out.size()));
}

double ece(const Tensor& probs, const std::vector<std::size_t>& labels,
           std::size_t bins) {
  const std::size_t n = probs.rows(), t = probs.cols();
  if (labels.size() != n) throw ShapeError("ece: label count mismatch");
  if (bins == 0) throw ArgumentError("ece: bins must be positive");

  std::vector<double> bin_conf(bins, 0.0), bin_acc(bins, 0.0);
  std::vector<std::size_t> bin_n(bins, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = probs.data() + i * t;
    const std::size_t pred =
        static_cast<std::size_t>(std::max_element(row, row + t) - row);
    const double conf = row[pred];
    std::size_t b = static_cast<std::size_t>(conf * static_cast<double>(bins));
    if (b >= bins) b = bins - 1;
    bin_conf[b] += conf;
    bin_acc[b] += pred == labels[i] ? 1.0 : 0.0;
    bin_n[b]++;
  }
  double err = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    if (bin_n[b] == 0) continue;
    const double w = static_cast<double>(bin_n[b]) / static_cast<double>(n);
    err += w * std::abs(bin_acc[b] / bin_n[b] - bin_conf[b] / bin_n[b]);
  }
  return err;
}

double rmse(const std::vector<double>& predictions,
            const std::vector<double>& targets) {
  if (predictions.size() != targets.size() || predictions.empty())
    throw ArgumentError("rmse: length mismatch or empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double r = predictions[i] - targets[i];
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(predictions.size()));
}

double gaussian_nll(const std::vector<double>& mean,
                    const std::vector<double>& var,
                    const std::vector<double>& targets) {
  if (mean.size() != targets.size() || var.size() != targets.size() ||
      mean.empty())
    throw ArgumentError("gaussian_nll: length mismatch or empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < mean.size(); ++i) {
    const double r = targets[i] - mean[i];
    acc += 0.5 * std::log(2.0 * M_PI * var[i]) + r * r / (2.0 * var[i]);
  }
  return acc / static_cast<double>(mean.size());
}

double classification_nll(const Tensor& probs,
                          const std::vector<std::size_t>& labels) {
  const std::size_t n = probs.rows();
  if (labels.size() != n)
    throw ArgumentError("classification_nll: label count mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = std::max(probs.at(i, labels[i]), 1e-300);
    acc -= std::log(p);
  }
  return acc / static_cast<double>(n);
}

CateEstimate cate_estimate(DueModel& model, const Tensor& x_std,
                           std::size_t mc_samples, Rng& rng) {
  if (model.cfg.likelihood.kind != LikelihoodKind::Gaussian ||
      !model.cfg.append_treatment)
    throw ContractError(
        "cate_estimate needs a regression model with a treatment input");
  if (mc_samples == 0) throw ArgumentError("cate_estimate: mc_samples >= 1");

  const std::size_t n = x_std.rows();
  std::vector<double> t0(n, 0.0), t1(n, 1.0);
  Tensor f0 = model.features(x_std, &t0, Mode::Eval).detached();
  Tensor f1 = model.features(x_std, &t1, Mode::Eval).detached();
  PairedPredictive joint = svgp_predict_paired(model.gp, f0, f1);

  CateEstimate est;
  est.mc_samples = mc_samples;
  est.mean.resize(n);
  est.var.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    est.mean[i] = joint.mean1[i] - joint.mean0[i];
    // Sample the correlated pair via its 2x2 Cholesky factor.
    const double a = std::sqrt(joint.var0[i]);
    const double b = a > 0.0 ? joint.cov01[i] / a : 0.0;
    const double c2 = std::max(0.0, joint.var1[i] - b * b);
    const double c = std::sqrt(c2);
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t s = 0; s < mc_samples; ++s) {
      const double e0 = rng.normal(), e1 = rng.normal();
      const double y0 = joint.mean0[i] + a * e0;
      const double y1 = joint.mean1[i] + b * e0 + c * e1;
      const double diff = y1 - y0;
      sum += diff;
      sum2 += diff * diff;
    }
    const double ms = sum / static_cast<double>(mc_samples);
    est.var[i] = std::max(0.0, sum2 / static_cast<double>(mc_samples) - ms * ms);
  }
  return est;
}

DeferralResult deferral_curve(const std::vector<double>& predictions,
                              const std::vector<double>& targets,
                              const std::vector<double>& uncertainties,
                              double rate, DeferralPolicy policy,
                              std::uint64_t seed) {
  const std::size_t n = predictions.size();
  if (targets.size() != n || uncertainties.size() != n || n == 0)
    throw ArgumentError("deferral_curve: length mismatch or empty input");
  if (rate < 0.0 || rate >= 1.0)
    throw ArgumentError("deferral_curve: rate must be in [0, 1)");

  const std::size_t deferred =
      static_cast<std::size_t>(std::ceil(rate * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (policy == DeferralPolicy::Uncertainty) {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       if (uncertainties[a] != uncertainties[b])
                         return uncertainties[a] > uncertainties[b];
                       return a < b;
                     });
  } else {
    Rng rng(seed);
    rng.shuffle(order);
  }

  std::vector<double> kept_pred, kept_target;
  for (std::size_t i = deferred; i < n; ++i) {
    kept_pred.push_back(predictions[order[i]]);
    kept_target.push_back(targets[order[i]]);
  }

  DeferralResult res;
  res.rate = rate;
  res.policy = policy;
  res.seed = seed;
  res.retained = kept_pred.size();
  res.retained_rmse = kept_pred.empty() ? 0.0 : rmse(kept_pred, kept_target);
  return res;
}

namespace {

double nearest_row_distance(const double* q, const Tensor& rows) {
  const std::size_t n = rows.rows(), d = rows.cols();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    best = std::min(best, simd::active().sqdist(q, rows.data() + i * d, d));
  }
  return std::sqrt(std::max(0.0, best));
}

}  // namespace

CollapseMetrics collapse_metrics(const Tensor& features_in,
                                 const Tensor& features_ood,
                                 const Tensor& inputs_in,
                                 const Tensor& inputs_ood,
                                 std::size_t star_index) {
  const std::size_t n_ood = features_ood.rows();
  if (features_in.rows() == 0 || n_ood == 0)
    throw ArgumentError("collapse_metrics: empty feature sets");
  if (inputs_ood.rows() != n_ood)
    throw ShapeError("collapse_metrics: ood rows mismatch");

  std::vector<double> ratios;
  ratios.reserve(n_ood);
  for (std::size_t i = 0; i < n_ood; ++i) {
    const double df = nearest_row_distance(
        features_ood.data() + i * features_ood.cols(), features_in);
    const double dx = nearest_row_distance(
        inputs_ood.data() + i * inputs_ood.cols(), inputs_in);
    ratios.push_back(dx > 0.0 ? df / dx : 0.0);
  }
  auto mid = ratios.begin() + ratios.size() / 2;
  std::nth_element(ratios.begin(), mid, ratios.end());
  double median = *mid;
  if (ratios.size() % 2 == 0) {
    const double lower = *std::max_element(ratios.begin(), mid);
    median = 0.5 * (median + lower);
  }

  CollapseMetrics out;
  out.contraction_ratio = median;

  // In-distribution feature scatter: rms distance from the centroid.
  const std::size_t n_in = features_in.rows(), j = features_in.cols();
  std::vector<double> centroid(j, 0.0);
  for (std::size_t i = 0; i < n_in; ++i)
    for (std::size_t c = 0; c < j; ++c)
      centroid[c] += features_in.at(i, c);
  for (double& c : centroid) c /= static_cast<double>(n_in);
  double scatter2 = 0.0;
  for (std::size_t i = 0; i < n_in; ++i)
    scatter2 += simd::active().sqdist(features_in.data() + i * j,
                                      centroid.data(), j);
  const double scatter = std::sqrt(scatter2 / static_cast<double>(n_in));

  if (star_index != SIZE_MAX) {
    if (star_index >= n_ood)
      throw ArgumentError("collapse_metrics: star index out of range");
    out.star_feature_distance = nearest_row_distance(
        features_ood.data() + star_index * j, features_in);
    out.star_feature_distance_normalized =
        scatter > 0.0 ? out.star_feature_distance / scatter
                      : std::numeric_limits<double>::infinity();
  } else {
    out.star_feature_distance = std::numeric_limits<double>::quiet_NaN();
    out.star_feature_distance_normalized =
        std::numeric_limits<double>::quiet_NaN();
  }

  // Unit-scale RBF gram log-determinant on pooled features, with the mean
  // pairwise distance as length scale; degenerate geometry reports -inf.
  const std::size_t total = n_in + n_ood;
  std::vector<double> pooled(total * j);
  std::copy_n(features_in.data(), n_in * j, pooled.data());
  std::copy_n(features_ood.data(), n_ood * j, pooled.data() + n_in * j);
  double mean_dist = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < total; ++a)
    for (std::size_t b = a + 1; b < total; ++b) {
      mean_dist += std::sqrt(std::max(
          0.0, simd::active().sqdist(pooled.data() + a * j,
                                     pooled.data() + b * j, j)));
      ++pairs;
    }
  mean_dist /= static_cast<double>(pairs);
  if (mean_dist <= 0.0) {
    out.gram_logdet = -std::numeric_limits<double>::infinity();
    return out;
  }
  std::vector<double> gram(total * total);
  kernel_gram(KernelKind::Rbf, pooled.data(), total, pooled.data(), total, j,
              mean_dist, 1.0, gram.data());
  if (!linalg::cholesky_in_place(gram.data(), total)) {
    out.gram_logdet = -std::numeric_limits<double>::infinity();
    return out;
  }
  out.gram_logdet = linalg::logdet_from_cholesky(gram.data(), total);
  return out;
}

}  // namespace due

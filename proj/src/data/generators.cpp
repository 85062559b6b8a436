#include <algorithm>
#include <cmath>
#include <numeric>

#include "due/core/error.hpp"
#include "due/core/rng.hpp"
#include "due/data/dataset.hpp"

namespace due {

Scaler Scaler::identity(std::size_t dim) {
  Scaler s;
  s.mean.assign(dim, 0.0);
  s.std.assign(dim, 1.0);
  return s;
}

Scaler Scaler::fit(const Tensor& x) {
  const std::size_t n = x.rows(), d = x.cols();
  Scaler s;
  s.mean.assign(d, 0.0);
  s.std.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < d; ++c) s.mean[c] += x.at(i, c);
  for (double& m : s.mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < d; ++c) {
      const double r = x.at(i, c) - s.mean[c];
      s.std[c] += r * r;
    }
  for (double& v : s.std) {
    v = std::sqrt(v / static_cast<double>(n));
    if (v == 0.0) v = 1.0;
  }
  return s;
}

Tensor Scaler::transform(const Tensor& x) const {
  const std::size_t n = x.rows(), d = x.cols();
  if (d != mean.size()) throw ShapeError("scaler: dimension mismatch");
  std::vector<double> out(n * d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < d; ++c)
      out[i * d + c] = (x.at(i, c) - mean[c]) / std[c];
  return Tensor(Shape{n, d}, std::move(out));
}

Tensor Scaler::inverse(const Tensor& x) const {
  const std::size_t n = x.rows(), d = x.cols();
  if (d != mean.size()) throw ShapeError("scaler: dimension mismatch");
  std::vector<double> out(n * d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < d; ++c)
      out[i * d + c] = x.at(i, c) * std[c] + mean[c];
  return Tensor(Shape{n, d}, std::move(out));
}

Tensor Dataset::x_rows(const std::vector<std::size_t>& idx) const {
  const std::size_t d = dim();
  std::vector<double> out(idx.size() * d);
  for (std::size_t i = 0; i < idx.size(); ++i)
    std::copy_n(x.data() + idx[i] * d, d, out.data() + i * d);
  return Tensor(Shape{idx.size(), d}, std::move(out));
}

Tensor Dataset::y_rows(const std::vector<std::size_t>& idx) const {
  const std::size_t t = outputs();
  std::vector<double> out(idx.size() * t);
  for (std::size_t i = 0; i < idx.size(); ++i)
    std::copy_n(y.data() + idx[i] * t, t, out.data() + i * t);
  return Tensor(Shape{idx.size(), t}, std::move(out));
}

std::vector<double> Dataset::treatment_rows(
    const std::vector<std::size_t>& idx) const {
  if (treatment.empty()) return {};
  std::vector<double> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = treatment[idx[i]];
  return out;
}

namespace {

std::vector<std::size_t> iota_idx(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

}  // namespace

Dataset gen_two_moons(std::size_t n, double noise_std, std::uint64_t seed) {
  if (n < 2) throw ArgumentError("gen_two_moons: n must be >= 2");
  Rng rng = Rng(seed).substream("two_moons");
  const std::size_t n0 = (n + 1) / 2, n1 = n / 2;  // class counts differ <= 1

  std::vector<double> xs(n * 2), ys(n * 2, 0.0);
  std::size_t row = 0;
  for (std::size_t i = 0; i < n0; ++i, ++row) {
    const double t = n0 > 1 ? M_PI * static_cast<double>(i) /
                                  static_cast<double>(n0 - 1)
                            : 0.0;
    xs[row * 2 + 0] = std::cos(t) + noise_std * rng.normal();
    xs[row * 2 + 1] = std::sin(t) + noise_std * rng.normal();
    ys[row * 2 + 0] = 1.0;
  }
  for (std::size_t i = 0; i < n1; ++i, ++row) {
    const double t = n1 > 1 ? M_PI * static_cast<double>(i) /
                                  static_cast<double>(n1 - 1)
                            : 0.0;
    xs[row * 2 + 0] = 1.0 - std::cos(t) + noise_std * rng.normal();
    xs[row * 2 + 1] = 0.5 - std::sin(t) + noise_std * rng.normal();
    ys[row * 2 + 1] = 1.0;
  }

  Dataset ds;
  Tensor raw(Shape{n, 2}, std::move(xs));
  ds.scaler = Scaler::fit(raw);
  ds.x = ds.scaler.transform(raw);
  ds.y = Tensor(Shape{n, 2}, std::move(ys));
  ds.train_idx = iota_idx(n);
  ds.provenance = {"two_moons",
                   {{"n", static_cast<double>(n)}, {"noise_std", noise_std}},
                   seed};
  return ds;
}

Dataset gen_gap_regression(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw ArgumentError("gen_gap_regression: n must be >= 2");
  Rng rng = Rng(seed).substream("gap_regression");
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double side = rng.uniform() < 0.5 ? -1.0 : 1.0;
    const double x = side * rng.uniform(3.0, 6.0);
    xs[i] = x;
    ys[i] = std::sin(2.0 * x) + 0.1 * rng.normal();
  }
  Dataset ds;
  Tensor raw(Shape{n, 1}, std::move(xs));
  ds.scaler = Scaler::fit(raw);
  ds.x = ds.scaler.transform(raw);
  ds.y = Tensor(Shape{n, 1}, std::move(ys));
  ds.train_idx = iota_idx(n);
  ds.provenance = {"gap_regression", {{"n", static_cast<double>(n)}}, seed};
  return ds;
}

BlobsGrid gen_blobs_grid(std::uint64_t seed) {
  constexpr std::size_t kPerClass = 100;
  constexpr double kStd = 0.5;
  constexpr double kMeans[2][2] = {{-2.0, 0.0}, {2.0, 0.0}};
  constexpr std::size_t kGridRes = 25;
  constexpr double kBox = 6.0;
  constexpr double kStar[2] = {4.5, 4.5};

  Rng rng = Rng(seed).substream("blobs_grid");
  const std::size_t n = 2 * kPerClass;
  std::vector<double> xs(n * 2), ys(n * 2, 0.0);
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t i = 0; i < kPerClass; ++i) {
      const std::size_t row = c * kPerClass + i;
      xs[row * 2 + 0] = kMeans[c][0] + kStd * rng.normal();
      xs[row * 2 + 1] = kMeans[c][1] + kStd * rng.normal();
      ys[row * 2 + c] = 1.0;
    }
  }

  BlobsGrid out;
  Tensor raw(Shape{n, 2}, std::move(xs));
  out.data.scaler = Scaler::fit(raw);
  out.data.x = out.data.scaler.transform(raw);
  out.data.y = Tensor(Shape{n, 2}, std::move(ys));
  out.data.train_idx = iota_idx(n);
  out.data.provenance = {"blobs_grid",
                         {{"per_class", static_cast<double>(kPerClass)},
                          {"blob_std", kStd},
                          {"grid_res", static_cast<double>(kGridRes)},
                          {"box", kBox}},
                         seed};

  // Lexicographic grid over the box, with mixture log-density per point.
  std::vector<double> grid(kGridRes * kGridRes * 2);
  out.grid_logdensity.resize(kGridRes * kGridRes);
  const double norm = -std::log(2.0 * M_PI * kStd * kStd);
  for (std::size_t i = 0; i < kGridRes; ++i) {
    const double gx = -kBox + 2.0 * kBox * static_cast<double>(i) /
                                  static_cast<double>(kGridRes - 1);
    for (std::size_t j = 0; j < kGridRes; ++j) {
      const double gy = -kBox + 2.0 * kBox * static_cast<double>(j) /
                                    static_cast<double>(kGridRes - 1);
      const std::size_t g = i * kGridRes + j;
      grid[g * 2 + 0] = gx;
      grid[g * 2 + 1] = gy;
      double dens = 0.0;
      for (const auto& m : kMeans) {
        const double d2 = (gx - m[0]) * (gx - m[0]) + (gy - m[1]) * (gy - m[1]);
        dens += 0.5 * std::exp(norm - d2 / (2.0 * kStd * kStd));
      }
      out.grid_logdensity[g] = std::log(dens);
    }
  }
  out.grid_raw = Tensor(Shape{kGridRes * kGridRes, 2}, std::move(grid));
  out.grid = out.data.scaler.transform(out.grid_raw);
  out.star_raw = Tensor(Shape{1, 2}, {kStar[0], kStar[1]});
  out.star = out.data.scaler.transform(out.star_raw);
  return out;
}

Dataset gen_synthetic_cate(std::size_t n, std::uint64_t seed,
                           double tau_scale) {
  if (n < 10) throw ArgumentError("gen_synthetic_cate: n must be >= 10");
  constexpr std::size_t kDim = 8;
  constexpr double kNoise = 0.5;
  Rng rng = Rng(seed).substream("synthetic_cate");

  std::vector<double> xs(n * kDim), ys(n);
  Dataset ds;
  ds.treatment.resize(n);
  ds.true_cate.resize(n);
  ds.propensity.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < kDim; ++c) xs[i * kDim + c] = rng.normal();
    const double* x = xs.data() + i * kDim;
    const double pi = 1.0 / (1.0 + std::exp(-3.0 * x[0]));
    const double t = rng.uniform() < pi ? 1.0 : 0.0;
    const double mu0 =
        x[0] + 0.5 * x[1] * x[1] + std::sin(x[2]) + 0.5 * x[3] * x[4];
    const double tau = tau_scale * (1.0 + x[0] + 0.5 * x[1]);
    ds.propensity[i] = pi;
    ds.treatment[i] = t;
    ds.true_cate[i] = tau;
    ys[i] = mu0 + t * tau + kNoise * rng.normal();
  }

  Tensor raw(Shape{n, kDim}, std::move(xs));
  ds.scaler = Scaler::fit(raw);
  ds.x = ds.scaler.transform(raw);
  ds.y = Tensor(Shape{n, 1}, std::move(ys));

  // 63 / 27 / 10 split on a seeded shuffle.
  auto order = iota_idx(n);
  Rng split_rng = Rng(seed).substream("cate_split");
  split_rng.shuffle(order);
  const std::size_t n_train = static_cast<std::size_t>(0.63 * n);
  const std::size_t n_val = static_cast<std::size_t>(0.27 * n);
  ds.train_idx.assign(order.begin(), order.begin() + n_train);
  ds.val_idx.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  ds.test_idx.assign(order.begin() + n_train + n_val, order.end());
  ds.provenance = {"synthetic_cate",
                   {{"n", static_cast<double>(n)},
                    {"tau_scale", tau_scale},
                    {"noise_std", kNoise}},
                   seed};
  return ds;
}

}  // namespace due

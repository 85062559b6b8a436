#include "due/cli/check.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "due/core/linalg.hpp"
#include "due/core/ops.hpp"
#include "due/core/rng.hpp"
#include "due/features/extractor.hpp"
#include "due/gp/exact.hpp"
#include "due/gp/svgp.hpp"
#include "due/train/optimizer.hpp"

namespace due {
namespace {

Tensor random_tensor(Shape shape, Rng& rng, double scale = 1.0,
                     double offset = 0.0) {
  std::vector<double> v(shape_size(shape));
  for (double& x : v) x = offset + scale * rng.normal();
  return Tensor(std::move(shape), std::move(v), true);
}

struct GradCase {
  std::string name;
  std::vector<Tensor> leaves;
  std::function<Tensor()> build;
};

// Central finite differences (step 1e-5) against the backward pass.
double max_grad_rel_err(GradCase& c, bool corrupt) {
  Tensor out = c.build();
  for (auto& leaf : c.leaves) leaf.zero_grad();
  backward(out);

  std::vector<std::vector<double>> analytic;
  for (auto& leaf : c.leaves) {
    analytic.emplace_back(leaf.size(), 0.0);
    if (leaf.has_grad()) analytic.back() = leaf.grad();
  }
  if (corrupt && !analytic.empty() && !analytic[0].empty())
    analytic[0][0] += 0.01;

  constexpr double kStep = 1e-5;
  double worst = 0.0;
  for (std::size_t li = 0; li < c.leaves.size(); ++li) {
    Tensor& leaf = c.leaves[li];
    for (std::size_t i = 0; i < leaf.size(); ++i) {
      const double saved = leaf.data()[i];
      leaf.data()[i] = saved + kStep;
      const double up = c.build().item();
      leaf.data()[i] = saved - kStep;
      const double down = c.build().item();
      leaf.data()[i] = saved;
      const double fd = (up - down) / (2.0 * kStep);
      const double a = analytic[li][i];
      const double err =
          std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-3});
      worst = std::max(worst, err);
    }
  }
  return worst;
}

std::vector<GradCase> gradient_cases(std::uint64_t seed) {
  std::vector<GradCase> cases;
  Rng rng(seed);

  auto unary = [&](const std::string& name, auto fn, double scale,
                   double offset) {
    Tensor a = random_tensor({3, 4}, rng, scale, offset);
    cases.push_back({name, {a}, [=] { return sum(fn(a)); }});
  };
  unary("exp", [](const Tensor& t) { return exp(t); }, 0.5, 0.0);
  unary("log", [](const Tensor& t) { return log(t); }, 0.3, 2.0);
  unary("sqrt", [](const Tensor& t) { return sqrt(t); }, 0.3, 2.0);
  unary("neg", [](const Tensor& t) { return neg(t); }, 1.0, 0.0);
  unary("relu", [](const Tensor& t) { return relu(t); }, 1.0, 0.3);
  unary("elu", [](const Tensor& t) { return elu(t); }, 1.0, 0.3);
  unary("softplus", [](const Tensor& t) { return softplus(t); }, 1.0, 0.0);
  unary("clamp_min", [](const Tensor& t) { return clamp_min(t, 0.5); }, 1.0,
        1.5);
  unary("mean", [](const Tensor& t) { return mul_scalar(mean(t), 3.0); }, 1.0,
        0.0);

  {
    Tensor a = random_tensor({3, 4}, rng);
    Tensor b = random_tensor({3, 4}, rng, 0.5, 1.5);
    Tensor s = random_tensor({1}, rng, 0.2, 2.0);
    cases.push_back({"add", {a, b}, [=] { return sum(add(a, b)); }});
    cases.push_back({"sub", {a, b}, [=] { return sum(mul(sub(a, b), b)); }});
    cases.push_back({"mul", {a, b}, [=] { return sum(mul(a, b)); }});
    cases.push_back({"div", {a, b}, [=] { return sum(div(a, b)); }});
    cases.push_back(
        {"scalar_broadcast", {a, s}, [=] { return sum(div(mul(a, s), s)); }});
  }
  {
    Tensor x = random_tensor({4, 3}, rng);
    Tensor v = random_tensor({3}, rng);
    cases.push_back(
        {"add_rowvec", {x, v}, [=] { return sum(mul(add_rowvec(x, v), x)); }});
    cases.push_back(
        {"sub_rowvec", {x, v}, [=] { return sum(mul(sub_rowvec(x, v), x)); }});
    cases.push_back(
        {"mul_rowvec", {x, v}, [=] { return sum(mul_rowvec(x, v)); }});
    cases.push_back({"col_mean", {x}, [=] { return sum(mul(col_mean(x), v.detached())); }});
  }
  {
    Tensor a = random_tensor({3, 4}, rng);
    Tensor b = random_tensor({4, 2}, rng);
    cases.push_back({"matmul", {a, b}, [=] {
                       return sum(mul(matmul(a, b), matmul(a, b)));
                     }});
    cases.push_back({"transpose", {a}, [=] {
                       return sum(mul(transpose(a), transpose(a)));
                     }});
  }
  {
    Tensor a = random_tensor({4, 3}, rng);
    Tensor b = random_tensor({5, 3}, rng);
    cases.push_back({"pairwise_sqdist", {a, b}, [=] {
                       return sum(exp(neg(pairwise_sqdist(a, b))));
                     }});
    cases.push_back(
        {"colwise_sqnorm", {a}, [=] { return sum(log(colwise_sqnorm(a))); }});
  }
  {
    Tensor a = random_tensor({4, 4}, rng);
    cases.push_back({"diag_part", {a}, [=] { return sum(diag_part(a)); }});
    cases.push_back({"lower_tri_posdiag", {a}, [=] {
                       return sum(mul(lower_tri_posdiag(a),
                                      lower_tri_posdiag(a)));
                     }});
  }
  {
    Tensor m = random_tensor({4, 4}, rng, 0.5);
    Tensor eye = Tensor::zeros({4, 4});
    for (std::size_t i = 0; i < 4; ++i) eye.data()[i * 4 + i] = 2.0;
    auto spd = [=] { return add(matmul(m, transpose(m)), eye); };
    cases.push_back({"cholesky", {m}, [=] {
                       return sum(log(diag_part(cholesky(spd()))));
                     }});
    Tensor b = random_tensor({4, 2}, rng);
    cases.push_back({"triangular_solve_lower", {m, b}, [=] {
                       Tensor x = triangular_solve(cholesky(spd()), b, true);
                       return sum(mul(x, x));
                     }});
    cases.push_back({"triangular_solve_upper", {m, b}, [=] {
                       Tensor x = triangular_solve(
                           transpose(cholesky(spd())), b, false);
                       return sum(mul(x, x));
                     }});
  }
  {
    Tensor d2 = random_tensor({3, 3}, rng, 0.4, 1.0);
    Tensor l = random_tensor({1}, rng, 0.1, 1.2);
    Tensor s = random_tensor({1}, rng, 0.1, 1.5);
    cases.push_back({"rbf_kernel", {d2, l, s}, [=] {
                       return sum(kernel_from_sqdist(KernelKind::Rbf, d2, l, s));
                     }});
    cases.push_back({"matern32_kernel", {d2, l, s}, [=] {
                       return sum(kernel_from_sqdist(KernelKind::Matern32, d2,
                                                     l, s));
                     }});
  }
  {
    Tensor f = random_tensor({4, 3}, rng);
    std::vector<std::size_t> idx{0, 2, 1, 2};
    cases.push_back(
        {"logsumexp_rows", {f}, [=] { return sum(logsumexp_rows(f)); }});
    cases.push_back(
        {"take_per_row", {f}, [=] { return sum(take_per_row(f, idx)); }});
  }
  {
    Tensor a = random_tensor({3, 2}, rng);
    Tensor b = random_tensor({3, 1}, rng);
    cases.push_back({"hstack", {a, b}, [=] {
                       Tensor h = hstack({a, b});
                       return sum(mul(h, h));
                     }});
    cases.push_back({"reshape", {a}, [=] {
                       return sum(mul(reshape(a, {2, 3}), reshape(a, {2, 3})));
                     }});
  }

  // Full bound on a 5-point toy, both likelihoods.
  {
    const std::size_t n = 5, m = 3, j = 2;
    Tensor feats = random_tensor({n, j}, rng);
    GpState gp = GpState::create(KernelKind::Rbf, m, j, 1, true, 0.05);
    Rng zr(seed + 17);
    for (std::size_t i = 0; i < gp.inducing.size(); ++i)
      gp.inducing.data()[i] = zr.normal();
    for (std::size_t i = 0; i < m * m; ++i)
      gp.heads[0].cov_factor_raw.data()[i] = 0.2 * zr.normal();
    for (std::size_t i = 0; i < m; ++i)
      gp.heads[0].whitened_mean.data()[i] = 0.5 * zr.normal();
    std::vector<double> yv(n);
    for (double& v : yv) v = zr.normal();
    Tensor y(Shape{n, 1}, yv);
    LikelihoodSpec lik;
    auto leaves = gp.parameters();
    leaves.push_back(feats);
    cases.push_back({"elbo_gaussian", leaves, [=] {
                       return elbo(gp, lik, feats, y, n);
                     }});
  }
  {
    const std::size_t n = 5, m = 3, j = 2, t = 3;
    Tensor feats = random_tensor({n, j}, rng);
    GpState gp = GpState::create(KernelKind::Rbf, m, j, t, false);
    Rng zr(seed + 29);
    for (std::size_t i = 0; i < gp.inducing.size(); ++i)
      gp.inducing.data()[i] = zr.normal();
    std::vector<double> yv(n * t, 0.0);
    for (std::size_t i = 0; i < n; ++i) yv[i * t + i % t] = 1.0;
    Tensor y(Shape{n, t}, yv);
    LikelihoodSpec lik;
    lik.kind = LikelihoodKind::Softmax;
    lik.num_outputs = t;
    lik.mc_train = 4;
    auto leaves = gp.parameters();
    leaves.push_back(feats);
    // Fixed MC stream per evaluation keeps the estimator differentiable.
    cases.push_back({"elbo_softmax", leaves, [=] {
                       Rng mc(12345);
                       return elbo(gp, lik, feats, y, n, &mc);
                     }});
  }
  return cases;
}

CheckReport::Item oracle_equivalence_check() {
  // Tight configuration: as many inducing inputs as data points, placed on
  // the data, optimizing only the variational parameters.
  const std::size_t n = 12;
  Rng rng(99);
  std::vector<double> fv(n), yv(n);
  for (std::size_t i = 0; i < n; ++i) {
    fv[i] = rng.uniform(-2.0, 2.0);
    yv[i] = std::sin(1.5 * fv[i]) + 0.05 * rng.normal();
  }
  Tensor feats(Shape{n, 1}, fv);
  Tensor y(Shape{n, 1}, yv);

  GpState gp = GpState::create(KernelKind::Rbf, n, 1, 1, true, 0.01);
  std::copy_n(feats.data(), n, gp.inducing.data());
  gp.inducing.set_requires_grad(false);  // pinned to the training inputs

  LikelihoodSpec lik;
  std::vector<Tensor> vparams{gp.heads[0].whitened_mean,
                              gp.heads[0].cov_factor_raw};
  OptimizerConfig oc;
  oc.lr = 0.02;
  Optimizer opt(oc, vparams);
  for (std::size_t it = 0; it < 2000; ++it) {
    Tensor loss = neg(elbo(gp, lik, feats, y, n));
    opt.zero_grad();
    backward(loss);
    opt.step();
  }

  const double bound = elbo(gp, lik, feats, y, n).item();
  PlainKernelSpec spec;
  spec.kind = KernelKind::Rbf;
  spec.lengthscale = std::exp(gp.heads[0].log_lengthscale.item());
  spec.outputscale = std::exp(gp.heads[0].log_outputscale.item());
  spec.mean = gp.heads[0].mean_const.item();
  const double exact =
      exact_gp_log_marginal(spec, feats, yv, gp.noise_var()).total;

  CheckReport::Item item;
  item.name = "oracle/elbo_vs_exact_marginal";
  item.measured = std::abs(bound - exact);
  item.tolerance = 1e-2;
  item.pass = item.measured < item.tolerance;
  return item;
}

CheckReport::Item lipschitz_check() {
  FeatureExtractorConfig cfg;
  cfg.input_dim = 2;
  cfg.feature_dim = 16;
  cfg.depth = 3;
  cfg.spectral_coeff = 0.95;
  FeatureExtractor fx(cfg, Rng(7));
  // Inflate the weights, then normalize back inside the constraint.
  for (auto& block : fx.blocks())
    for (std::size_t i = 0; i < block.weight.size(); ++i)
      block.weight.data()[i] *= 4.0;
  for (int it = 0; it < 20; ++it) fx.spectral_normalize();

  auto report = fx.lipschitz_audit();
  double worst = 0.0;
  for (std::size_t b = 1; b < report.layers.size(); ++b)
    worst = std::max(worst, report.layers[b].sigma);

  CheckReport::Item item;
  item.name = "lipschitz/audit_after_normalize";
  item.measured = worst;
  item.tolerance = cfg.spectral_coeff * (1.0 + 1e-3);
  item.pass = worst <= item.tolerance;
  return item;
}

CheckReport::Item linalg_check() {
  Rng rng(5);
  const std::size_t n = 8;
  std::vector<double> m(n * n);
  for (double& v : m) v = rng.normal();
  std::vector<double> k(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = i == j ? 2.0 : 0.0;
      for (std::size_t p = 0; p < n; ++p) acc += m[i * n + p] * m[j * n + p];
      k[i * n + j] = acc;
    }
  std::vector<double> l(n * n);
  const double jitter = linalg::cholesky_jittered(k.data(), n, l.data());
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < n; ++p) acc += l[i * n + p] * l[j * n + p];
      const double target = k[i * n + j] + (i == j ? jitter : 0.0);
      worst = std::max(worst, std::abs(acc - target));
    }

  CheckReport::Item item;
  item.name = "linalg/cholesky_reconstruction";
  item.measured = worst;
  item.tolerance = 1e-9;
  item.pass = worst < item.tolerance;
  return item;
}

}  // namespace

bool CheckReport::all_pass() const {
  for (const auto& item : items)
    if (!item.pass) return false;
  return true;
}

std::string CheckReport::render() const {
  std::ostringstream os;
  for (const auto& item : items) {
    os << (item.pass ? "PASS " : "FAIL ") << item.name << " (measured "
       << item.measured << ", tolerance " << item.tolerance << ")\n";
  }
  return os.str();
}

CheckReport run_self_checks(const std::string& corrupt_op) {
  CheckReport report;
  for (auto& c : gradient_cases(2024)) {
    CheckReport::Item item;
    item.name = "grad/" + c.name;
    item.tolerance = 1e-4;
    item.measured = max_grad_rel_err(c, c.name == corrupt_op);
    item.pass = item.measured < item.tolerance;
    report.items.push_back(item);
  }
  report.items.push_back(linalg_check());
  report.items.push_back(lipschitz_check());
  report.items.push_back(oracle_equivalence_check());
  return report;
}

}  // namespace due

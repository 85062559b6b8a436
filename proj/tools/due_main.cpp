#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "due/cli/commands.hpp"
#include "due/core/error.hpp"
#include "due/io/manifest.hpp"

int main(int argc, char** argv) {
  CLI::App app{"deep-kernel inducing-point GP with a constrained feature "
               "extractor: training, evaluation, demos, self-checks"};
  app.set_version_flag("--version", due::kToolVersion);
  app.require_subcommand(1);

  std::string config_path, out_override;
  auto* train = app.add_subcommand("train", "train a model from a config file");
  train->add_option("config", config_path, "path to key = value config")
      ->required();
  train->add_option("--out", out_override, "override the output directory");

  due::EvalOptions eval_opts;
  auto* eval = app.add_subcommand("eval", "predict with a saved model");
  eval->add_option("--model", eval_opts.model_path, "model file")->required();
  eval->add_option("--csv", eval_opts.csv_path, "input rows (csv)");
  eval->add_option("--grid", eval_opts.grid_spec,
                   "'min,max,res' or 'xmin,xmax,ymin,ymax,res'");
  eval->add_option("--target", eval_opts.target_column,
                   "target column to exclude from csv features");
  eval->add_option("--treatment", eval_opts.treatment_column,
                   "treatment column name in the csv");
  eval->add_option("--out", eval_opts.out_path, "output csv path");
  eval->add_option("--seed", eval_opts.seed, "Monte Carlo seed");

  std::string demo_name, demo_out;
  std::uint64_t demo_seed = 0;
  std::size_t demo_trials = 100;
  auto* demo = app.add_subcommand("demo", "run a figure/table protocol");
  demo->add_option("name", demo_name, "two-moons | gap-1d | collapse | "
                                      "rff-compare | cate-deferral | "
                                      "inducing-ablation")
      ->required();
  demo->add_option("--out", demo_out, "output directory");
  demo->add_option("--seed", demo_seed, "root seed");
  demo->add_option("--trials", demo_trials, "cate-deferral trial count");

  std::string corrupt_op;
  auto* check = app.add_subcommand("check", "run built-in self tests");
  check->add_option("--corrupt-grad", corrupt_op,
                    "perturb the named op's gradient (negative control)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*train) return due::cmd_train(config_path, out_override);
    if (*eval) return due::cmd_eval(eval_opts);
    if (*demo) return due::cmd_demo(demo_name, demo_out, demo_seed, demo_trials);
    if (*check) return due::cmd_check(corrupt_op);
  } catch (const due::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const due::ArgumentError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

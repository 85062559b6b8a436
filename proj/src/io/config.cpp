#include "due/io/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "due/core/error.hpp"

namespace due {
namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  std::size_t b = s.find_last_not_of(" \t\r");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

const std::set<std::string> kKnownKeys = {
    "data.generator",     "data.n",
    "data.noise_std",     "data.tau_scale",
    "data.seed",          "data.csv_path",
    "data.csv_target",    "data.csv_treatment",
    "data.csv_features",  "model.task",
    "model.kernel",       "model.num_outputs",
    "model.num_inducing", "model.feature_dim",
    "model.depth",        "model.activation",
    "model.dropout_rate", "model.use_batchnorm",
    "model.spectral_norm","model.spectral_coeff",
    "model.power_iterations",
    "model.residual",     "model.append_treatment",
    "model.init_noise_var",
    "model.mc_train",     "model.mc_predict",
    "model.input_dim",
    "train.optimizer",    "train.lr",
    "train.momentum",     "train.epochs",
    "train.batch_size",   "train.seed",
    "train.init_subset",  "train.select_on_val_nll",
    "output.dir",
};

class Reader {
public:
  explicit Reader(const RawConfig& raw) : raw_(raw) {}

  std::string str(const std::string& key, const std::string& fallback) const {
    auto it = raw_.values.find(key);
    return it == raw_.values.end() ? fallback : it->second;
  }

  double num(const std::string& key, double fallback) const {
    auto it = raw_.values.find(key);
    if (it == raw_.values.end()) return fallback;
    try {
      std::size_t pos = 0;
      const double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config: bad numeric value for '" + key + "': '" +
                            it->second + "'",
                        key);
    }
  }

  std::size_t count(const std::string& key, std::size_t fallback) const {
    const double v = num(key, static_cast<double>(fallback));
    if (v < 0.0 || v != static_cast<double>(static_cast<std::size_t>(v)))
      throw ConfigError("config: '" + key + "' must be a non-negative integer",
                        key);
    return static_cast<std::size_t>(v);
  }

  bool flag(const std::string& key, bool fallback) const {
    auto it = raw_.values.find(key);
    if (it == raw_.values.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw ConfigError("config: '" + key + "' must be true or false", key);
  }

private:
  const RawConfig& raw_;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

RawConfig parse_config_text(const std::string& text) {
  RawConfig raw;
  raw.text = text;
  std::istringstream in(text);
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ConfigError("config: malformed section header on line " +
                          std::to_string(lineno));
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: expected key = value on line " +
                        std::to_string(lineno));
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config: empty key on line " + std::to_string(lineno));
    const std::string full = section.empty() ? key : section + "." + key;
    if (kKnownKeys.find(full) == kKnownKeys.end())
      throw ConfigError("config: unknown key '" + full + "'", full);
    raw.values[full] = value;
  }
  return raw;
}

RawConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

ExperimentConfig ExperimentConfig::from_raw(const RawConfig& raw) {
  Reader r(raw);
  ExperimentConfig cfg;

  cfg.data.generator = r.str("data.generator", cfg.data.generator);
  cfg.data.n = r.count("data.n", cfg.data.n);
  cfg.data.noise_std = r.num("data.noise_std", cfg.data.noise_std);
  cfg.data.tau_scale = r.num("data.tau_scale", cfg.data.tau_scale);
  cfg.data.seed = r.count("data.seed", cfg.data.seed);
  cfg.data.csv_path = r.str("data.csv_path", "");
  cfg.data.csv_target = r.str("data.csv_target", cfg.data.csv_target);
  cfg.data.csv_treatment = r.str("data.csv_treatment", "");
  cfg.data.csv_features = split_list(r.str("data.csv_features", ""));

  const std::string task = r.str("model.task", "classification");
  if (task == "classification") {
    cfg.model.likelihood.kind = LikelihoodKind::Softmax;
    cfg.model.likelihood.num_outputs = r.count("model.num_outputs", 2);
  } else if (task == "regression") {
    cfg.model.likelihood.kind = LikelihoodKind::Gaussian;
    cfg.model.likelihood.num_outputs = r.count("model.num_outputs", 1);
  } else {
    throw ConfigError("config: model.task must be classification or regression",
                      "model.task");
  }
  cfg.model.kernel = kernel_from_string(r.str("model.kernel", "rbf"));
  cfg.model.num_inducing = r.count("model.num_inducing", 20);
  cfg.model.fx.input_dim = r.count("model.input_dim", 2);
  cfg.model.fx.feature_dim = r.count("model.feature_dim", 128);
  cfg.model.fx.depth = r.count("model.depth", 4);
  cfg.model.fx.activation =
      activation_from_string(r.str("model.activation", "relu"));
  cfg.model.fx.dropout_rate = r.num("model.dropout_rate", 0.0);
  cfg.model.fx.use_batchnorm = r.flag("model.use_batchnorm", false);
  cfg.model.fx.spectral_norm = r.flag("model.spectral_norm", true);
  cfg.model.fx.spectral_coeff = r.num("model.spectral_coeff", 0.95);
  cfg.model.fx.power_iterations = r.count("model.power_iterations", 1);
  cfg.model.fx.residual = r.flag("model.residual", true);
  cfg.model.append_treatment = r.flag("model.append_treatment", false);
  cfg.model.init_noise_var = r.num("model.init_noise_var", 0.01);
  cfg.model.likelihood.mc_train = r.count("model.mc_train", 8);
  cfg.model.likelihood.mc_predict = r.count("model.mc_predict", 32);

  cfg.train.opt.kind = optimizer_from_string(r.str("train.optimizer", "adam"));
  cfg.train.opt.lr = r.num("train.lr", 0.01);
  cfg.train.opt.momentum = r.num("train.momentum", 0.9);
  cfg.train.epochs = r.count("train.epochs", 100);
  cfg.train.batch_size = r.count("train.batch_size", 0);
  cfg.train.seed = r.count("train.seed", 0);
  cfg.train.init_subset = r.count("train.init_subset", 1000);
  cfg.train.select_on_val_nll = r.flag("train.select_on_val_nll", false);

  cfg.out_dir = r.str("output.dir", "out");
  if (cfg.train.opt.lr <= 0.0)
    throw ConfigError("config: train.lr must be positive", "train.lr");
  if (cfg.train.epochs == 0)
    throw ConfigError("config: train.epochs must be >= 1", "train.epochs");
  if (cfg.model.num_inducing == 0)
    throw ConfigError("config: model.num_inducing must be >= 1",
                      "model.num_inducing");
  return cfg;
}

namespace {

void put(std::ostringstream& os, const std::string& key, const std::string& v) {
  os << key << " = " << v << "\n";
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string ExperimentConfig::echo() const {
  std::ostringstream os;
  os << "[data]\n";
  put(os, "generator", data.generator);
  put(os, "n", std::to_string(data.n));
  put(os, "noise_std", fmt(data.noise_std));
  put(os, "tau_scale", fmt(data.tau_scale));
  put(os, "seed", std::to_string(data.seed));
  if (!data.csv_path.empty()) {
    put(os, "csv_path", data.csv_path);
    put(os, "csv_target", data.csv_target);
    if (!data.csv_treatment.empty())
      put(os, "csv_treatment", data.csv_treatment);
  }
  os << "\n" << model_card(model) << "\n[train]\n";
  put(os, "optimizer", to_string(train.opt.kind));
  put(os, "lr", fmt(train.opt.lr));
  put(os, "momentum", fmt(train.opt.momentum));
  put(os, "epochs", std::to_string(train.epochs));
  put(os, "batch_size", std::to_string(train.batch_size));
  put(os, "seed", std::to_string(train.seed));
  put(os, "init_subset", std::to_string(train.init_subset));
  put(os, "select_on_val_nll", train.select_on_val_nll ? "true" : "false");
  os << "\n[output]\n";
  put(os, "dir", out_dir);
  return os.str();
}

Dataset build_dataset(const DataConfig& cfg) {
  if (cfg.generator == "two_moons")
    return gen_two_moons(cfg.n, cfg.noise_std, cfg.seed);
  if (cfg.generator == "gap_1d") return gen_gap_regression(cfg.n, cfg.seed);
  if (cfg.generator == "blobs_grid") return gen_blobs_grid(cfg.seed).data;
  if (cfg.generator == "synthetic_cate")
    return gen_synthetic_cate(cfg.n, cfg.seed, cfg.tau_scale);
  if (cfg.generator == "csv") {
    CsvSchema schema;
    schema.feature_columns = cfg.csv_features;
    schema.target_column = cfg.csv_target;
    schema.treatment_column = cfg.csv_treatment;
    return load_csv(cfg.csv_path, schema);
  }
  throw ConfigError("config: unknown data.generator '" + cfg.generator + "'",
                    "data.generator");
}

std::string model_card(const ModelConfig& cfg) {
  std::ostringstream os;
  os << "[model]\n";
  put(os, "task",
      cfg.likelihood.kind == LikelihoodKind::Softmax ? "classification"
                                                     : "regression");
  put(os, "num_outputs", std::to_string(cfg.likelihood.num_outputs));
  put(os, "kernel", to_string(cfg.kernel));
  put(os, "num_inducing", std::to_string(cfg.num_inducing));
  put(os, "input_dim", std::to_string(cfg.fx.input_dim));
  put(os, "feature_dim", std::to_string(cfg.fx.feature_dim));
  put(os, "depth", std::to_string(cfg.fx.depth));
  put(os, "activation", to_string(cfg.fx.activation));
  put(os, "dropout_rate", fmt(cfg.fx.dropout_rate));
  put(os, "use_batchnorm", cfg.fx.use_batchnorm ? "true" : "false");
  put(os, "spectral_norm", cfg.fx.spectral_norm ? "true" : "false");
  put(os, "spectral_coeff", fmt(cfg.fx.spectral_coeff));
  put(os, "power_iterations", std::to_string(cfg.fx.power_iterations));
  put(os, "residual", cfg.fx.residual ? "true" : "false");
  put(os, "append_treatment", cfg.append_treatment ? "true" : "false");
  put(os, "init_noise_var", fmt(cfg.init_noise_var));
  put(os, "mc_train", std::to_string(cfg.likelihood.mc_train));
  put(os, "mc_predict", std::to_string(cfg.likelihood.mc_predict));
  return os.str();
}

ModelConfig parse_model_card(const std::string& text) {
  return ExperimentConfig::from_raw(parse_config_text(text)).model;
}

}  // namespace due

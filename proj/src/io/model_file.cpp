#include "due/io/model_file.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

#include "due/core/error.hpp"
#include "due/io/config.hpp"

static_assert(std::endian::native == std::endian::little,
              "model file writer assumes a little-endian host");

namespace due {
namespace {

constexpr char kMagic[8] = {'D', 'U', 'E', 'M', 'D', 'L', '0', '1'};
constexpr std::uint32_t kVersion = 1;

enum class EntryType : std::uint8_t { F64Array = 0, Text = 1 };

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}
std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

class Writer {
public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw ArgumentError("model file: cannot write " + path);
    out_.write(kMagic, sizeof(kMagic));
    write_u32(out_, kVersion);
    count_pos_ = out_.tellp();
    write_u32(out_, 0);  // patched at the end
  }

  void array(const std::string& name, const double* data, std::size_t n) {
    header(name, EntryType::F64Array);
    write_u64(out_, n);
    out_.write(reinterpret_cast<const char*>(data), n * sizeof(double));
    ++count_;
  }

  void array(const std::string& name, const std::vector<double>& v) {
    array(name, v.data(), v.size());
  }

  void text(const std::string& name, const std::string& value) {
    header(name, EntryType::Text);
    write_u64(out_, value.size());
    out_.write(value.data(), value.size());
    ++count_;
  }

  void finish() {
    out_.seekp(count_pos_);
    write_u32(out_, count_);
    out_.flush();
    if (!out_) throw ArgumentError("model file: write failed");
  }

private:
  void header(const std::string& name, EntryType type) {
    const std::uint8_t t = static_cast<std::uint8_t>(type);
    out_.write(reinterpret_cast<const char*>(&t), 1);
    write_u32(out_, static_cast<std::uint32_t>(name.size()));
    out_.write(name.data(), name.size());
  }

  std::ofstream out_;
  std::ostream::pos_type count_pos_;
  std::uint32_t count_ = 0;
};

struct Loaded {
  std::map<std::string, std::vector<double>> arrays;
  std::map<std::string, std::string> texts;
};

Loaded read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("model file: cannot open " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw ArgumentError("model file: bad magic in " + path);
  const std::uint32_t version = read_u32(in);
  if (version != kVersion)
    throw ArgumentError("model file: unsupported version " +
                        std::to_string(version));
  const std::uint32_t count = read_u32(in);
  Loaded loaded;
  for (std::uint32_t e = 0; e < count; ++e) {
    std::uint8_t type = 0;
    in.read(reinterpret_cast<char*>(&type), 1);
    const std::uint32_t name_len = read_u32(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (type == static_cast<std::uint8_t>(EntryType::F64Array)) {
      const std::uint64_t n = read_u64(in);
      std::vector<double> data(n);
      in.read(reinterpret_cast<char*>(data.data()), n * sizeof(double));
      loaded.arrays[name] = std::move(data);
    } else if (type == static_cast<std::uint8_t>(EntryType::Text)) {
      const std::uint64_t n = read_u64(in);
      std::string value(n, '\0');
      in.read(value.data(), n);
      loaded.texts[name] = std::move(value);
    } else {
      throw ArgumentError("model file: unknown entry type");
    }
    if (!in) throw ArgumentError("model file: truncated entry '" + name + "'");
  }
  return loaded;
}

void fill(Tensor& t, const Loaded& loaded, const std::string& name) {
  auto it = loaded.arrays.find(name);
  if (it == loaded.arrays.end())
    throw ArgumentError("model file: missing array '" + name + "'");
  if (it->second.size() != t.size())
    throw ArgumentError("model file: size mismatch for '" + name + "'");
  std::copy(it->second.begin(), it->second.end(), t.data());
}

std::vector<double> take(const Loaded& loaded, const std::string& name) {
  auto it = loaded.arrays.find(name);
  if (it == loaded.arrays.end())
    throw ArgumentError("model file: missing array '" + name + "'");
  return it->second;
}

}  // namespace

void save_model(const DueModel& model, const std::string& path) {
  Writer w(path);
  w.text("model_card", model_card(model.cfg));
  w.array("scaler.mean", model.scaler.mean);
  w.array("scaler.std", model.scaler.std);

  auto& fx = const_cast<DueModel&>(model).extractor;
  w.array("fx.w_in", fx.input_weight().data(), fx.input_weight().size());
  w.array("fx.b_in", fx.input_bias().data(), fx.input_bias().size());
  std::size_t b = 0;
  for (auto& block : fx.blocks()) {
    const std::string prefix = "fx.block" + std::to_string(b++);
    w.array(prefix + ".w", block.weight.data(), block.weight.size());
    w.array(prefix + ".b", block.bias.data(), block.bias.size());
    w.array(prefix + ".u", block.u);
    if (block.bn.has_value()) {
      w.array(prefix + ".bn.gamma", block.bn->gamma.data(),
              block.bn->gamma.size());
      w.array(prefix + ".bn.beta", block.bn->beta.data(),
              block.bn->beta.size());
      w.array(prefix + ".bn.running_mean", block.bn->running_mean);
      w.array(prefix + ".bn.running_var", block.bn->running_var);
    }
  }

  auto& gp = const_cast<DueModel&>(model).gp;
  w.array("gp.inducing", gp.inducing.data(), gp.inducing.size());
  for (std::size_t t = 0; t < gp.heads.size(); ++t) {
    const std::string prefix = "gp.head" + std::to_string(t);
    auto& head = gp.heads[t];
    w.array(prefix + ".log_lengthscale", head.log_lengthscale.data(), 1);
    w.array(prefix + ".log_outputscale", head.log_outputscale.data(), 1);
    w.array(prefix + ".mean_const", head.mean_const.data(), 1);
    w.array(prefix + ".whitened_mean", head.whitened_mean.data(),
            head.whitened_mean.size());
    w.array(prefix + ".cov_factor_raw", head.cov_factor_raw.data(),
            head.cov_factor_raw.size());
  }
  if (gp.log_noise.defined()) w.array("gp.log_noise", gp.log_noise.data(), 1);
  w.finish();
}

DueModel load_model(const std::string& path) {
  Loaded loaded = read_all(path);
  auto card = loaded.texts.find("model_card");
  if (card == loaded.texts.end())
    throw ArgumentError("model file: missing model card");
  ModelConfig cfg = parse_model_card(card->second);

  DueModel model = DueModel::create(cfg, /*seed=*/0);
  model.scaler.mean = take(loaded, "scaler.mean");
  model.scaler.std = take(loaded, "scaler.std");

  fill(model.extractor.input_weight(), loaded, "fx.w_in");
  fill(model.extractor.input_bias(), loaded, "fx.b_in");
  std::size_t b = 0;
  for (auto& block : model.extractor.blocks()) {
    const std::string prefix = "fx.block" + std::to_string(b++);
    fill(block.weight, loaded, prefix + ".w");
    fill(block.bias, loaded, prefix + ".b");
    block.u = take(loaded, prefix + ".u");
    if (block.bn.has_value()) {
      fill(block.bn->gamma, loaded, prefix + ".bn.gamma");
      fill(block.bn->beta, loaded, prefix + ".bn.beta");
      block.bn->running_mean = take(loaded, prefix + ".bn.running_mean");
      block.bn->running_var = take(loaded, prefix + ".bn.running_var");
    }
  }

  fill(model.gp.inducing, loaded, "gp.inducing");
  for (std::size_t t = 0; t < model.gp.heads.size(); ++t) {
    const std::string prefix = "gp.head" + std::to_string(t);
    auto& head = model.gp.heads[t];
    fill(head.log_lengthscale, loaded, prefix + ".log_lengthscale");
    fill(head.log_outputscale, loaded, prefix + ".log_outputscale");
    fill(head.mean_const, loaded, prefix + ".mean_const");
    fill(head.whitened_mean, loaded, prefix + ".whitened_mean");
    fill(head.cov_factor_raw, loaded, prefix + ".cov_factor_raw");
  }
  if (model.gp.log_noise.defined())
    fill(model.gp.log_noise, loaded, "gp.log_noise");
  return model;
}

}  // namespace due

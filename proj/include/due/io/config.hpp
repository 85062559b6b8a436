#pragma once

#include <map>
#include <string>
#include <vector>

#include "due/data/csv.hpp"
#include "due/data/dataset.hpp"
#include "due/train/model.hpp"
#include "due/train/trainer.hpp"

namespace due {

// Flat "key = value" text with [section] headers and '#' comments. Keys are
// validated against the documented schema; anything unknown raises a
// ConfigError naming the key.

struct RawConfig {
  std::map<std::string, std::string> values;  // "section.key" -> value
  std::string text;                           // original file contents
};

RawConfig parse_config_text(const std::string& text);
RawConfig parse_config_file(const std::string& path);

struct DataConfig {
  std::string generator = "two_moons";
  std::size_t n = 200;
  double noise_std = 0.1;
  double tau_scale = 1.0;
  std::uint64_t seed = 0;
  std::string csv_path;
  std::string csv_target = "y";
  std::string csv_treatment;
  std::vector<std::string> csv_features;
};

struct ExperimentConfig {
  DataConfig data;
  ModelConfig model;
  TrainConfig train;
  std::string out_dir = "out";

  static ExperimentConfig from_raw(const RawConfig& raw);
  // Canonical text round-trippable through from_raw; the model card inside
  // saved model files uses the same format.
  std::string echo() const;
};

Dataset build_dataset(const DataConfig& cfg);

// Model-only card used inside model files (includes input_dim).
std::string model_card(const ModelConfig& cfg);
ModelConfig parse_model_card(const std::string& text);

}  // namespace due

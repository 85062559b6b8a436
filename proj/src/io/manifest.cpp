#include "due/io/manifest.hpp"

#include <fstream>

#include <json.hpp>

#include "due/core/error.hpp"

namespace due {

void Manifest::add_metric(const std::string& name, double value) {
  metrics_[name] = value;
}

void Manifest::add_output(const std::string& path) {
  outputs_.push_back(path);
}

void Manifest::add_timing(const std::string& name, double seconds) {
  timings_[name] = seconds;
}

std::string Manifest::to_json() const {
  nlohmann::json j;
  j["tool_version"] = kToolVersion;
  j["command"] = command_;
  j["config"] = config_echo_;
  j["dataset"] = {{"generator", provenance_.generator},
                  {"seed", provenance_.seed},
                  {"params", provenance_.params}};
  j["metrics"] = metrics_;
  j["outputs"] = outputs_;
  j["timings_seconds"] = timings_;
  return j.dump(2);
}

void Manifest::write(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ArgumentError("manifest: cannot write " + path);
  out << to_json() << "\n";
}

}  // namespace due

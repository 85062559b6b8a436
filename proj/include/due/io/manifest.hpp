#pragma once

#include <map>
#include <string>
#include <vector>

#include "due/data/dataset.hpp"

namespace due {

inline constexpr const char* kToolVersion = "0.1.0";

// JSON run record: resolved config, dataset provenance, final metrics, and
// output paths. The config echo plus seeds make a rerun exact; wall-clock
// timings are informational only.
class Manifest {
public:
  void set_command(const std::string& cmd) { command_ = cmd; }
  void set_config_echo(const std::string& text) { config_echo_ = text; }
  void set_provenance(const Provenance& p) { provenance_ = p; }
  void add_metric(const std::string& name, double value);
  void add_output(const std::string& path);
  void add_timing(const std::string& name, double seconds);

  const std::map<std::string, double>& metrics() const { return metrics_; }

  std::string to_json() const;
  void write(const std::string& path) const;

private:
  std::string command_;
  std::string config_echo_;
  Provenance provenance_;
  std::map<std::string, double> metrics_;
  std::vector<std::string> outputs_;
  std::map<std::string, double> timings_;
};

}  // namespace due

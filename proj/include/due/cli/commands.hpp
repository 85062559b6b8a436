#pragma once

#include <cstdint>
#include <string>

namespace due {

int cmd_train(const std::string& config_path, const std::string& out_override);

struct EvalOptions {
  std::string model_path;
  std::string csv_path;       // exclusive with grid
  std::string grid_spec;      // "min,max,res" or "xmin,xmax,ymin,ymax,res"
  std::string target_column;  // excluded from csv features when present
  std::string treatment_column;
  std::string out_path = "predictions.csv";
  std::uint64_t seed = 0;
};
int cmd_eval(const EvalOptions& opts);

int cmd_demo(const std::string& name, const std::string& out_dir,
             std::uint64_t seed, std::size_t trials);

int cmd_check(const std::string& corrupt_op);

}  // namespace due

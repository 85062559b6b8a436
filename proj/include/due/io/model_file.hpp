#pragma once

#include <string>

#include "due/train/model.hpp"

namespace due {

// Single-file binary container: magic string, format version, then named
// length-prefixed little-endian float64 arrays plus a model card string.
// Load(save(m)) reproduces predictions bitwise.

void save_model(const DueModel& model, const std::string& path);
DueModel load_model(const std::string& path);

}  // namespace due

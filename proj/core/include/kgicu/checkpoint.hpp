#pragma once

#include <string>

#include "kgicu/optim.hpp"

namespace kgicu {

// Single-file checkpoint: the config echo (key = value text) followed by
// every parameter tensor as (path, shape, little-endian 64-bit floats).
// Loading reproduces predictions bit-exactly.
void save_checkpoint(const std::string& path, const std::string& config_text,
                     const ParameterSet& params);

struct Checkpoint {
  std::string config_text;
  ParameterSet params;
};

Checkpoint load_checkpoint(const std::string& path);

}  // namespace kgicu

#pragma once

#include <string>

#include "refracted/model.hpp"

namespace refracted {

struct ModelConfig {
  std::string name;
  LevyModel model;
  RefractionParams params;
};

// Parses a model file:
//   { "sigma": 1.414, "gamma": 0, "jumps": "none" | [{"lambda": 1, "rho": 1}],
//     "delta": 0.5, "b": 0 }
// "drift" (the linear coefficient net of jump compensation) may replace
// "gamma". Schema errors throw ValidationError naming the field and line.
// Refraction constraints are not checked here; see validate().
ModelConfig parse_model_config(const std::string& text, const std::string& origin = "<input>");

// `spec` is a path, or one of the bundled preset names "std-bm" and "cl-exp".
ModelConfig load_model_config(const std::string& spec);

// Bundled presets.
ModelConfig preset_std_bm();
ModelConfig preset_cl_exp();

}  // namespace refracted

#pragma once

#include <string>

#include "lpnest/density.hpp"

namespace lpnest {

// Model JSON, schema 1:
//   {"schema": 1, "tree": "<dsl>", "radial": {"family": ...}, "W": [...] | null}
// W is a row-major array of n*n numbers.
std::string model_to_json(const LpNestedModel& model);
LpNestedModel model_from_json(const std::string& text);
LpNestedModel load_model(const std::string& path);
void save_model(const std::string& path, const LpNestedModel& model);

// Tagged radial object: {"family": "gammap"|"uniform_ball"|"lognormal"|
// "lognormal_mixture", ...parameters}.
std::string radial_to_json(const RadialModel& radial);
RadialModel radial_from_json(const std::string& text);

}  // namespace lpnest

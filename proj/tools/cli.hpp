#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "pumpwatch/forest.hpp"
#include "pumpwatch/graph.hpp"
#include "pumpwatch/predict.hpp"
#include "pumpwatch/types.hpp"

namespace pumpwatch::cli {

// Runs the command line and returns the process exit code: 0 success,
// 1 usage or validation error, 2 data error. Never calls std::exit.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// "90", "90s", "15m", "3h", "2d" -> seconds. Throws ValidationError.
Timestamp parse_duration(std::string_view text);

// Settings read from a features-config JSON file. Unknown keys are errors.
struct PredictSettings {
  predict::TaskConfig task;
  forest::ForestParams forest;
  graph::ComponentParams components;
  std::vector<features::Variant> variants = {features::Variant::twitter, features::Variant::economic,
                                             features::Variant::both};
};

PredictSettings parse_predict_settings(std::string_view json);
PredictSettings load_predict_settings(const std::filesystem::path& path);

}  // namespace pumpwatch::cli

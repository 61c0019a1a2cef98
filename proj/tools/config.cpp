#include "config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "json.hpp"
#include "pumpwatch/error.hpp"

namespace pumpwatch::cli {

namespace {

using nlohmann::json;

void flatten(const json& node, std::vector<std::string>& parents, std::vector<CLI::ConfigItem>& items) {
  for (const auto& [key, value] : node.items()) {
    if (value.is_object()) {
      parents.push_back(key);
      flatten(value, parents, items);
      parents.pop_back();
      continue;
    }
    if (value.is_null()) continue;
    CLI::ConfigItem item;
    item.parents = parents;
    item.name = key;
    auto scalar = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
    if (value.is_array()) {
      for (const auto& v : value) item.inputs.push_back(scalar(v));
    } else {
      item.inputs.push_back(scalar(value));
    }
    items.push_back(std::move(item));
  }
}

}  // namespace

std::string JsonOrTomlConfig::to_config(const CLI::App* app, bool default_also, bool write_description,
                                        std::string prefix) const {
  return toml_.to_config(app, default_also, write_description, std::move(prefix));
}

std::vector<CLI::ConfigItem> JsonOrTomlConfig::from_config(std::istream& input) const {
  std::string text((std::istreambuf_iterator<char>(input)), std::istreambuf_iterator<char>());
  std::size_t first = 0;
  while (first < text.size() && std::isspace(static_cast<unsigned char>(text[first]))) ++first;
  if (first == text.size() || text[first] != '{') {
    std::istringstream again(text);
    return toml_.from_config(again);
  }
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw CLI::ConversionError(std::string("config: ") + e.what());
  }
  std::vector<CLI::ConfigItem> items;
  std::vector<std::string> parents;
  flatten(doc, parents, items);
  return items;
}

Timestamp parse_duration(std::string_view text) {
  if (text.empty()) throw ValidationError("empty duration");
  Timestamp unit = 1;
  std::string_view digits = text;
  switch (text.back()) {
    case 's':
      digits.remove_suffix(1);
      break;
    case 'm':
      unit = kMinute;
      digits.remove_suffix(1);
      break;
    case 'h':
      unit = kHour;
      digits.remove_suffix(1);
      break;
    case 'd':
      unit = kDay;
      digits.remove_suffix(1);
      break;
    default:
      break;
  }
  Timestamp value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || digits.empty() || value < 0) {
    throw ValidationError("bad duration '" + std::string(text) + "' (expected e.g. 90s, 15m, 3h, 2d)");
  }
  return value * unit;
}

PredictSettings parse_predict_settings(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("features config: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("features config: expected a JSON object");

  PredictSettings s;
  auto fail = [](const std::string& key, const std::string& why) {
    throw ValidationError("features config: " + key + ": " + why);
  };
  auto get_int = [&](const json& v, const std::string& key) -> long long {
    if (!v.is_number_integer()) fail(key, "expected an integer");
    return v.get<long long>();
  };
  auto get_count = [&](const json& v, const std::string& key) -> std::size_t {
    const auto n = get_int(v, key);
    if (n < 0) fail(key, "must be nonnegative");
    return static_cast<std::size_t>(n);
  };
  auto get_number = [&](const json& v, const std::string& key) -> double {
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
  };

  for (const auto& [key, v] : doc.items()) {
    if (key == "w_econ") {
      s.task.features.w_econ = static_cast<int>(get_int(v, key));
    } else if (key == "w_tw") {
      s.task.features.w_tw = static_cast<int>(get_int(v, key));
    } else if (key == "min_attempts") {
      s.task.min_attempts = get_count(v, key);
    } else if (key == "min_train_positives") {
      s.task.min_train_positives = get_count(v, key);
    } else if (key == "success_window_hours") {
      s.task.success_window_hours = static_cast<int>(get_int(v, key));
    } else if (key == "success_threshold") {
      s.task.success_threshold = get_number(v, key);
    } else if (key == "exclude_pump_windows") {
      if (!v.is_boolean()) fail(key, "expected true or false");
      s.task.exclude_pump_windows = v.get<bool>();
    } else if (key == "variants") {
      if (!v.is_array() || v.empty()) fail(key, "expected a nonempty array");
      s.variants.clear();
      for (const auto& item : v) {
        auto parsed = item.is_string() ? features::parse_variant(item.get<std::string>()) : std::nullopt;
        if (!parsed) fail(key, "unknown variant " + item.dump());
        s.variants.push_back(*parsed);
      }
    } else if (key == "forest") {
      if (!v.is_object()) fail(key, "expected an object");
      for (const auto& [fk, fv] : v.items()) {
        const std::string name = "forest." + fk;
        if (fk == "n_trees") {
          s.forest.n_trees = get_count(fv, name);
        } else if (fk == "max_depth") {
          if (fv.is_null()) {
            s.forest.max_depth.reset();
          } else {
            s.forest.max_depth = get_count(fv, name);
          }
        } else if (fk == "min_leaf") {
          s.forest.min_leaf = get_count(fv, name);
        } else if (fk == "features_per_split") {
          if (fv.is_null()) {
            s.forest.features_per_split.reset();
          } else {
            s.forest.features_per_split = get_count(fv, name);
          }
        } else if (fk == "bootstrap") {
          if (!fv.is_boolean()) fail(name, "expected true or false");
          s.forest.bootstrap = fv.get<bool>();
        } else {
          fail(name, "unknown key");
        }
      }
    } else if (key == "components") {
      if (!v.is_object()) fail(key, "expected an object");
      for (const auto& [ck, cv] : v.items()) {
        const std::string name = "components." + ck;
        if (ck == "top_k") {
          s.components.top_k = get_count(cv, name);
        } else if (ck == "min_size") {
          s.components.min_size = get_count(cv, name);
        } else if (ck == "window_hours") {
          s.components.window = get_int(cv, name) * kHour;
        } else {
          fail(name, "unknown key");
        }
      }
    } else {
      fail(key, "unknown key");
    }
  }
  s.task.validate();
  s.forest.validate();
  if (s.components.top_k < 1) fail("components.top_k", "must be at least 1");
  return s;
}

PredictSettings load_predict_settings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_predict_settings(text);
}

}  // namespace pumpwatch::cli

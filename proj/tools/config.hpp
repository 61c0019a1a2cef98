#pragma once

#include <string>
#include <vector>

#include "CLI11.hpp"

namespace pumpwatch::cli {

// Config files mirror the flags. A file whose first non-blank byte is '{' is
// read as JSON (nested objects become subcommand sections); anything else is
// handed to the TOML reader.
class JsonOrTomlConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool write_description,
                        std::string prefix) const override;
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override;

 private:
  CLI::ConfigTOML toml_;
};

}  // namespace pumpwatch::cli

#pragma once

// JSON configuration files for CLI11: --config run.json, where subcommand
// options live in a nested object named after the subcommand.

#include <CLI11.hpp>
#include <json.hpp>

#include <istream>
#include <string>
#include <vector>

namespace algshape::cli {

class ConfigJSON : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
    return to_json(app, default_also).dump(2);
  }

  nlohmann::json to_json(const CLI::App* app, bool default_also) const {
    nlohmann::json j = nlohmann::json::object();
    for (const CLI::Option* opt : app->get_options({})) {
      if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
      const std::string name = opt->get_lnames()[0];
      if (opt->get_type_size() != 0) {
        if (opt->count() == 1) {
          j[name] = opt->results().at(0);
        } else if (opt->count() > 1) {
          j[name] = opt->results();
        } else if (default_also && !opt->get_default_str().empty()) {
          j[name] = opt->get_default_str();
        }
      } else if (opt->count() > 0) {
        j[name] = true;
      } else if (default_also) {
        j[name] = false;
      }
    }
    for (const CLI::App* sub : app->get_subcommands({})) {
      if (sub->parsed()) j[sub->get_name()] = to_json(sub, default_also);
    }
    return j;
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    nlohmann::json j;
    try {
      input >> j;
    } catch (const nlohmann::json::exception& e) {
      throw CLI::ConversionError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config must be a JSON object");
    std::vector<CLI::ConfigItem> out;
    collect(j, "", {}, out);
    return out;
  }

 private:
  static std::string scalar(const nlohmann::json& v, const std::string& name) {
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    if (v.is_string()) return v.get<std::string>();
    throw CLI::ConversionError("unsupported value for " + name);
  }

  static void collect(const nlohmann::json& j, const std::string& name, std::vector<std::string> parents,
                      std::vector<CLI::ConfigItem>& out) {
    if (j.is_object()) {
      if (!name.empty()) parents.push_back(name);
      for (auto it = j.begin(); it != j.end(); ++it) collect(*it, it.key(), parents, out);
      return;
    }
    CLI::ConfigItem item;
    item.name = name;
    item.parents = parents;
    if (j.is_array()) {
      for (const auto& v : j) item.inputs.push_back(scalar(v, name));
    } else {
      item.inputs.push_back(scalar(j, name));
    }
    out.push_back(std::move(item));
  }
};

}  // namespace algshape::cli

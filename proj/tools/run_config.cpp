/*
 * Copyright 2026 The malvis Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include "run_config.hpp"

#include "CLI11.hpp"
#include "json.hpp"
#include "malvis/binio.hpp"

namespace malvis::cli {

namespace {

void add_options(nlohmann::json& out, const CLI::App& app) {
  for (const CLI::Option* opt : app.get_options()) {
    if (opt->get_name() == "--help" || opt->get_name() == "-h" || opt->get_name().empty()) continue;
    std::string key = opt->get_single_name();
    nlohmann::json value;
    if (opt->count() > 0) {
      const auto& res = opt->results();
      if (res.size() == 1) {
        value = res[0];
      } else {
        value = res;
      }
    } else if (!opt->get_default_str().empty()) {
      value = opt->get_default_str();
    } else if (opt->get_type_size() == 0) {
      value = false;
    }
    out[key] = value;
  }
}

}  // namespace

std::string resolved_config(const CLI::App& app, const CLI::App& sub) {
  nlohmann::json j;
  j["command"] = sub.get_name();
  nlohmann::json options = nlohmann::json::object();
  add_options(options, app);
  add_options(options, sub);
  j["options"] = options;
  return j.dump(2) + "\n";
}

void write_run_config(const std::filesystem::path& output, const std::string& config) {
  std::filesystem::path p = output;
  p += ".config.json";
  write_text_file(p, config);
}

}  // namespace malvis::cli

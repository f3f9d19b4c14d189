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


#pragma once

#include <filesystem>
#include <string>

namespace CLI {
class App;
}

namespace malvis::cli {

// "<output>.config.json": the subcommand name and every option of the parent
// app and the subcommand with its resolved value (given or default). No
// timestamps, so reruns produce identical files.
std::string resolved_config(const CLI::App& app, const CLI::App& sub);
void write_run_config(const std::filesystem::path& output, const std::string& config);

}  // namespace malvis::cli

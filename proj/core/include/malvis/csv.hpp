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

#include <string>
#include <string_view>
#include <vector>

namespace malvis::csv {

// Minimal RFC 4180 reader/writer: comma separated, double-quote escaping,
// LF or CRLF line endings.
std::vector<std::vector<std::string>> parse(std::string_view text);
std::string quote(std::string_view field);
std::string join(const std::vector<std::string>& fields);

}  // namespace malvis::csv

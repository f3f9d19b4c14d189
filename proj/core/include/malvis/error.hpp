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

#include <stdexcept>
#include <string>

namespace malvis {

// Broad failure classes. The numeric values double as CLI exit codes.
enum class ErrorCode : int {
  kUsage = 1,
  kData = 2,
  kNumeric = 3,
};

// All library failures are reported through this exception. `kind` is a short
// stable tag such as "TruncatedFile" or "Diverged" that tests and callers can
// match on.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string kind, const std::string& message)
      : std::runtime_error(kind + ": " + message),
        code_(code),
        kind_(std::move(kind)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& kind() const noexcept { return kind_; }

 private:
  ErrorCode code_;
  std::string kind_;
};

[[noreturn]] inline void fail(std::string kind, const std::string& message) {
  throw Error(ErrorCode::kData, std::move(kind), message);
}

[[noreturn]] inline void fail_numeric(std::string kind,
                                      const std::string& message) {
  throw Error(ErrorCode::kNumeric, std::move(kind), message);
}

}  // namespace malvis

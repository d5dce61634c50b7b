/*
 * Copyright 2026 The saros Authors.
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

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace saros {

using UserIndex = std::uint32_t;
using ItemIndex = std::uint32_t;
using Timestamp = std::int64_t;

enum class Feedback : std::uint8_t { negative = 0, positive = 1 };

inline constexpr const char* kToolName = "saros";
inline constexpr const char* kToolVersion = "0.1.0";

/// A single (item, feedback) observation inside a user's time-ordered history.
struct Event {
  ItemIndex item = 0;
  Feedback feedback = Feedback::negative;
  Timestamp timestamp = 0;

  friend bool operator==(const Event&, const Event&) = default;
};

/// Every retained interaction of one user, sorted ascending by timestamp.
struct UserSession {
  UserIndex user = 0;
  std::vector<Event> events;

  friend bool operator==(const UserSession&, const UserSession&) = default;
};

/// Invalid configuration value or unknown tag.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input line; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace saros

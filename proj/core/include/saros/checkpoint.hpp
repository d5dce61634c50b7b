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
#include <filesystem>
#include <iosfwd>
#include <string>

#include "saros/model.hpp"

namespace saros {

/// Binary model container. Layout, all integers and doubles little-endian:
///
///   offset  size  field
///   0       8     magic "SAROSCKP"
///   8       4     format version (u32, currently 1)
///   12      4     tool version length L (u32)
///   16      L     tool version, ASCII
///   16+L    8     dim k (u64)
///   24+L    8     n_users (u64)
///   32+L    8     n_items (u64)
///   40+L    8     seed (u64)
///   48+L    8     config hash (u64)
///   56+L    8*n_users*k  U, row-major IEEE-754 binary64
///   ...     8*n_items*k  V, row-major IEEE-754 binary64
struct Checkpoint {
  ModelParams params;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  std::string tool_version = kToolVersion;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

void save_checkpoint(std::ostream& out, const Checkpoint& checkpoint);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);

/// Throws std::runtime_error on bad magic, unsupported version or truncation.
Checkpoint load_checkpoint(std::istream& in);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// 64-bit FNV-1a, used for config fingerprints.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

}  // namespace saros

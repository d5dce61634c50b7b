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

#include "saros/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace saros {
namespace {

constexpr std::array<char, 8> kMagic = {'S', 'A', 'R', 'O', 'S', 'C', 'K', 'P'};
constexpr std::uint32_t kFormatVersion = 1;

template <typename T>
void put_le(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes{};
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xff);
  }
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes{};
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
    throw std::runtime_error("checkpoint truncated");
  }
  std::uint64_t value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= std::uint64_t{bytes[i]} << (8 * i);
  return static_cast<T>(value);
}

void put_matrix(std::ostream& out, const Matrix& m) {
  for (double x : m.values()) put_le(out, std::bit_cast<std::uint64_t>(x));
}

void get_matrix(std::istream& in, Matrix& m) {
  for (double& x : m.values()) x = std::bit_cast<double>(get_le<std::uint64_t>(in));
}

}  // namespace

void save_checkpoint(std::ostream& out, const Checkpoint& cp) {
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kFormatVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(cp.tool_version.size()));
  out.write(cp.tool_version.data(), static_cast<std::streamsize>(cp.tool_version.size()));
  put_le<std::uint64_t>(out, cp.params.dim());
  put_le<std::uint64_t>(out, cp.params.n_users());
  put_le<std::uint64_t>(out, cp.params.n_items());
  put_le<std::uint64_t>(out, cp.seed);
  put_le<std::uint64_t>(out, cp.config_hash);
  put_matrix(out, cp.params.users);
  put_matrix(out, cp.params.items);
  if (!out) throw std::runtime_error("failed to write checkpoint");
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& cp) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  save_checkpoint(out, cp);
}

Checkpoint load_checkpoint(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw std::runtime_error("not a saros checkpoint");
  }
  const auto version = get_le<std::uint32_t>(in);
  if (version != kFormatVersion) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint cp;
  const auto tool_len = get_le<std::uint32_t>(in);
  if (tool_len > 256) throw std::runtime_error("corrupt checkpoint header");
  cp.tool_version.resize(tool_len);
  if (!in.read(cp.tool_version.data(), tool_len)) throw std::runtime_error("checkpoint truncated");
  const auto dim = get_le<std::uint64_t>(in);
  const auto n_users = get_le<std::uint64_t>(in);
  const auto n_items = get_le<std::uint64_t>(in);
  cp.seed = get_le<std::uint64_t>(in);
  cp.config_hash = get_le<std::uint64_t>(in);
  if (dim > (1u << 20) || n_users > (1ull << 32) || n_items > (1ull << 32)) {
    throw std::runtime_error("corrupt checkpoint header");
  }
  cp.params = ModelParams(n_users, n_items, dim);
  get_matrix(in, cp.params.users);
  get_matrix(in, cp.params.items);
  return cp;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return load_checkpoint(in);
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

}  // namespace saros

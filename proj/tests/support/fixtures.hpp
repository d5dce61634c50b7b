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

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "oracles.hpp"
#include "saros/model.hpp"
#include "saros/types.hpp"

namespace fixture {

/// Session from a label string such as "--+-+"; item t gets index items[t]
/// (default: t) and timestamp t.
inline saros::UserSession session(saros::UserIndex user, std::string_view labels,
                                  std::vector<saros::ItemIndex> items = {}) {
  saros::UserSession s{user, {}};
  for (std::size_t t = 0; t < labels.size(); ++t) {
    const auto item = items.empty() ? static_cast<saros::ItemIndex>(t) : items[t];
    s.events.push_back({item,
                        labels[t] == '+' ? saros::Feedback::positive : saros::Feedback::negative,
                        static_cast<saros::Timestamp>(t)});
  }
  return s;
}

/// Params with i.i.d. N(0, scale^2) entries.
inline saros::ModelParams gaussian_params(std::size_t users, std::size_t items, std::size_t dim,
                                          std::mt19937_64& rng, double scale = 1.0) {
  saros::ModelParams p(users, items, dim);
  std::normal_distribution<double> n(0.0, scale);
  for (auto& x : p.users.values()) x = n(rng);
  for (auto& x : p.items.values()) x = n(rng);
  return p;
}

inline oracle::Tables tables_of(const saros::ModelParams& p) {
  oracle::Tables t;
  for (std::size_t u = 0; u < p.n_users(); ++u) {
    const auto r = p.users.row(u);
    t.users.emplace_back(r.begin(), r.end());
  }
  for (std::size_t i = 0; i < p.n_items(); ++i) {
    const auto r = p.items.row(i);
    t.items.emplace_back(r.begin(), r.end());
  }
  return t;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// File contents without '#' metadata lines.
inline std::string read_data_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::string line, out;
  while (std::getline(in, line)) {
    if (!line.empty() && line.front() == '#') continue;
    out += line + "\n";
  }
  return out;
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(std::string_view tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("saros-" + std::string(tag) + "-" + std::to_string(rd()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(std::string_view name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace fixture

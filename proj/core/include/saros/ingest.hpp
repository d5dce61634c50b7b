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

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "saros/types.hpp"

namespace saros {

/// Column layout of a delimiter-separated interaction log.
struct LogFormat {
  std::string delimiter = "\t";
  std::size_t user_column = 0;
  std::size_t item_column = 1;
  std::size_t value_column = 2;
  /// When absent, the 1-based line number stands in for the timestamp.
  std::optional<std::size_t> timestamp_column = 3;
  bool skip_header = false;

  /// Known tags: "tsv", "csv", "ml-1m" ("::"-separated), "ml-100k", "canonical".
  /// Throws ConfigError on anything else.
  static LogFormat from_tag(std::string_view tag);
};

/// Bidirectional mapping between external string ids and dense 0-based
/// indices, assigned in first-appearance order.
class IdDictionary {
 public:
  std::uint32_t intern(std::string_view id);
  std::optional<std::uint32_t> find(std::string_view id) const;
  const std::string& id_of(std::uint32_t index) const { return ids_.at(index); }
  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }

  /// Two-column text: `external_id<TAB>index`, one entry per line, index order.
  void save(std::ostream& out) const;
  static IdDictionary load(std::istream& in);

  friend bool operator==(const IdDictionary& a, const IdDictionary& b) {
    return a.ids_ == b.ids_;
  }

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

/// An interaction before binarization; `value` is a rating or a click flag.
struct RatedInteraction {
  UserIndex user = 0;
  ItemIndex item = 0;
  double value = 0.0;
  Timestamp timestamp = 0;

  friend bool operator==(const RatedInteraction&, const RatedInteraction&) = default;
};

struct InteractionRecord {
  UserIndex user = 0;
  ItemIndex item = 0;
  Feedback feedback = Feedback::negative;
  Timestamp timestamp = 0;

  friend bool operator==(const InteractionRecord&, const InteractionRecord&) = default;
};

struct ParsedLog {
  std::vector<RatedInteraction> records;
  IdDictionary users;
  IdDictionary items;
};

ParsedLog parse_log(std::istream& in, const LogFormat& format);
ParsedLog parse_log(const std::filesystem::path& path, const LogFormat& format);

/// Writes records back with their external ids in `format`'s column layout.
void write_log(std::ostream& out, const ParsedLog& log, const LogFormat& format);

/// `threshold` set: positive iff value >= threshold. Unset: pass-through for
/// logs that are already binary, positive iff value != 0.
std::vector<InteractionRecord> binarize(std::span<const RatedInteraction> records,
                                        std::optional<double> threshold);

/// Groups records per user, stable-sorting each history by timestamp (file
/// order breaks ties). Users are emitted in ascending index order and only
/// when they have at least one interaction.
std::vector<UserSession> build_sessions(std::span<const InteractionRecord> records);

struct SplitResult {
  std::vector<UserSession> train;
  std::vector<UserSession> test;
};

/// Per user, the first floor(train_fraction * |events|) events go to train
/// and the rest to test. Empty parts are dropped.
SplitResult temporal_split(std::span<const UserSession> sessions, double train_fraction);

/// Canonical session file: `user<TAB>item<TAB>label<TAB>timestamp` with dense
/// indices, grouped by user in time order. Lines starting with '#' are
/// metadata and ignored on read.
void write_sessions(std::ostream& out, std::span<const UserSession> sessions);
std::vector<UserSession> read_sessions(std::istream& in);

struct DatasetStats {
  std::size_t n_users = 0;
  std::size_t n_items = 0;
  std::size_t n_interactions = 0;
  double sparsity = 0.0;
  double avg_pos = 0.0;
  double avg_neg = 0.0;
  double pos_fraction_train = 0.0;
  double pos_fraction_test = 0.0;
  /// (user index, uncapped block count on the train split)
  std::vector<std::pair<UserIndex, std::size_t>> block_counts;
  /// block size (|N| + |Pi|) -> number of blocks
  std::map<std::size_t, std::size_t> block_sizes;
};

/// `block_counts` holds one entry per train user; `block_sizes` lists the
/// size of every emitted train block.
DatasetStats compute_stats(std::span<const UserSession> train,
                           std::span<const UserSession> test,
                           std::span<const std::pair<UserIndex, std::size_t>> block_counts,
                           std::span<const std::size_t> block_sizes);

}  // namespace saros

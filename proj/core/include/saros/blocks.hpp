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
#include <limits>
#include <optional>
#include <vector>

#include "saros/types.hpp"

namespace saros {

/// One update unit: the negatives and positives accumulated since the
/// previous emission. Both sets are non-empty and disjoint.
struct Block {
  std::vector<ItemIndex> negatives;
  std::vector<ItemIndex> positives;
  std::size_t ordinal = 0;  // 1-based within the user

  std::size_t size() const noexcept { return negatives.size() + positives.size(); }
  std::size_t pair_count() const noexcept { return negatives.size() * positives.size(); }

  friend bool operator==(const Block&, const Block&) = default;
};

enum class SegmenterMode {
  /// Emit as soon as both pending sets are non-empty, in either order.
  either_order,
  /// Only "negatives then a positive" closes a block; a positive arriving
  /// with no pending negatives is dropped.
  negatives_first,
};

struct SegmenterOptions {
  SegmenterMode mode = SegmenterMode::either_order;
  /// Pending sets hold distinct items. A repeated item in the same set is
  /// dropped; an item re-labelled while pending moves to its latest label.
  /// Off: every event is kept (multiset), used by the Monte-Carlo checks.
  bool distinct_items = true;
};

/// Streaming block segmentation for a single user.
class Segmenter {
 public:
  Segmenter() = default;
  explicit Segmenter(SegmenterOptions options) : options_(options) {}

  std::optional<Block> feed(ItemIndex item, Feedback feedback);

  /// Returns the number of blocks emitted for the user, drops any pending
  /// items and resets for the next user.
  std::size_t finish_user();

  std::size_t emitted() const noexcept { return emitted_; }
  /// Events that never became part of a block so far (duplicates, label
  /// flips, strict-mode prefixes); pending items are added at finish_user.
  std::size_t dropped() const noexcept { return dropped_; }
  const std::vector<ItemIndex>& pending_negatives() const noexcept { return pending_neg_; }
  const std::vector<ItemIndex>& pending_positives() const noexcept { return pending_pos_; }

 private:
  SegmenterOptions options_;
  std::vector<ItemIndex> pending_neg_;
  std::vector<ItemIndex> pending_pos_;
  std::size_t emitted_ = 0;
  std::size_t dropped_ = 0;
};

struct BlockRun {
  std::vector<Block> blocks;   // at most `cap` blocks
  std::size_t total = 0;       // uncapped count for the whole session
  std::size_t dropped = 0;     // events not part of any block (uncapped run)
};

inline constexpr std::size_t kNoCap = std::numeric_limits<std::size_t>::max();

/// Segments a whole session. Blocks past `cap` are counted but not stored.
BlockRun blocks_of(const UserSession& session, std::size_t cap = kNoCap,
                   SegmenterOptions options = {});

}  // namespace saros

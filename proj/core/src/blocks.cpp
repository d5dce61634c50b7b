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

#include "saros/blocks.hpp"

#include <algorithm>

namespace saros {

std::optional<Block> Segmenter::feed(ItemIndex item, Feedback feedback) {
  const bool positive = feedback == Feedback::positive;
  auto& same = positive ? pending_pos_ : pending_neg_;
  auto& other = positive ? pending_neg_ : pending_pos_;

  if (options_.distinct_items) {
    if (std::find(same.begin(), same.end(), item) != same.end()) {
      ++dropped_;
      return std::nullopt;
    }
    if (auto it = std::find(other.begin(), other.end(), item); it != other.end()) {
      other.erase(it);
      ++dropped_;
    }
  }
  if (options_.mode == SegmenterMode::negatives_first && positive && pending_neg_.empty()) {
    ++dropped_;
    return std::nullopt;
  }
  same.push_back(item);

  if (pending_neg_.empty() || pending_pos_.empty()) return std::nullopt;
  Block block;
  block.negatives.swap(pending_neg_);
  block.positives.swap(pending_pos_);
  block.ordinal = ++emitted_;
  return block;
}

std::size_t Segmenter::finish_user() {
  const std::size_t count = emitted_;
  pending_neg_.clear();
  pending_pos_.clear();
  emitted_ = 0;
  dropped_ = 0;
  return count;
}

BlockRun blocks_of(const UserSession& session, std::size_t cap, SegmenterOptions options) {
  BlockRun run;
  Segmenter segmenter(options);
  for (const auto& e : session.events) {
    if (auto block = segmenter.feed(e.item, e.feedback)) {
      ++run.total;
      if (run.blocks.size() < cap) run.blocks.push_back(std::move(*block));
    }
  }
  run.dropped = segmenter.dropped() + segmenter.pending_negatives().size() +
                segmenter.pending_positives().size();
  segmenter.finish_user();
  return run;
}

}  // namespace saros

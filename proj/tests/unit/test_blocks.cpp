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

#include <algorithm>
#include <map>

#include "doctest.h"
#include "fixtures.hpp"
#include "saros/blocks.hpp"

using namespace saros;

namespace {

using Items = std::vector<ItemIndex>;

void check_block(const Block& b, Items neg, Items pos) {
  CHECK(b.negatives == neg);
  CHECK(b.positives == pos);
}

bool same(const std::vector<Block>& got, const std::vector<oracle::RefBlock>& want) {
  if (got.size() != want.size()) return false;
  for (std::size_t i = 0; i < got.size(); ++i) {
    if (got[i].negatives != want[i].negatives || got[i].positives != want[i].positives) {
      return false;
    }
    if (got[i].ordinal != i + 1) return false;
  }
  return true;
}

UserSession random_session(std::mt19937_64& rng, std::size_t max_len, std::size_t n_items,
                           bool distinct) {
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::bernoulli_distribution coin(0.5);
  std::uniform_int_distribution<ItemIndex> item(0, static_cast<ItemIndex>(n_items - 1));
  UserSession s{0, {}};
  const std::size_t n = len(rng);
  for (std::size_t t = 0; t < n; ++t) {
    const ItemIndex i = distinct ? static_cast<ItemIndex>(t) : item(rng);
    s.events.push_back(
        {i, coin(rng) ? Feedback::positive : Feedback::negative, static_cast<Timestamp>(t)});
  }
  return s;
}

}  // namespace

TEST_CASE("negatives then a positive form one block") {
  const auto run = blocks_of(fixture::session(0, "--+"));
  REQUIRE(run.blocks.size() == 1);
  check_block(run.blocks[0], {0, 1}, {2});
  CHECK(run.blocks[0].ordinal == 1);
}

TEST_CASE("two blocks from --+-+") {
  const auto run = blocks_of(fixture::session(0, "--+-+"));
  REQUIRE(run.blocks.size() == 2);
  check_block(run.blocks[0], {0, 1}, {2});
  check_block(run.blocks[1], {3}, {4});
}

TEST_CASE("positives first also close a block in either-order mode") {
  const auto run = blocks_of(fixture::session(0, "++-"));
  REQUIRE(run.blocks.size() == 1);
  check_block(run.blocks[0], {2}, {0, 1});

  const auto strict =
      blocks_of(fixture::session(0, "++-"), kNoCap, {SegmenterMode::negatives_first});
  CHECK(strict.blocks.empty());
  CHECK(strict.dropped == 3);
}

TEST_CASE("sessions without both labels give no block") {
  CHECK(blocks_of(fixture::session(0, "---")).total == 0);
  CHECK(blocks_of(fixture::session(0, "")).total == 0);
  CHECK(blocks_of(fixture::session(0, "++++"), 3).total == 0);
}

TEST_CASE("trailing items are dropped") {
  const auto run = blocks_of(fixture::session(0, "-+-"));
  REQUIRE(run.blocks.size() == 1);
  check_block(run.blocks[0], {0}, {1});
  CHECK(run.dropped == 1);
}

TEST_CASE("cap limits stored blocks but not the total") {
  const auto run = blocks_of(fixture::session(0, "-+-+-+-+-+"), 3);
  CHECK(run.blocks.size() == 3);
  CHECK(run.total == 5);
  const auto all = blocks_of(fixture::session(0, "-+-+-+-+-+"), 9);
  CHECK(all.blocks.size() == 5);
  CHECK(all.total == 5);
}

TEST_CASE("distinct-item handling of repeats") {
  // repeated negative collapses into one
  auto run = blocks_of(fixture::session(0, "--+", {7, 7, 8}));
  REQUIRE(run.blocks.size() == 1);
  check_block(run.blocks[0], {7}, {8});
  CHECK(run.dropped == 1);

  // an item relabelled while pending keeps its latest label
  run = blocks_of(fixture::session(0, "-+", {7, 7}));
  CHECK(run.blocks.empty());
  CHECK(run.dropped == 2);

  // the same item may appear again in a later block
  run = blocks_of(fixture::session(0, "-+-+", {1, 2, 1, 2}));
  REQUIRE(run.blocks.size() == 2);
  check_block(run.blocks[1], {1}, {2});

  // multiset mode keeps every event
  run = blocks_of(fixture::session(0, "--+", {7, 7, 8}), kNoCap,
                  {SegmenterMode::either_order, false});
  check_block(run.blocks.at(0), {7, 7}, {8});
}

TEST_CASE("streaming segmenter resets between users") {
  Segmenter seg;
  CHECK_FALSE(seg.feed(0, Feedback::negative));
  CHECK(seg.feed(1, Feedback::positive));
  CHECK_FALSE(seg.feed(2, Feedback::negative));
  CHECK(seg.finish_user() == 1);
  CHECK(seg.pending_negatives().empty());
  CHECK(seg.emitted() == 0);
  const auto b = seg.feed(3, Feedback::positive);
  CHECK_FALSE(b);
}

TEST_CASE("matches the reference loop on random distinct-item sequences") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto s = random_session(rng, 20, 0, true);
    const std::size_t cap = trial % 3 == 0 ? 1 + trial % 5 : kNoCap;
    const auto run = blocks_of(s, cap);
    CHECK(same(run.blocks, oracle::reference_blocks(s.events, cap, true)));
    CHECK(run.total == oracle::reference_blocks(s.events, kNoCap, true).size());
  }
}

TEST_CASE("matches the reference loop with repeats when labels are per item") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 500; ++trial) {
    auto s = random_session(rng, 20, 6, false);
    for (auto& e : s.events) e.feedback = e.item % 2 ? Feedback::positive : Feedback::negative;
    CHECK(same(blocks_of(s).blocks, oracle::reference_blocks(s.events, kNoCap, true)));
  }
}

TEST_CASE("multiset mode matches the appending reference") {
  std::mt19937_64 rng(13);
  const SegmenterOptions multiset{SegmenterMode::either_order, false};
  for (int trial = 0; trial < 500; ++trial) {
    const auto s = random_session(rng, 20, 4, false);
    CHECK(same(blocks_of(s, kNoCap, multiset).blocks,
               oracle::reference_blocks(s.events, kNoCap, false)));
  }
}

TEST_CASE("blocks are non-empty and reconstruct the session") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 500; ++trial) {
    const auto s = random_session(rng, 20, 5, trial % 2 == 0);
    const auto run = blocks_of(s);
    std::map<std::pair<ItemIndex, Feedback>, long> balance;
    for (const auto& e : s.events) ++balance[{e.item, e.feedback}];
    std::size_t in_blocks = 0;
    for (const auto& b : run.blocks) {
      CHECK_FALSE(b.negatives.empty());
      CHECK_FALSE(b.positives.empty());
      for (ItemIndex i : b.negatives) --balance[{i, Feedback::negative}];
      for (ItemIndex i : b.positives) --balance[{i, Feedback::positive}];
      in_blocks += b.size();
      for (ItemIndex i : b.negatives) {
        CHECK(std::find(b.positives.begin(), b.positives.end(), i) == b.positives.end());
      }
    }
    // every block item came from the session, and nothing was lost silently
    for (const auto& [key, left] : balance) CHECK(left >= 0);
    CHECK(in_blocks + run.dropped == s.events.size());
  }
}

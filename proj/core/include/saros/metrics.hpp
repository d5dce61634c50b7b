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
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "saros/model.hpp"
#include "saros/types.hpp"

namespace saros {

/// Top-K of a user's candidates in descending score order.
struct RankedList {
  UserIndex user = 0;
  std::vector<ItemIndex> items;
  std::vector<std::uint8_t> relevance;  // 1 for a preferred item
  std::size_t n_relevant = 0;           // relevant items in the whole candidate set
};

/// Precision at each relevant position up to k, normalized by
/// min(k, n_relevant). 0 when nothing is relevant.
double average_precision_at_k(const RankedList& ranked, std::size_t k);

/// DCG over positions 1..k divided by the ideal DCG over min(k, n_relevant)
/// positions. 0 when the ideal DCG is 0.
double ndcg_at_k(const RankedList& ranked, std::size_t k);

using Scorer = std::function<double(UserIndex, ItemIndex)>;

/// Sorts candidates by descending score, ties by ascending item index, and
/// keeps the first `k`.
RankedList rank_candidates(UserIndex user, std::span<const ItemIndex> candidates,
                           std::span<const ItemIndex> relevant, const Scorer& scorer,
                           std::size_t k);

enum class CandidatePolicy {
  test_items,    // the items in the user's test interactions
  full_catalog,  // every item
};

struct EvalOptions {
  std::vector<std::size_t> ks = {5, 10};
  CandidatePolicy candidates = CandidatePolicy::test_items;
};

struct UserMetrics {
  UserIndex user = 0;
  std::size_t k = 0;
  double ap = 0.0;
  double ndcg = 0.0;
};

struct EvalReport {
  std::map<std::size_t, double> map_at;
  std::map<std::size_t, double> ndcg_at;
  std::optional<double> test_loss;
  std::size_t loss_users = 0;
  std::size_t n_users_evaluated = 0;
  std::map<std::string, std::size_t> skipped;  // reason -> count
  std::vector<UserMetrics> per_user;
};

/// Ranks each test user's candidates with `scorer` and averages AP@K and
/// NDCG@K uniformly. Throws std::domain_error when no user is evaluable.
EvalReport evaluate(const Scorer& scorer, std::size_t n_users, std::size_t n_items,
                    std::span<const UserSession> test, const EvalOptions& options);

/// Same, scoring by U_u . V_i and adding the test loss.
EvalReport evaluate(const ModelParams& params, const LossConfig& loss,
                    std::span<const UserSession> test, const EvalOptions& options);

}  // namespace saros

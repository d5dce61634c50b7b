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

#include "saros/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace saros {

double average_precision_at_k(const RankedList& ranked, std::size_t k) {
  const std::size_t depth = std::min(k, ranked.items.size());
  double hits = 0.0;
  double sum = 0.0;
  for (std::size_t j = 0; j < depth; ++j) {
    if (!ranked.relevance[j]) continue;
    hits += 1.0;
    sum += hits / static_cast<double>(j + 1);
  }
  const std::size_t norm = std::min(k, ranked.n_relevant);
  return norm ? sum / static_cast<double>(norm) : 0.0;
}

double ndcg_at_k(const RankedList& ranked, std::size_t k) {
  const std::size_t depth = std::min(k, ranked.items.size());
  double dcg = 0.0;
  for (std::size_t j = 0; j < depth; ++j) {
    const double gain = std::exp2(static_cast<double>(ranked.relevance[j])) - 1.0;
    dcg += gain / std::log2(static_cast<double>(j + 2));
  }
  double idcg = 0.0;
  const std::size_t ideal = std::min(k, ranked.n_relevant);
  for (std::size_t j = 0; j < ideal; ++j) idcg += 1.0 / std::log2(static_cast<double>(j + 2));
  return idcg > 0.0 ? dcg / idcg : 0.0;
}

RankedList rank_candidates(UserIndex user, std::span<const ItemIndex> candidates,
                           std::span<const ItemIndex> relevant, const Scorer& scorer,
                           std::size_t k) {
  const std::unordered_set<ItemIndex> relevant_set(relevant.begin(), relevant.end());
  std::vector<std::pair<double, ItemIndex>> scored;
  scored.reserve(candidates.size());
  for (ItemIndex item : candidates) scored.emplace_back(scorer(user, item), item);
  const std::size_t depth = std::min(k, scored.size());
  auto before = [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  };
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(depth),
                    scored.end(), before);

  RankedList ranked;
  ranked.user = user;
  for (ItemIndex item : candidates) ranked.n_relevant += relevant_set.count(item);
  for (std::size_t j = 0; j < depth; ++j) {
    ranked.items.push_back(scored[j].second);
    ranked.relevance.push_back(relevant_set.count(scored[j].second) ? 1 : 0);
  }
  return ranked;
}

EvalReport evaluate(const Scorer& scorer, std::size_t n_users, std::size_t n_items,
                    std::span<const UserSession> test, const EvalOptions& options) {
  if (options.ks.empty()) throw ConfigError("at least one cutoff K is required");
  for (auto k : options.ks) {
    if (k == 0) throw ConfigError("cutoffs must be at least 1");
  }
  const std::size_t max_k = *std::max_element(options.ks.begin(), options.ks.end());

  EvalReport report;
  std::vector<ItemIndex> catalog;
  if (options.candidates == CandidatePolicy::full_catalog) {
    catalog.resize(n_items);
    std::iota(catalog.begin(), catalog.end(), ItemIndex{0});
  }
  std::map<std::size_t, double> ap_sum, ndcg_sum;

  for (const auto& session : test) {
    if (session.user >= n_users) {
      ++report.skipped["cold_user"];
      continue;
    }
    auto prefs = preferences_of(session);
    auto drop_cold = [&](std::vector<ItemIndex>& items) {
      const auto before = items.size();
      std::erase_if(items, [&](ItemIndex i) { return i >= n_items; });
      if (items.size() != before) report.skipped["cold_item"] += before - items.size();
    };
    drop_cold(prefs.positives);
    drop_cold(prefs.negatives);

    std::vector<ItemIndex> candidates;
    if (options.candidates == CandidatePolicy::full_catalog) {
      candidates = catalog;
    } else {
      candidates = prefs.positives;
      candidates.insert(candidates.end(), prefs.negatives.begin(), prefs.negatives.end());
    }
    if (candidates.empty()) {
      ++report.skipped["no_candidates"];
      continue;
    }

    const auto ranked = rank_candidates(session.user, candidates, prefs.positives, scorer, max_k);
    for (auto k : options.ks) {
      const double ap = average_precision_at_k(ranked, k);
      const double ndcg = ndcg_at_k(ranked, k);
      ap_sum[k] += ap;
      ndcg_sum[k] += ndcg;
      report.per_user.push_back({session.user, k, ap, ndcg});
    }
    ++report.n_users_evaluated;
  }
  if (report.n_users_evaluated == 0) throw std::domain_error("no evaluable test user");
  const auto n = static_cast<double>(report.n_users_evaluated);
  for (auto k : options.ks) {
    report.map_at[k] = ap_sum[k] / n;
    report.ndcg_at[k] = ndcg_sum[k] / n;
  }
  return report;
}

EvalReport evaluate(const ModelParams& params, const LossConfig& loss,
                    std::span<const UserSession> test, const EvalOptions& options) {
  const Scorer scorer = [&params](UserIndex u, ItemIndex i) { return score(params, u, i); };
  auto report = evaluate(scorer, params.n_users(), params.n_items(), test, options);

  std::vector<UserPreferences> prefs;
  for (const auto& session : test) {
    if (session.user >= params.n_users()) continue;
    auto p = preferences_of(session);
    auto cold = [&](ItemIndex i) { return i >= params.n_items(); };
    std::erase_if(p.positives, cold);
    std::erase_if(p.negatives, cold);
    prefs.push_back(std::move(p));
  }
  try {
    const auto gl = global_loss(params, loss, prefs);
    report.test_loss = gl.value;
    report.loss_users = gl.users_evaluated;
  } catch (const std::domain_error&) {
    report.test_loss.reset();
  }
  return report;
}

}  // namespace saros

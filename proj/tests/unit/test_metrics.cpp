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
#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "saros/metrics.hpp"

using namespace saros;

namespace {

RankedList list(std::vector<int> rel, std::size_t n_relevant) {
  RankedList r;
  for (std::size_t i = 0; i < rel.size(); ++i) {
    r.items.push_back(static_cast<ItemIndex>(i));
    r.relevance.push_back(static_cast<std::uint8_t>(rel[i]));
  }
  r.n_relevant = n_relevant;
  return r;
}

}  // namespace

TEST_CASE("average precision hand values") {
  CHECK(average_precision_at_k(list({1, 1, 1}, 3), 3) == 1.0);
  CHECK(average_precision_at_k(list({0, 0, 0}, 0), 3) == 0.0);
  CHECK(average_precision_at_k(list({0, 1, 1}, 2), 3) == doctest::Approx(0.58333).epsilon(1e-5));
  CHECK(average_precision_at_k(list({0, 1, 1}, 2), 3) ==
        doctest::Approx(0.5 * (1.0 / 2.0 + 2.0 / 3.0)).epsilon(1e-15));
  // relevant items outside the top k still count towards min(k, n_relevant)
  CHECK(average_precision_at_k(list({1, 0}, 3), 2) == 0.5);
}

TEST_CASE("ndcg hand values") {
  CHECK(ndcg_at_k(list({1}, 1), 1) == 1.0);
  CHECK(ndcg_at_k(list({0, 1}, 1), 2) == doctest::Approx(0.63093).epsilon(1e-5));
  CHECK(ndcg_at_k(list({0, 1}, 1), 2) == doctest::Approx(1.0 / std::log2(3.0)).epsilon(1e-15));
  CHECK(ndcg_at_k(list({0, 0, 0}, 0), 3) == 0.0);
}

TEST_CASE("metrics agree with position-by-position references") {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t len = 1 + rng() % 10;
    std::vector<int> rel(len);
    std::size_t listed = 0;
    for (auto& r : rel) listed += (r = static_cast<int>(rng() % 2));
    const std::size_t n_relevant = listed + rng() % 3;
    const std::size_t k = 1 + rng() % 12;
    const auto ranked = list(rel, n_relevant);
    CHECK(std::abs(average_precision_at_k(ranked, k) -
                   oracle::average_precision(rel, k, n_relevant)) <= 1e-12);
    CHECK(std::abs(ndcg_at_k(ranked, k) - oracle::ndcg(rel, k, n_relevant)) <= 1e-12);
  }
}

TEST_CASE("ranking sorts by score then item index") {
  const std::vector<ItemIndex> candidates = {4, 2, 9, 7};
  const std::vector<ItemIndex> relevant = {9};
  const Scorer scorer = [](UserIndex, ItemIndex i) { return i == 7 ? 2.0 : 1.0; };
  const auto r = rank_candidates(0, candidates, relevant, scorer, 3);
  CHECK(r.items == std::vector<ItemIndex>{7, 2, 4});
  CHECK(r.relevance == std::vector<std::uint8_t>{0, 0, 0});
  CHECK(r.n_relevant == 1);
}

TEST_CASE("oracle scores give perfect metrics") {
  const std::vector<UserSession> test = {fixture::session(0, "-+-++", {0, 1, 2, 3, 4})};
  const Scorer oracle_scores = [](UserIndex, ItemIndex i) { return i % 2 == 1 || i == 4 ? 1.0 : 0.0; };
  const auto report = evaluate(oracle_scores, 1, 5, test, EvalOptions{.ks = {1, 3, 5}});
  for (std::size_t k : {1, 3, 5}) {
    CHECK(report.map_at.at(k) == 1.0);
    CHECK(report.ndcg_at.at(k) == 1.0);
  }
  CHECK(report.n_users_evaluated == 1);
  CHECK(report.per_user.size() == 3);
}

TEST_CASE("tied scores are deterministic") {
  std::mt19937_64 rng(52);
  std::vector<UserSession> test;
  for (UserIndex u = 0; u < 10; ++u) {
    std::string labels;
    std::vector<ItemIndex> items;
    for (int t = 0; t < 6; ++t) {
      labels += rng() % 2 ? '+' : '-';
      items.push_back(static_cast<ItemIndex>(rng() % 20));
    }
    test.push_back(fixture::session(u, labels, items));
  }
  const Scorer flat = [](UserIndex, ItemIndex) { return 0.0; };
  const auto a = evaluate(flat, 10, 20, test, {});
  const auto b = evaluate(flat, 10, 20, test, {});
  CHECK(a.map_at == b.map_at);
  CHECK(a.ndcg_at == b.ndcg_at);
}

TEST_CASE("metrics only depend on the score order") {
  std::mt19937_64 rng(53);
  const auto params = fixture::gaussian_params(6, 12, 3, rng);
  std::vector<UserSession> test;
  for (UserIndex u = 0; u < 6; ++u) test.push_back(fixture::session(u, "+-+--+", {0, 2, 4, 6, 8, 10}));
  const Scorer raw = [&](UserIndex u, ItemIndex i) { return score(params, u, i); };
  const Scorer squashed = [&](UserIndex u, ItemIndex i) { return std::exp(3.0 * score(params, u, i)) - 7.0; };
  const auto a = evaluate(raw, 6, 12, test, {});
  const auto b = evaluate(squashed, 6, 12, test, {});
  CHECK(a.map_at == b.map_at);
  CHECK(a.ndcg_at == b.ndcg_at);
  for (const auto& [k, v] : a.map_at) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("cold users and items are skipped and counted") {
  const std::vector<UserSession> test = {fixture::session(0, "+-", {0, 7}),
                                         fixture::session(5, "+-", {0, 1}),
                                         fixture::session(1, "+", {9})};
  const Scorer s = [](UserIndex, ItemIndex i) { return -static_cast<double>(i); };
  const auto r = evaluate(s, 2, 3, test, {});
  CHECK(r.n_users_evaluated == 1);
  CHECK(r.skipped.at("cold_user") == 1);
  CHECK(r.skipped.at("cold_item") == 2);
  CHECK(r.skipped.at("no_candidates") == 1);
  CHECK_THROWS_AS(evaluate(s, 0, 3, test, {}), std::domain_error);
  CHECK_THROWS_AS(evaluate(s, 2, 3, test, EvalOptions{.ks = {}}), ConfigError);
  CHECK_THROWS_AS(evaluate(s, 2, 3, test, EvalOptions{.ks = {0}}), ConfigError);
}

TEST_CASE("users without a positive contribute zero") {
  const std::vector<UserSession> test = {fixture::session(0, "+-", {0, 1}),
                                         fixture::session(1, "--", {0, 1})};
  const Scorer s = [](UserIndex, ItemIndex i) { return -static_cast<double>(i); };
  const auto r = evaluate(s, 2, 2, test, EvalOptions{.ks = {2}});
  CHECK(r.n_users_evaluated == 2);
  CHECK(r.map_at.at(2) == 0.5);
}

TEST_CASE("model evaluation adds the test loss") {
  std::mt19937_64 rng(54);
  const auto params = fixture::gaussian_params(2, 4, 3, rng);
  const std::vector<UserSession> test = {fixture::session(0, "+-", {0, 1}),
                                         fixture::session(1, "-+-", {1, 2, 3})};
  const auto r = evaluate(params, {0.0}, test, {});
  REQUIRE(r.test_loss);
  CHECK(*r.test_loss == doctest::Approx(global_loss(params, {0.0}, test).value));
  CHECK(r.loss_users == 2);

  const auto full = evaluate(params, {0.0}, test, EvalOptions{.candidates = CandidatePolicy::full_catalog});
  CHECK(full.n_users_evaluated == 2);
}

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

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "saros/metrics.hpp"
#include "saros/model.hpp"

using namespace saros;

namespace {

void BM_AveragePrecision(benchmark::State& state) {
  const auto len = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(7);
  RankedList list;
  for (std::size_t i = 0; i < len; ++i) {
    list.items.push_back(static_cast<ItemIndex>(i));
    list.relevance.push_back(rng() % 2);
    list.n_relevant += list.relevance.back();
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(average_precision_at_k(list, len));
    benchmark::DoNotOptimize(ndcg_at_k(list, len));
  }
}
BENCHMARK(BM_AveragePrecision)->Arg(10)->Arg(100);

void BM_Evaluate(benchmark::State& state) {
  const std::size_t users = 1000, items = 2000;
  const auto candidates = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<ItemIndex> item(0, items - 1);
  std::vector<UserSession> test;
  for (UserIndex u = 0; u < users; ++u) {
    UserSession s{u, {}};
    for (std::size_t t = 0; t < candidates; ++t) {
      s.events.push_back({item(rng), rng() % 2 ? Feedback::positive : Feedback::negative,
                          static_cast<Timestamp>(t)});
    }
    test.push_back(std::move(s));
  }
  const auto params = ModelParams::random(users, items, 20, 8);
  EvalOptions options;
  options.ks = {1, 10};
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate(params, {0.0}, test, options).map_at.at(10));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(users));
}
BENCHMARK(BM_Evaluate)->Arg(20)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

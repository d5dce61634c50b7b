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

#include "saros/blocks.hpp"
#include "saros/diagnostics.hpp"
#include "saros/model.hpp"
#include "saros/optimizers.hpp"

using namespace saros;

namespace {

std::vector<UserSession> synthetic_log(std::size_t users, std::size_t items, std::size_t length,
                                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<ItemIndex> item(0, static_cast<ItemIndex>(items - 1));
  std::vector<UserSession> log;
  for (UserIndex u = 0; u < users; ++u) {
    UserSession s{u, {}};
    for (std::size_t t = 0; t < length; ++t) {
      s.events.push_back({item(rng), rng() % 3 == 0 ? Feedback::positive : Feedback::negative,
                          static_cast<Timestamp>(t)});
    }
    log.push_back(std::move(s));
  }
  return log;
}

void BM_SarosEpoch(benchmark::State& state) {
  const auto users = static_cast<std::size_t>(state.range(0));
  const auto log = synthetic_log(users, 1000, 50, 1);
  TrainerConfig cfg;
  cfg.dim = static_cast<std::size_t>(state.range(1));
  cfg.b_max = 20;
  cfg.record_updates = false;
  std::size_t updates = 0;
  for (auto _ : state) {
    const auto r = saros_train(log, users, 1000, cfg);
    updates += r.trace.applied_updates;
    benchmark::DoNotOptimize(r.params.items.values().data());
  }
  state.counters["updates/s"] = benchmark::Counter(static_cast<double>(updates),
                                                   benchmark::Counter::kIsRate);
}
BENCHMARK(BM_SarosEpoch)->Args({1000, 10})->Args({1000, 50})->Unit(benchmark::kMillisecond);

void BM_BprEpoch(benchmark::State& state) {
  const auto log = synthetic_log(1000, 1000, 50, 2);
  TrainerConfig cfg;
  cfg.dim = static_cast<std::size_t>(state.range(0));
  cfg.record_updates = false;
  for (auto _ : state) {
    const auto r = bpr_train(log, ModelParams::random(1000, 1000, cfg.dim, cfg.seed), cfg,
                             BprOptions{.draws_per_epoch = 20000});
    benchmark::DoNotOptimize(r.params.items.values().data());
  }
}
BENCHMARK(BM_BprEpoch)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_BlockGradient(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const auto dim = static_cast<std::size_t>(state.range(1));
  const auto params = ModelParams::random(1, 2 * side, dim, 3);
  Block block;
  for (std::size_t i = 0; i < side; ++i) {
    block.negatives.push_back(static_cast<ItemIndex>(i));
    block.positives.push_back(static_cast<ItemIndex>(side + i));
  }
  SparseGradient grad(dim);
  for (auto _ : state) {
    grad.clear();
    benchmark::DoNotOptimize(accumulate_block_gradient(params, {0.01}, 0, block, grad));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(block.pair_count()));
}
BENCHMARK(BM_BlockGradient)->Args({1, 10})->Args({4, 10})->Args({16, 50});

void BM_Segmenter(benchmark::State& state) {
  const auto log = synthetic_log(1000, 1000, 100, 4);
  for (auto _ : state) {
    std::size_t blocks = 0;
    for (const auto& s : log) blocks += blocks_of(s).total;
    benchmark::DoNotOptimize(blocks);
  }
  state.SetItemsProcessed(state.iterations() * 1000 * 100);
}
BENCHMARK(BM_Segmenter)->Unit(benchmark::kMillisecond);

void BM_GlobalLoss(benchmark::State& state) {
  const auto log = synthetic_log(500, 500, 40, 5);
  const auto prefs = preferences_of(log);
  const auto params = ModelParams::random(500, 500, 20, 5);
  for (auto _ : state) benchmark::DoNotOptimize(global_loss(params, {0.0}, prefs).value);
}
BENCHMARK(BM_GlobalLoss)->Unit(benchmark::kMillisecond);

void BM_UnbiasednessCheck(benchmark::State& state) {
  const auto model = SyntheticUserModel::uniform(5, 0.5, 12, 6);
  const auto params = ModelParams::random(1, 5, 10, 6);
  for (auto _ : state) {
    benchmark::DoNotOptimize(check_lemma1_unbiasedness(model, params, {0.0}, 5000).max_deviation);
  }
}
BENCHMARK(BM_UnbiasednessCheck)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();

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

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "saros/blocks.hpp"
#include "saros/model.hpp"
#include "saros/types.hpp"

namespace saros {

enum class ThresholdPolicy {
  /// Blocks past B are never applied, so only users with fewer than b
  /// applied blocks are rolled back.
  cap_and_rollback_below_b,
  /// Users whose uncapped block count falls outside [b, B] are rolled back.
  rollback_outside_range,
};

enum class IteratePolicy {
  last,     // parameters after the final user
  average,  // mean of the per-user starting parameters
};

struct TrainerConfig {
  double eta = 0.05;
  double mu = 0.0;
  std::size_t dim = 10;
  std::size_t b_min = 1;
  std::size_t b_max = 10;
  std::size_t epochs = 1;
  std::uint64_t seed = 42;
  ThresholdPolicy threshold_policy = ThresholdPolicy::cap_and_rollback_below_b;
  IteratePolicy iterate_policy = IteratePolicy::last;
  /// Wall-clock limit on the training loop, checked at user boundaries.
  std::optional<std::chrono::duration<double>> time_budget;
  bool shuffle_users = false;
  SegmenterOptions segmenter;
  FrozenFactor frozen = FrozenFactor::none;
  /// Sample the training loss every this many users (or draws, or epochs
  /// for the batch trainers). 0 disables the loss curve.
  std::size_t trace_every = 0;
  /// Keep one record per applied update in the trace.
  bool record_updates = true;

  LossConfig loss() const { return LossConfig{mu}; }
  /// Throws ConfigError on eta <= 0, mu < 0, dim == 0, b_min == 0 or b_min > b_max.
  void validate() const;
};

struct BlockThresholds {
  std::size_t b_min = 1;
  std::size_t b_max = 1;
};

/// b = minimum and B = ceil(mean) of the per-user block counts, over users
/// with at least one block; falls back to {1, 1} when no user has a block.
BlockThresholds auto_thresholds(std::span<const UserSession> train,
                                SegmenterOptions options = {});

struct UpdateRecord {
  double time_s = 0.0;
  std::size_t user_ordinal = 0;  // 1-based visit counter
  UserIndex user = 0;
  std::size_t block = 0;         // 1-based block ordinal within the visit
  double block_loss = 0.0;       // loss before the step
  std::size_t updates = 0;       // cumulative applied updates

  friend bool operator==(const UpdateRecord&, const UpdateRecord&) = default;
};

struct GateDecision {
  UserIndex user = 0;
  std::size_t blocks_total = 0;
  std::size_t blocks_applied = 0;
  bool kept = false;

  friend bool operator==(const GateDecision&, const GateDecision&) = default;
};

struct LossSample {
  double time_s = 0.0;
  std::size_t updates = 0;
  std::size_t users_seen = 0;
  double train_loss = 0.0;

  friend bool operator==(const LossSample&, const LossSample&) = default;
};

struct TrainTrace {
  std::vector<UpdateRecord> updates;
  std::vector<GateDecision> gates;
  std::vector<LossSample> curve;
  std::size_t applied_updates = 0;
  std::size_t pair_evaluations = 0;
  std::size_t users_seen = 0;
  // pair-sampling counters (BPR)
  std::size_t draws = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  bool stopped_by_budget = false;
  double elapsed_s = 0.0;
  double grad_norm = 0.0;  // batch trainer: norm of the last full gradient
  std::size_t epochs_run = 0;
};

struct TrainResult {
  ModelParams params;
  TrainTrace trace;
};

/// Lazily maintained running mean of the parameters at the start of each
/// visit. Rows are folded into the sum only when they are about to change.
class IterateAverager {
 public:
  explicit IterateAverager(const ModelParams& initial);

  /// Marks the start of a new visit (the current params are its snapshot).
  void begin_visit() noexcept { ++visits_; }
  /// Must be called with the row's current value before its first change
  /// within the current visit.
  void before_user_change(UserIndex u, std::span<const double> current);
  void before_item_change(ItemIndex i, std::span<const double> current);

  std::size_t visits() const noexcept { return visits_; }
  /// Mean of the snapshots of visits 1..visits(); `current` supplies the
  /// rows that have not changed since their last fold.
  ModelParams mean(const ModelParams& current) const;

 private:
  Matrix user_sum_;
  Matrix item_sum_;
  std::vector<std::size_t> user_since_;
  std::vector<std::size_t> item_since_;
  std::size_t visits_ = 0;
};

/// Sequential block-wise trainer. One visit per user session: blocks are
/// applied as they form and the gate decides whether the visit is kept.
class SarosTrainer {
 public:
  SarosTrainer(ModelParams initial, TrainerConfig cfg);

  GateDecision visit(const UserSession& session);

  const ModelParams& params() const noexcept { return params_; }
  const TrainerConfig& config() const noexcept { return cfg_; }
  std::size_t visits() const noexcept { return averager_.visits(); }
  /// Mean of the starting parameters of every visit so far.
  ModelParams averaged() const;
  /// Final parameters per the configured iterate policy.
  ModelParams result() const;

  TrainTrace& trace() noexcept { return trace_; }
  const TrainTrace& trace() const noexcept { return trace_; }
  /// Elapsed training time reported in trace records.
  void set_clock_offset(double seconds) noexcept { clock_offset_ = seconds; }

 private:
  struct Journal {
    std::unordered_map<UserIndex, std::vector<double>> users;
    std::unordered_map<ItemIndex, std::vector<double>> items;
  };

  void apply_block(UserIndex user, const Block& block, std::size_t ordinal);
  void remember(const SparseGradient& grad);
  void rollback();
  double now() const;

  ModelParams params_;
  TrainerConfig cfg_;
  IterateAverager averager_;
  TrainTrace trace_;
  Journal journal_;
  SparseGradient grad_;
  std::chrono::steady_clock::time_point start_;
  double clock_offset_ = 0.0;
};

TrainResult saros_train(std::span<const UserSession> train, ModelParams initial,
                        const TrainerConfig& cfg);
TrainResult saros_train(std::span<const UserSession> train, std::size_t n_users,
                        std::size_t n_items, const TrainerConfig& cfg);

struct BprOptions {
  std::size_t draws_per_epoch = 0;  // user draws; 0 means one per train user
  /// Pair attempts per user draw before giving up on that draw.
  std::size_t max_retries = 64;
};

/// Uniform user, then uniform (i, i') from the user's items until the
/// labels differ; one pair gradient step per accepted pair.
TrainResult bpr_train(std::span<const UserSession> train, ModelParams initial,
                      const TrainerConfig& cfg, const BprOptions& options = {});

/// One full-gradient step on the global loss per epoch. Stops early when
/// the gradient norm drops to `grad_tol`.
TrainResult bpr_batch_train(std::span<const UserSession> train, ModelParams initial,
                            const TrainerConfig& cfg, double grad_tol = 0.0);

/// Squared error of one observed (user, item, target) plus the row penalty.
double mf_pair_loss(const ModelParams& params, double mu, UserIndex user, ItemIndex item,
                    double target);
/// Gradient rows (d/dU_u, d/dV_i) of mf_pair_loss.
std::pair<std::vector<double>, std::vector<double>> mf_pair_grad(const ModelParams& params,
                                                                 double mu, UserIndex user,
                                                                 ItemIndex item, double target);
/// Mean mf_pair_loss over every train event (positive -> 1, negative -> 0).
double mf_loss(const ModelParams& params, double mu, std::span<const UserSession> data);

/// Per-event SGD on the least-squares objective. The curve samples mf_loss.
TrainResult mf_train(std::span<const UserSession> train, ModelParams initial,
                     const TrainerConfig& cfg);

/// Items seen in train, by descending positive count, ties by ascending index.
std::vector<ItemIndex> mostpop_rank(std::span<const UserSession> train);
std::vector<std::size_t> positive_counts(std::span<const UserSession> train,
                                         std::size_t n_items);

}  // namespace saros

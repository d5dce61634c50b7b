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

#include "saros/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace saros {
namespace {

constexpr std::uint64_t kOrderStream = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kSampleStream = 0xbf58476d1ce4e5b9ULL;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool any_rankable(std::span<const UserPreferences> prefs) {
  return std::any_of(prefs.begin(), prefs.end(),
                     [](const UserPreferences& p) { return p.rankable(); });
}

// Wall-clock bookkeeping that leaves loss evaluation out of the training time.
class TrainingClock {
 public:
  double elapsed() const { return seconds_since(start_) - paused_; }
  bool over(const std::optional<std::chrono::duration<double>>& budget) const {
    return budget && elapsed() >= budget->count();
  }
  template <typename F>
  auto paused(F&& f) {
    const auto t0 = Clock::now();
    auto result = f();
    paused_ += seconds_since(t0);
    return result;
  }
  double paused_total() const { return paused_; }

 private:
  Clock::time_point start_ = Clock::now();
  double paused_ = 0.0;
};

void check_indices(const ModelParams& params, const UserSession& session) {
  if (session.user >= params.n_users()) {
    throw std::out_of_range("user " + std::to_string(session.user) + " out of range (" +
                            std::to_string(params.n_users()) + " users)");
  }
  for (const auto& e : session.events) {
    if (e.item >= params.n_items()) {
      throw std::out_of_range("item " + std::to_string(e.item) + " out of range (" +
                              std::to_string(params.n_items()) + " items)");
    }
  }
}

}  // namespace

void TrainerConfig::validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("eta must be positive");
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw ConfigError("mu must be non-negative");
  if (dim == 0) throw ConfigError("dim must be at least 1");
  if (b_min == 0) throw ConfigError("b_min must be at least 1");
  if (b_min > b_max) throw ConfigError("b_min must not exceed b_max");
  if (epochs == 0) throw ConfigError("epochs must be at least 1");
  if (time_budget && !(time_budget->count() > 0.0)) {
    throw ConfigError("time budget must be positive");
  }
}

BlockThresholds auto_thresholds(std::span<const UserSession> train, SegmenterOptions options) {
  std::size_t min_count = 0, sum = 0, users = 0;
  for (const auto& s : train) {
    const auto total = blocks_of(s, 0, options).total;
    if (total == 0) continue;
    min_count = users == 0 ? total : std::min(min_count, total);
    sum += total;
    ++users;
  }
  if (users == 0) return {1, 1};
  const auto mean_ceil = (sum + users - 1) / users;
  return {min_count, std::max(min_count, mean_ceil)};
}

IterateAverager::IterateAverager(const ModelParams& initial)
    : user_sum_(initial.n_users(), initial.dim()),
      item_sum_(initial.n_items(), initial.dim()),
      user_since_(initial.n_users(), 1),
      item_since_(initial.n_items(), 1) {}

namespace {

void fold(std::span<double> sum, std::span<const double> current, std::size_t& since,
          std::size_t visits) {
  if (visits + 1 > since) {
    const auto count = static_cast<double>(visits + 1 - since);
    for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += current[j] * count;
  }
  since = visits + 1;
}

}  // namespace

void IterateAverager::before_user_change(UserIndex u, std::span<const double> current) {
  fold(user_sum_.row(u), current, user_since_[u], visits_);
}

void IterateAverager::before_item_change(ItemIndex i, std::span<const double> current) {
  fold(item_sum_.row(i), current, item_since_[i], visits_);
}

ModelParams IterateAverager::mean(const ModelParams& current) const {
  if (visits_ == 0) return current;
  ModelParams out(current.n_users(), current.n_items(), current.dim());
  const auto n = static_cast<double>(visits_);
  auto finish = [&](const Matrix& sum, const Matrix& cur, const std::vector<std::size_t>& since,
                    Matrix& dst) {
    for (std::size_t r = 0; r < cur.rows(); ++r) {
      const auto pending = static_cast<double>(visits_ + 1 - std::min(since[r], visits_ + 1));
      for (std::size_t j = 0; j < cur.cols(); ++j) {
        dst(r, j) = (sum(r, j) + cur(r, j) * pending) / n;
      }
    }
  };
  finish(user_sum_, current.users, user_since_, out.users);
  finish(item_sum_, current.items, item_since_, out.items);
  return out;
}

SarosTrainer::SarosTrainer(ModelParams initial, TrainerConfig cfg)
    : params_(std::move(initial)),
      cfg_(std::move(cfg)),
      averager_(params_),
      grad_(params_.dim()),
      start_(Clock::now()) {
  cfg_.validate();
  if (params_.dim() != cfg_.dim) {
    throw ConfigError("initial parameters have dim " + std::to_string(params_.dim()) +
                      ", config asks for " + std::to_string(cfg_.dim));
  }
}

double SarosTrainer::now() const { return seconds_since(start_) + clock_offset_; }

GateDecision SarosTrainer::visit(const UserSession& session) {
  check_indices(params_, session);
  averager_.begin_visit();
  ++trace_.users_seen;
  journal_.users.clear();
  journal_.items.clear();

  Segmenter segmenter(cfg_.segmenter);
  GateDecision gate;
  gate.user = session.user;
  for (const auto& e : session.events) {
    auto block = segmenter.feed(e.item, e.feedback);
    if (!block) continue;
    ++gate.blocks_total;
    if (gate.blocks_applied < cfg_.b_max) {
      ++gate.blocks_applied;
      apply_block(session.user, *block, gate.blocks_applied);
    }
  }
  segmenter.finish_user();

  if (cfg_.threshold_policy == ThresholdPolicy::cap_and_rollback_below_b) {
    gate.kept = gate.blocks_applied >= cfg_.b_min;
  } else {
    gate.kept = gate.blocks_total >= cfg_.b_min && gate.blocks_total <= cfg_.b_max;
  }
  if (!gate.kept) rollback();
  trace_.gates.push_back(gate);
  return gate;
}

void SarosTrainer::apply_block(UserIndex user, const Block& block, std::size_t ordinal) {
  const LossConfig loss = cfg_.loss();
  grad_.clear();
  double loss_sum = 0.0;
  for (ItemIndex i : block.positives) {
    for (ItemIndex j : block.negatives) loss_sum += grad_.add_pair(params_, loss, user, i, j);
  }
  const auto pairs = static_cast<double>(block.pair_count());
  trace_.pair_evaluations += block.pair_count();
  remember(grad_);
  grad_.apply(params_, cfg_.eta / pairs, cfg_.frozen);
  ++trace_.applied_updates;
  if (cfg_.record_updates) {
    trace_.updates.push_back(
        {now(), averager_.visits(), user, ordinal, loss_sum / pairs, trace_.applied_updates});
  }
}

void SarosTrainer::remember(const SparseGradient& grad) {
  if (cfg_.frozen != FrozenFactor::users) {
    for (UserIndex u : grad.touched_users()) {
      auto [it, inserted] = journal_.users.try_emplace(u);
      if (!inserted) continue;
      const auto row = params_.users.row(u);
      it->second.assign(row.begin(), row.end());
      averager_.before_user_change(u, row);
    }
  }
  if (cfg_.frozen != FrozenFactor::items) {
    for (ItemIndex i : grad.touched_items()) {
      auto [it, inserted] = journal_.items.try_emplace(i);
      if (!inserted) continue;
      const auto row = params_.items.row(i);
      it->second.assign(row.begin(), row.end());
      averager_.before_item_change(i, row);
    }
  }
}

void SarosTrainer::rollback() {
  for (const auto& [u, saved] : journal_.users) {
    std::copy(saved.begin(), saved.end(), params_.users.row(u).begin());
  }
  for (const auto& [i, saved] : journal_.items) {
    std::copy(saved.begin(), saved.end(), params_.items.row(i).begin());
  }
  journal_.users.clear();
  journal_.items.clear();
}

ModelParams SarosTrainer::averaged() const { return averager_.mean(params_); }

ModelParams SarosTrainer::result() const {
  return cfg_.iterate_policy == IteratePolicy::average ? averaged() : params_;
}

TrainResult saros_train(std::span<const UserSession> train, ModelParams initial,
                        const TrainerConfig& cfg) {
  SarosTrainer trainer(std::move(initial), cfg);
  TrainingClock clock;
  const auto prefs = cfg.trace_every ? preferences_of(train) : std::vector<UserPreferences>{};
  const bool sample_loss = cfg.trace_every && any_rankable(prefs);
  const LossConfig loss = cfg.loss();
  auto sample = [&] {
    const double value =
        clock.paused([&] { return global_loss(trainer.params(), loss, prefs).value; });
    auto& t = trainer.trace();
    t.curve.push_back({clock.elapsed(), t.applied_updates, t.users_seen, value});
  };

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(cfg.seed ^ kOrderStream);

  if (sample_loss) sample();
  bool stop = false;
  for (std::size_t epoch = 0; epoch < cfg.epochs && !stop; ++epoch) {
    if (cfg.shuffle_users) std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t idx : order) {
      trainer.set_clock_offset(-clock.paused_total());
      trainer.visit(train[idx]);
      if (sample_loss && trainer.visits() % cfg.trace_every == 0) sample();
      if (clock.over(cfg.time_budget)) {
        trainer.trace().stopped_by_budget = true;
        stop = true;
        break;
      }
    }
    trainer.trace().epochs_run = epoch + 1;
  }
  if (sample_loss && trainer.visits() % cfg.trace_every != 0) sample();
  trainer.trace().elapsed_s = clock.elapsed();
  return {trainer.result(), std::move(trainer.trace())};
}

TrainResult saros_train(std::span<const UserSession> train, std::size_t n_users,
                        std::size_t n_items, const TrainerConfig& cfg) {
  cfg.validate();
  return saros_train(train, ModelParams::random(n_users, n_items, cfg.dim, cfg.seed), cfg);
}

TrainResult bpr_train(std::span<const UserSession> train, ModelParams params,
                      const TrainerConfig& cfg, const BprOptions& options) {
  cfg.validate();
  if (options.max_retries == 0) throw ConfigError("max_retries must be at least 1");
  TrainTrace trace;
  if (train.empty()) return {std::move(params), std::move(trace)};
  for (const auto& s : train) check_indices(params, s);

  struct Labeled {
    ItemIndex item;
    bool positive;
  };
  const auto prefs = preferences_of(train);
  std::vector<std::vector<Labeled>> items(prefs.size());
  for (std::size_t u = 0; u < prefs.size(); ++u) {
    for (ItemIndex i : prefs[u].positives) items[u].push_back({i, true});
    for (ItemIndex i : prefs[u].negatives) items[u].push_back({i, false});
  }

  const LossConfig loss = cfg.loss();
  const bool sample_loss = cfg.trace_every && any_rankable(prefs);
  TrainingClock clock;
  auto sample = [&] {
    const double value = clock.paused([&] { return global_loss(params, loss, prefs).value; });
    trace.curve.push_back({clock.elapsed(), trace.applied_updates, trace.users_seen, value});
  };

  std::mt19937_64 rng(cfg.seed ^ kSampleStream);
  std::uniform_int_distribution<std::size_t> pick_user(0, prefs.size() - 1);
  const std::size_t draws = options.draws_per_epoch ? options.draws_per_epoch : train.size();
  SparseGradient grad(params.dim());

  if (sample_loss) sample();
  bool stop = false;
  for (std::size_t epoch = 0; epoch < cfg.epochs && !stop; ++epoch) {
    for (std::size_t d = 0; d < draws; ++d) {
      const std::size_t u = pick_user(rng);
      const auto& pool = items[u];
      std::uniform_int_distribution<std::size_t> pick_item(0, pool.empty() ? 0 : pool.size() - 1);
      for (std::size_t attempt = 0; attempt < options.max_retries && !pool.empty(); ++attempt) {
        ++trace.draws;
        const auto& a = pool[pick_item(rng)];
        const auto& b = pool[pick_item(rng)];
        if (a.positive == b.positive) {
          ++trace.rejected;
          continue;
        }
        ++trace.accepted;
        const ItemIndex pos = a.positive ? a.item : b.item;
        const ItemIndex neg = a.positive ? b.item : a.item;
        grad.clear();
        const double value = grad.add_pair(params, loss, prefs[u].user, pos, neg);
        ++trace.pair_evaluations;
        grad.apply(params, cfg.eta, cfg.frozen);
        ++trace.applied_updates;
        if (cfg.record_updates) {
          trace.updates.push_back({clock.elapsed(), trace.users_seen + 1, prefs[u].user, 1,
                                   value, trace.applied_updates});
        }
        break;
      }
      ++trace.users_seen;
      if (sample_loss && trace.users_seen % cfg.trace_every == 0) sample();
      if (clock.over(cfg.time_budget)) {
        trace.stopped_by_budget = true;
        stop = true;
        break;
      }
    }
    trace.epochs_run = epoch + 1;
  }
  if (sample_loss && trace.users_seen % cfg.trace_every != 0) sample();
  trace.elapsed_s = clock.elapsed();
  return {std::move(params), std::move(trace)};
}

TrainResult bpr_batch_train(std::span<const UserSession> train, ModelParams params,
                            const TrainerConfig& cfg, double grad_tol) {
  cfg.validate();
  for (const auto& s : train) check_indices(params, s);
  const auto prefs = preferences_of(train);
  TrainTrace trace;
  if (!any_rankable(prefs)) return {std::move(params), std::move(trace)};

  const LossConfig loss = cfg.loss();
  std::size_t pairs_per_epoch = 0, rankable = 0;
  for (const auto& p : prefs) {
    if (!p.rankable()) continue;
    pairs_per_epoch += p.positives.size() * p.negatives.size();
    ++rankable;
  }

  TrainingClock clock;
  SparseGradient grad(params.dim());
  const std::size_t every = std::max<std::size_t>(cfg.trace_every, 1);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    grad.clear();
    const auto value = global_gradient(params, loss, prefs, grad).value;
    trace.pair_evaluations += pairs_per_epoch;
    trace.grad_norm = std::sqrt(grad.squared_norm(cfg.frozen));
    if (epoch % every == 0) {
      trace.curve.push_back({clock.elapsed(), trace.applied_updates, trace.users_seen, value});
    }
    if (trace.grad_norm <= grad_tol) break;
    grad.apply(params, cfg.eta, cfg.frozen);
    ++trace.applied_updates;
    trace.users_seen += rankable;
    trace.epochs_run = epoch + 1;
    if (clock.over(cfg.time_budget)) {
      trace.stopped_by_budget = true;
      break;
    }
  }
  trace.curve.push_back({clock.elapsed(), trace.applied_updates, trace.users_seen,
                         global_loss(params, loss, prefs).value});
  trace.elapsed_s = clock.elapsed();
  return {std::move(params), std::move(trace)};
}

double mf_pair_loss(const ModelParams& params, double mu, UserIndex user, ItemIndex item,
                    double target) {
  const auto u = params.users.row(user);
  const auto v = params.items.row(item);
  double pred = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    pred += u[j] * v[j];
    nu += u[j] * u[j];
    nv += v[j] * v[j];
  }
  const double err = target - pred;
  return err * err + mu * (nu + nv);
}

std::pair<std::vector<double>, std::vector<double>> mf_pair_grad(const ModelParams& params,
                                                                 double mu, UserIndex user,
                                                                 ItemIndex item, double target) {
  const auto u = params.users.row(user);
  const auto v = params.items.row(item);
  double pred = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) pred += u[j] * v[j];
  const double err = target - pred;
  std::vector<double> gu(u.size()), gv(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) {
    gu[j] = -2.0 * err * v[j] + 2.0 * mu * u[j];
    gv[j] = -2.0 * err * u[j] + 2.0 * mu * v[j];
  }
  return {std::move(gu), std::move(gv)};
}

double mf_loss(const ModelParams& params, double mu, std::span<const UserSession> data) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& s : data) {
    for (const auto& e : s.events) {
      sum += mf_pair_loss(params, mu, s.user, e.item,
                          e.feedback == Feedback::positive ? 1.0 : 0.0);
      ++n;
    }
  }
  return n ? sum / static_cast<double>(n) : 0.0;
}

TrainResult mf_train(std::span<const UserSession> train, ModelParams params,
                     const TrainerConfig& cfg) {
  cfg.validate();
  for (const auto& s : train) check_indices(params, s);
  TrainTrace trace;
  TrainingClock clock;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(cfg.seed ^ kOrderStream);
  const std::size_t every = std::max<std::size_t>(cfg.trace_every, 1);

  trace.curve.push_back({0.0, 0, 0, mf_loss(params, cfg.mu, train)});
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle_users) std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t idx : order) {
      const auto& s = train[idx];
      for (const auto& e : s.events) {
        const double target = e.feedback == Feedback::positive ? 1.0 : 0.0;
        const auto [gu, gv] = mf_pair_grad(params, cfg.mu, s.user, e.item, target);
        if (cfg.frozen != FrozenFactor::users) {
          auto u = params.users.row(s.user);
          for (std::size_t j = 0; j < u.size(); ++j) u[j] -= cfg.eta * gu[j];
        }
        if (cfg.frozen != FrozenFactor::items) {
          auto v = params.items.row(e.item);
          for (std::size_t j = 0; j < v.size(); ++j) v[j] -= cfg.eta * gv[j];
        }
        ++trace.applied_updates;
      }
      ++trace.users_seen;
    }
    trace.epochs_run = epoch + 1;
    if ((epoch + 1) % every == 0 || epoch + 1 == cfg.epochs) {
      const double value = clock.paused([&] { return mf_loss(params, cfg.mu, train); });
      trace.curve.push_back({clock.elapsed(), trace.applied_updates, trace.users_seen, value});
    }
    if (clock.over(cfg.time_budget)) {
      trace.stopped_by_budget = true;
      break;
    }
  }
  trace.elapsed_s = clock.elapsed();
  return {std::move(params), std::move(trace)};
}

std::vector<std::size_t> positive_counts(std::span<const UserSession> train,
                                         std::size_t n_items) {
  std::vector<std::size_t> counts(n_items, 0);
  for (const auto& s : train) {
    for (const auto& e : s.events) {
      if (e.item >= n_items) throw std::out_of_range("item index beyond catalog");
      if (e.feedback == Feedback::positive) ++counts[e.item];
    }
  }
  return counts;
}

std::vector<ItemIndex> mostpop_rank(std::span<const UserSession> train) {
  std::size_t n_items = 0;
  for (const auto& s : train) {
    for (const auto& e : s.events) n_items = std::max<std::size_t>(n_items, e.item + 1u);
  }
  std::vector<bool> seen(n_items, false);
  for (const auto& s : train) {
    for (const auto& e : s.events) seen[e.item] = true;
  }
  const auto counts = positive_counts(train, n_items);
  std::vector<ItemIndex> ranking;
  for (std::size_t i = 0; i < n_items; ++i) {
    if (seen[i]) ranking.push_back(static_cast<ItemIndex>(i));
  }
  std::stable_sort(ranking.begin(), ranking.end(),
                   [&](ItemIndex a, ItemIndex b) { return counts[a] > counts[b]; });
  return ranking;
}

}  // namespace saros

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
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "saros/blocks.hpp"
#include "saros/types.hpp"

namespace saros {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// The weight pair (U, V): one k-dimensional embedding per user and per item.
struct ModelParams {
  Matrix users;
  Matrix items;

  ModelParams() = default;
  ModelParams(std::size_t n_users, std::size_t n_items, std::size_t dim)
      : users(n_users, dim), items(n_items, dim) {}

  /// i.i.d. uniform entries in [-1/sqrt(dim), 1/sqrt(dim)].
  static ModelParams random(std::size_t n_users, std::size_t n_items, std::size_t dim,
                            std::uint64_t seed);

  std::size_t dim() const noexcept { return users.cols(); }
  std::size_t n_users() const noexcept { return users.rows(); }
  std::size_t n_items() const noexcept { return items.rows(); }
  bool all_finite() const noexcept;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

struct LossConfig {
  double mu = 0.0;
};

/// Which factor is held fixed when gradients are applied.
enum class FrozenFactor { none, users, items };

/// U_u . V_i. Throws std::out_of_range on bad indices.
double score(const ModelParams& params, UserIndex user, ItemIndex item);

/// log(1 + e^{-x}) evaluated without overflow.
double softplus_neg(double x) noexcept;
/// 1 / (1 + e^{x}), the derivative magnitude of softplus_neg.
double logistic_neg(double x) noexcept;

/// Regularized logistic loss of ranking `pos_item` above `neg_item` for `user`.
double pair_loss(const ModelParams& params, const LossConfig& cfg, UserIndex user,
                 ItemIndex pos_item, ItemIndex neg_item);

/// Exact gradient of pair_loss restricted to the three touched rows.
/// With pos_item == neg_item both item terms belong to the same row; callers
/// that need a total derivative should sum them.
struct PairGradient {
  double weight = 0.0;  // s = 1 / (1 + e^{U.(V_pos - V_neg)})
  std::vector<double> user;
  std::vector<double> pos_item;
  std::vector<double> neg_item;
};

PairGradient pair_grad(const ModelParams& params, const LossConfig& cfg, UserIndex user,
                       ItemIndex pos_item, ItemIndex neg_item);

/// Gradient rows keyed by user or item index, kept in first-touch order so
/// applying it is deterministic.
class SparseGradient {
 public:
  explicit SparseGradient(std::size_t dim = 0) { users_.dim = dim; items_.dim = dim; }

  std::span<double> user_row(UserIndex u) { return users_.row(u); }
  std::span<double> item_row(ItemIndex i) { return items_.row(i); }

  /// Adds `scale` times the pair gradient and returns the pair loss.
  double add_pair(const ModelParams& params, const LossConfig& cfg, UserIndex user,
                  ItemIndex pos_item, ItemIndex neg_item, double scale = 1.0);

  /// params -= step * gradient, skipping the frozen factor.
  void apply(ModelParams& params, double step, FrozenFactor frozen = FrozenFactor::none) const;

  const std::vector<std::uint32_t>& touched_users() const noexcept { return users_.ids; }
  const std::vector<std::uint32_t>& touched_items() const noexcept { return items_.ids; }
  std::span<const double> user_values(std::size_t slot) const;
  std::span<const double> item_values(std::size_t slot) const;

  /// Flattened [U rows..., V rows...] of a params-shaped gradient.
  std::vector<double> to_dense(std::size_t n_users, std::size_t n_items) const;
  double squared_norm(FrozenFactor frozen = FrozenFactor::none) const;
  void clear();

 private:
  struct Rows {
    std::size_t dim = 0;
    std::vector<std::uint32_t> ids;
    std::vector<double> values;
    std::unordered_map<std::uint32_t, std::size_t> slot;

    std::span<double> row(std::uint32_t id);
  };
  Rows users_;
  Rows items_;
};

/// Mean pair loss over Pi x N of one block.
double block_loss(const ModelParams& params, const LossConfig& cfg, UserIndex user,
                  const Block& block);

/// Adds the block-loss gradient (scaled by `scale`) into `grad`; returns the block loss.
double accumulate_block_gradient(const ModelParams& params, const LossConfig& cfg,
                                 UserIndex user, const Block& block, SparseGradient& grad,
                                 double scale = 1.0);

/// Thrown by user_loss when the user lacks positives or negatives.
class EmptyPreferenceSet : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Distinct preferred and non-preferred items of one history, in first
/// appearance order; an item's latest label wins.
struct UserPreferences {
  UserIndex user = 0;
  std::vector<ItemIndex> positives;
  std::vector<ItemIndex> negatives;

  bool rankable() const noexcept { return !positives.empty() && !negatives.empty(); }
};

UserPreferences preferences_of(const UserSession& session);
std::vector<UserPreferences> preferences_of(std::span<const UserSession> sessions);

/// Mean pair loss over I+ x I-.
double user_loss(const ModelParams& params, const LossConfig& cfg, UserIndex user,
                 std::span<const ItemIndex> positives, std::span<const ItemIndex> negatives);

double accumulate_user_gradient(const ModelParams& params, const LossConfig& cfg,
                                UserIndex user, std::span<const ItemIndex> positives,
                                std::span<const ItemIndex> negatives, SparseGradient& grad,
                                double scale = 1.0);

struct GlobalLoss {
  double value = 0.0;
  std::size_t users_evaluated = 0;
  std::size_t users_skipped = 0;
};

/// Uniform mean of user_loss over users having both labels. Throws
/// std::domain_error when no user qualifies.
GlobalLoss global_loss(const ModelParams& params, const LossConfig& cfg,
                       std::span<const UserPreferences> users);
GlobalLoss global_loss(const ModelParams& params, const LossConfig& cfg,
                       std::span<const UserSession> users);

/// Gradient of global_loss added into `grad`; returns the loss alongside.
GlobalLoss global_gradient(const ModelParams& params, const LossConfig& cfg,
                           std::span<const UserPreferences> users, SparseGradient& grad);

}  // namespace saros

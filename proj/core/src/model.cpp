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

#include "saros/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace saros {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) sum += a[j] * b[j];
  return sum;
}

double norm2(std::span<const double> a) { return dot(a, a); }

// U_u . (V_pos - V_neg)
double margin(std::span<const double> u, std::span<const double> vp,
              std::span<const double> vn) {
  double sum = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) sum += u[j] * (vp[j] - vn[j]);
  return sum;
}

void check_user(const ModelParams& params, UserIndex user) {
  if (user >= params.n_users()) {
    throw std::out_of_range("user " + std::to_string(user) + " out of range (" +
                            std::to_string(params.n_users()) + " users)");
  }
}

void check_item(const ModelParams& params, ItemIndex item) {
  if (item >= params.n_items()) {
    throw std::out_of_range("item " + std::to_string(item) + " out of range (" +
                            std::to_string(params.n_items()) + " items)");
  }
}

}  // namespace

ModelParams ModelParams::random(std::size_t n_users, std::size_t n_items, std::size_t dim,
                                std::uint64_t seed) {
  ModelParams params(n_users, n_items, dim);
  const double bound = dim > 0 ? 1.0 / std::sqrt(static_cast<double>(dim)) : 0.0;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& x : params.users.values()) x = dist(rng);
  for (auto& x : params.items.values()) x = dist(rng);
  return params;
}

bool ModelParams::all_finite() const noexcept {
  auto finite = [](double x) { return std::isfinite(x); };
  return std::all_of(users.values().begin(), users.values().end(), finite) &&
         std::all_of(items.values().begin(), items.values().end(), finite);
}

double score(const ModelParams& params, UserIndex user, ItemIndex item) {
  check_user(params, user);
  check_item(params, item);
  return dot(params.users.row(user), params.items.row(item));
}

double softplus_neg(double x) noexcept {
  if (x >= 0.0) return std::log1p(std::exp(-x));
  return -x + std::log1p(std::exp(x));
}

double logistic_neg(double x) noexcept {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(x));
}

double pair_loss(const ModelParams& params, const LossConfig& cfg, UserIndex user,
                 ItemIndex pos_item, ItemIndex neg_item) {
  check_user(params, user);
  check_item(params, pos_item);
  check_item(params, neg_item);
  const auto u = params.users.row(user);
  const auto vp = params.items.row(pos_item);
  const auto vn = params.items.row(neg_item);
  return softplus_neg(margin(u, vp, vn)) +
         cfg.mu * (norm2(u) + norm2(vp) + norm2(vn));
}

PairGradient pair_grad(const ModelParams& params, const LossConfig& cfg, UserIndex user,
                       ItemIndex pos_item, ItemIndex neg_item) {
  check_user(params, user);
  check_item(params, pos_item);
  check_item(params, neg_item);
  const auto u = params.users.row(user);
  const auto vp = params.items.row(pos_item);
  const auto vn = params.items.row(neg_item);
  const std::size_t k = u.size();

  PairGradient g;
  g.weight = logistic_neg(margin(u, vp, vn));
  g.user.resize(k);
  g.pos_item.resize(k);
  g.neg_item.resize(k);
  const double s = g.weight;
  const double two_mu = 2.0 * cfg.mu;
  for (std::size_t j = 0; j < k; ++j) {
    g.user[j] = -s * (vp[j] - vn[j]) + two_mu * u[j];
    g.pos_item[j] = -s * u[j] + two_mu * vp[j];
    g.neg_item[j] = s * u[j] + two_mu * vn[j];
  }
  return g;
}

std::span<double> SparseGradient::Rows::row(std::uint32_t id) {
  auto [it, inserted] = slot.try_emplace(id, ids.size());
  if (inserted) {
    ids.push_back(id);
    values.resize(values.size() + dim, 0.0);
  }
  return {values.data() + it->second * dim, dim};
}

double SparseGradient::add_pair(const ModelParams& params, const LossConfig& cfg,
                                UserIndex user, ItemIndex pos_item, ItemIndex neg_item,
                                double scale) {
  const auto u = params.users.row(user);
  const auto vp = params.items.row(pos_item);
  const auto vn = params.items.row(neg_item);
  const std::size_t k = u.size();

  const double m = margin(u, vp, vn);
  const double s = logistic_neg(m);
  const double two_mu = 2.0 * cfg.mu;

  // create every row before taking pointers, the storage may grow
  users_.row(user);
  items_.row(pos_item);
  items_.row(neg_item);
  double* gu = users_.row(user).data();
  double* gp = items_.row(pos_item).data();
  double* gn = items_.row(neg_item).data();
  for (std::size_t j = 0; j < k; ++j) {
    gu[j] += scale * (-s * (vp[j] - vn[j]) + two_mu * u[j]);
    gp[j] += scale * (-s * u[j] + two_mu * vp[j]);
    gn[j] += scale * (s * u[j] + two_mu * vn[j]);
  }
  return softplus_neg(m) + cfg.mu * (norm2(u) + norm2(vp) + norm2(vn));
}

void SparseGradient::apply(ModelParams& params, double step, FrozenFactor frozen) const {
  if (frozen != FrozenFactor::users) {
    for (std::size_t s = 0; s < users_.ids.size(); ++s) {
      auto row = params.users.row(users_.ids[s]);
      const double* g = users_.values.data() + s * users_.dim;
      for (std::size_t j = 0; j < row.size(); ++j) row[j] -= step * g[j];
    }
  }
  if (frozen != FrozenFactor::items) {
    for (std::size_t s = 0; s < items_.ids.size(); ++s) {
      auto row = params.items.row(items_.ids[s]);
      const double* g = items_.values.data() + s * items_.dim;
      for (std::size_t j = 0; j < row.size(); ++j) row[j] -= step * g[j];
    }
  }
}

std::span<const double> SparseGradient::user_values(std::size_t slot) const {
  return {users_.values.data() + slot * users_.dim, users_.dim};
}

std::span<const double> SparseGradient::item_values(std::size_t slot) const {
  return {items_.values.data() + slot * items_.dim, items_.dim};
}

std::vector<double> SparseGradient::to_dense(std::size_t n_users, std::size_t n_items) const {
  const std::size_t k = users_.dim;
  std::vector<double> dense((n_users + n_items) * k, 0.0);
  for (std::size_t s = 0; s < users_.ids.size(); ++s) {
    std::copy_n(users_.values.data() + s * k, k, dense.data() + users_.ids[s] * k);
  }
  for (std::size_t s = 0; s < items_.ids.size(); ++s) {
    std::copy_n(items_.values.data() + s * k, k, dense.data() + (n_users + items_.ids[s]) * k);
  }
  return dense;
}

double SparseGradient::squared_norm(FrozenFactor frozen) const {
  double sum = 0.0;
  if (frozen != FrozenFactor::users) {
    for (double g : users_.values) sum += g * g;
  }
  if (frozen != FrozenFactor::items) {
    for (double g : items_.values) sum += g * g;
  }
  return sum;
}

void SparseGradient::clear() {
  for (Rows* rows : {&users_, &items_}) {
    rows->ids.clear();
    rows->values.clear();
    rows->slot.clear();
  }
}

double block_loss(const ModelParams& params, const LossConfig& cfg, UserIndex user,
                  const Block& block) {
  return user_loss(params, cfg, user, block.positives, block.negatives);
}

double accumulate_block_gradient(const ModelParams& params, const LossConfig& cfg,
                                 UserIndex user, const Block& block, SparseGradient& grad,
                                 double scale) {
  return accumulate_user_gradient(params, cfg, user, block.positives, block.negatives, grad,
                                  scale);
}

UserPreferences preferences_of(const UserSession& session) {
  struct Seen {
    std::size_t order;
    Feedback label;
  };
  std::unordered_map<ItemIndex, Seen> seen;
  std::vector<ItemIndex> order;
  for (const auto& e : session.events) {
    auto [it, inserted] = seen.try_emplace(e.item, Seen{order.size(), e.feedback});
    if (inserted) {
      order.push_back(e.item);
    } else {
      it->second.label = e.feedback;
    }
  }
  UserPreferences prefs;
  prefs.user = session.user;
  for (ItemIndex item : order) {
    (seen.at(item).label == Feedback::positive ? prefs.positives : prefs.negatives)
        .push_back(item);
  }
  return prefs;
}

std::vector<UserPreferences> preferences_of(std::span<const UserSession> sessions) {
  std::vector<UserPreferences> out;
  out.reserve(sessions.size());
  for (const auto& s : sessions) out.push_back(preferences_of(s));
  return out;
}

double user_loss(const ModelParams& params, const LossConfig& cfg, UserIndex user,
                 std::span<const ItemIndex> positives, std::span<const ItemIndex> negatives) {
  if (positives.empty() || negatives.empty()) {
    throw EmptyPreferenceSet("user " + std::to_string(user) +
                             " needs both preferred and non-preferred items");
  }
  double sum = 0.0;
  for (ItemIndex i : positives) {
    for (ItemIndex j : negatives) sum += pair_loss(params, cfg, user, i, j);
  }
  return sum / (static_cast<double>(positives.size()) * static_cast<double>(negatives.size()));
}

double accumulate_user_gradient(const ModelParams& params, const LossConfig& cfg,
                                UserIndex user, std::span<const ItemIndex> positives,
                                std::span<const ItemIndex> negatives, SparseGradient& grad,
                                double scale) {
  if (positives.empty() || negatives.empty()) {
    throw EmptyPreferenceSet("user " + std::to_string(user) +
                             " needs both preferred and non-preferred items");
  }
  check_user(params, user);
  const double pairs =
      static_cast<double>(positives.size()) * static_cast<double>(negatives.size());
  const double pair_scale = scale / pairs;
  double sum = 0.0;
  for (ItemIndex i : positives) {
    check_item(params, i);
    for (ItemIndex j : negatives) {
      check_item(params, j);
      sum += grad.add_pair(params, cfg, user, i, j, pair_scale);
    }
  }
  return sum / pairs;
}

GlobalLoss global_loss(const ModelParams& params, const LossConfig& cfg,
                       std::span<const UserPreferences> users) {
  GlobalLoss out;
  double sum = 0.0;
  for (const auto& p : users) {
    if (!p.rankable()) {
      ++out.users_skipped;
      continue;
    }
    sum += user_loss(params, cfg, p.user, p.positives, p.negatives);
    ++out.users_evaluated;
  }
  if (out.users_evaluated == 0) throw std::domain_error("no user with both labels");
  out.value = sum / static_cast<double>(out.users_evaluated);
  return out;
}

GlobalLoss global_loss(const ModelParams& params, const LossConfig& cfg,
                       std::span<const UserSession> users) {
  return global_loss(params, cfg, preferences_of(users));
}

GlobalLoss global_gradient(const ModelParams& params, const LossConfig& cfg,
                           std::span<const UserPreferences> users, SparseGradient& grad) {
  GlobalLoss out;
  for (const auto& p : users) (p.rankable() ? out.users_evaluated : out.users_skipped) += 1;
  if (out.users_evaluated == 0) throw std::domain_error("no user with both labels");
  const double weight = 1.0 / static_cast<double>(out.users_evaluated);
  double sum = 0.0;
  for (const auto& p : users) {
    if (!p.rankable()) continue;
    sum += accumulate_user_gradient(params, cfg, p.user, p.positives, p.negatives, grad, weight);
  }
  out.value = sum / static_cast<double>(out.users_evaluated);
  return out;
}

}  // namespace saros

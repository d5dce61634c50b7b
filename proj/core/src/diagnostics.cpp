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

#include "saros/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

namespace saros {
namespace {

constexpr std::uint64_t kVarianceStream = 0x5851f42d4c957f2dULL;

// Running mean and variance per coordinate.
class Welford {
 public:
  explicit Welford(std::size_t dim) : mean_(dim, 0.0), m2_(dim, 0.0) {}

  void add(std::span<const double> x) {
    ++n_;
    for (std::size_t j = 0; j < mean_.size(); ++j) {
      const double delta = x[j] - mean_[j];
      mean_[j] += delta / static_cast<double>(n_);
      m2_[j] += delta * (x[j] - mean_[j]);
    }
  }

  std::size_t count() const noexcept { return n_; }
  const std::vector<double>& mean() const noexcept { return mean_; }
  double variance(std::size_t j) const {
    return n_ > 1 ? m2_[j] / static_cast<double>(n_ - 1) : 0.0;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

std::size_t dense_size(const ModelParams& params) {
  return (params.n_users() + params.n_items()) * params.dim();
}

void check_model_params(const SyntheticUserModel& model, const ModelParams& params) {
  model.validate();
  if (params.n_users() == 0 || params.n_items() != model.n_items()) {
    throw std::invalid_argument("parameters must cover user 0 and every model item");
  }
}

}  // namespace

SyntheticUserModel SyntheticUserModel::uniform(std::size_t items, double p, std::size_t length,
                                               std::uint64_t seed) {
  SyntheticUserModel model;
  model.positive_probability.assign(items, p);
  model.min_length = length;
  model.max_length = length;
  model.seed = seed;
  return model;
}

void SyntheticUserModel::validate() const {
  if (positive_probability.empty()) throw std::invalid_argument("model has no items");
  bool can_pos = false, can_neg = false;
  for (double p : positive_probability) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("probability outside [0, 1]");
    can_pos = can_pos || p > 0.0;
    can_neg = can_neg || p < 1.0;
  }
  if (min_length < 2 || min_length > max_length) {
    throw std::invalid_argument("sequence lengths must satisfy 2 <= min <= max");
  }
  if (!can_pos || !can_neg) throw std::invalid_argument("model never yields both labels");
}

std::mt19937_64 run_stream(std::uint64_t seed, std::uint64_t run) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(run), static_cast<std::uint32_t>(run >> 32)};
  return std::mt19937_64(seq);
}

Event sample_event(const SyntheticUserModel& model, std::mt19937_64& rng, Timestamp timestamp) {
  std::uniform_int_distribution<std::size_t> pick(0, model.n_items() - 1);
  const auto item = static_cast<ItemIndex>(pick(rng));
  std::bernoulli_distribution label(model.positive_probability[item]);
  return {item, label(rng) ? Feedback::positive : Feedback::negative, timestamp};
}

UserSession sample_session(const SyntheticUserModel& model, std::mt19937_64& rng,
                           UserIndex user) {
  std::uniform_int_distribution<std::size_t> length(model.min_length, model.max_length);
  UserSession session{user, {}};
  const std::size_t n = length(rng);
  for (std::size_t t = 0; t < n; ++t) {
    session.events.push_back(sample_event(model, rng, static_cast<Timestamp>(t)));
  }
  return session;
}

SegmenterOptions multiset_segmentation() {
  return {SegmenterMode::either_order, /*distinct_items=*/false};
}

std::vector<double> mean_block_gradient(const ModelParams& params, const LossConfig& cfg,
                                        const UserSession& session) {
  const auto run = blocks_of(session, kNoCap, multiset_segmentation());
  if (run.blocks.empty()) return {};
  SparseGradient grad(params.dim());
  const double scale = 1.0 / static_cast<double>(run.blocks.size());
  for (const auto& block : run.blocks) {
    accumulate_block_gradient(params, cfg, session.user, block, grad, scale);
  }
  return grad.to_dense(params.n_users(), params.n_items());
}

std::vector<double> session_gradient(const ModelParams& params, const LossConfig& cfg,
                                     const UserSession& session) {
  std::vector<ItemIndex> positives, negatives;
  for (const auto& e : session.events) {
    (e.feedback == Feedback::positive ? positives : negatives).push_back(e.item);
  }
  if (positives.empty() || negatives.empty()) return {};
  SparseGradient grad(params.dim());
  accumulate_user_gradient(params, cfg, session.user, positives, negatives, grad);
  return grad.to_dense(params.n_users(), params.n_items());
}

std::vector<double> population_gradient(const SyntheticUserModel& model,
                                        const ModelParams& params, const LossConfig& cfg) {
  check_model_params(model, params);
  const auto& p = model.positive_probability;
  const double pos_mass = std::accumulate(p.begin(), p.end(), 0.0);
  const double neg_mass = static_cast<double>(p.size()) - pos_mass;
  SparseGradient grad(params.dim());
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (p[j] == 1.0) continue;
      const double weight = (p[i] / pos_mass) * ((1.0 - p[j]) / neg_mass);
      grad.add_pair(params, cfg, 0, static_cast<ItemIndex>(i), static_cast<ItemIndex>(j),
                    weight);
    }
  }
  return grad.to_dense(params.n_users(), params.n_items());
}

UnbiasednessReport check_lemma1_unbiasedness(const SyntheticUserModel& model,
                                             const ModelParams& params, const LossConfig& cfg,
                                             std::size_t runs) {
  check_model_params(model, params);
  if (runs == 0) throw std::invalid_argument("at least one run is required");
  const std::size_t dim = dense_size(params);
  Welford block(dim), reference(dim), diff(dim);
  std::vector<double> delta(dim);

  for (std::size_t r = 0; r < runs; ++r) {
    auto rng = run_stream(model.seed, r);
    const auto session = sample_session(model, rng);
    const auto g_block = mean_block_gradient(params, cfg, session);
    if (g_block.empty()) continue;
    const auto g_full = session_gradient(params, cfg, session);
    for (std::size_t j = 0; j < dim; ++j) delta[j] = g_block[j] - g_full[j];
    block.add(g_block);
    reference.add(g_full);
    diff.add(delta);
  }
  if (diff.count() == 0) throw std::runtime_error("no run produced a block");

  UnbiasednessReport report;
  report.monte_carlo_runs = runs;
  report.runs_used = diff.count();
  report.block_mean = block.mean();
  report.reference_mean = reference.mean();
  report.standard_error.resize(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    const double se = std::sqrt(diff.variance(j) / static_cast<double>(diff.count()));
    const double dev = std::abs(diff.mean()[j]);
    report.standard_error[j] = se;
    report.max_deviation = std::max(report.max_deviation, dev);
    const double z = se > 0.0 ? dev / se : (dev > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    report.max_standard_errors = std::max(report.max_standard_errors, z);
  }
  report.within_tolerance = report.max_standard_errors <= report.tolerance_standard_errors;
  return report;
}

LogLogFit fit_log_log(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("log-log fit needs at least two paired points");
  }
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw std::invalid_argument("log-log fit needs positive values");
    }
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
    sx += lx[i];
    sy += ly[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("log-log fit needs distinct x values");
  LogLogFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

VarianceReport check_variance_decay(const SyntheticUserModel& model, const ModelParams& params,
                                    const LossConfig& cfg, std::span<const std::size_t> k_values,
                                    std::size_t runs) {
  check_model_params(model, params);
  if (runs < 2) throw std::invalid_argument("variance estimation needs at least two runs");
  if (k_values.empty()) throw std::invalid_argument("no block counts given");

  VarianceReport report;
  report.reference_gradient = population_gradient(model, params, cfg);
  const auto& reference = report.reference_gradient;

  for (std::size_t k : k_values) {
    if (k == 0) throw std::invalid_argument("block counts must be positive");
    double mean = 0.0, m2 = 0.0;
    for (std::size_t r = 0; r < runs; ++r) {
      auto rng = run_stream(model.seed ^ (kVarianceStream * k), r);
      Segmenter segmenter(multiset_segmentation());
      SparseGradient grad(params.dim());
      const double scale = 1.0 / static_cast<double>(k);
      std::size_t formed = 0;
      for (Timestamp t = 0; formed < k; ++t) {
        const auto e = sample_event(model, rng, t);
        if (auto block = segmenter.feed(e.item, e.feedback)) {
          accumulate_block_gradient(params, cfg, 0, *block, grad, scale);
          ++formed;
        }
      }
      const auto dense = grad.to_dense(params.n_users(), params.n_items());
      double sq = 0.0;
      for (std::size_t j = 0; j < dense.size(); ++j) {
        const double d = dense[j] - reference[j];
        sq += d * d;
      }
      const double delta = sq - mean;
      mean += delta / static_cast<double>(r + 1);
      m2 += delta * (sq - mean);
    }
    const double var_of_sq = m2 / static_cast<double>(runs - 1);
    report.points.push_back({k, mean, std::sqrt(var_of_sq / static_cast<double>(runs))});
  }

  report.non_increasing = true;
  for (std::size_t i = 1; i < report.points.size(); ++i) {
    const auto& prev = report.points[i - 1];
    const auto& cur = report.points[i];
    const double noise = 2.0 * std::hypot(prev.standard_error, cur.standard_error);
    if (cur.variance > prev.variance + noise) report.non_increasing = false;
  }

  const bool positive = std::all_of(report.points.begin(), report.points.end(),
                                    [](const VariancePoint& p) { return p.variance > 0.0; });
  if (positive && report.points.size() >= 2) {
    std::vector<double> xs, ys;
    for (const auto& p : report.points) {
      xs.push_back(static_cast<double>(p.blocks));
      ys.push_back(p.variance);
    }
    report.fit = fit_log_log(xs, ys);
    report.passed = report.non_increasing && report.fit.slope <= report.max_slope &&
                    report.fit.r_squared >= report.min_r_squared;
  }
  return report;
}

ConvexInstance make_convex_instance(const ConvexInstanceSpec& spec) {
  if (spec.users == 0 || spec.items < 2 || spec.dim == 0) {
    throw std::invalid_argument("convex instance needs users, >= 2 items and dim >= 1");
  }
  if (spec.min_length < 2 || spec.min_length > spec.max_length) {
    throw std::invalid_argument("session lengths must satisfy 2 <= min <= max");
  }
  if (spec.frozen == FrozenFactor::none) {
    throw std::invalid_argument("the convex instance needs one frozen factor");
  }
  std::mt19937_64 rng(spec.seed);
  // entries with variance 1/sqrt(dim) give true scores of unit variance
  std::normal_distribution<double> entry(0.0, std::pow(static_cast<double>(spec.dim), -0.25));
  ModelParams truth(spec.users, spec.items, spec.dim);
  for (auto& x : truth.users.values()) x = entry(rng);
  for (auto& x : truth.items.values()) x = entry(rng);

  ConvexInstance instance;
  instance.frozen = spec.frozen;
  instance.initial = ModelParams(spec.users, spec.items, spec.dim);
  if (spec.frozen == FrozenFactor::users) {
    instance.initial.users = truth.users;
  } else {
    instance.initial.items = truth.items;
  }

  std::uniform_int_distribution<std::size_t> length(spec.min_length, spec.max_length);
  std::uniform_int_distribution<std::size_t> pick(0, spec.items - 1);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (std::size_t u = 0; u < spec.users; ++u) {
    UserSession session{static_cast<UserIndex>(u), {}};
    const std::size_t n = length(rng);
    for (std::size_t t = 0; t < n; ++t) {
      const auto item = static_cast<ItemIndex>(pick(rng));
      const double p = 1.0 / (1.0 + std::exp(-score(truth, session.user, item)));
      session.events.push_back(
          {item, coin(rng) < p ? Feedback::positive : Feedback::negative,
           static_cast<Timestamp>(t)});
    }
    instance.sessions.push_back(std::move(session));
  }
  return instance;
}

namespace {

struct Optimum {
  ModelParams params;
  double loss = 0.0;
  double grad_norm = 0.0;
  std::size_t iterations = 0;
};

// Batch gradient descent with Armijo backtracking on the global loss.
Optimum batch_optimum(std::span<const UserPreferences> prefs, ModelParams params,
                      const LossConfig& loss, FrozenFactor frozen, double tolerance,
                      std::size_t max_iterations) {
  double step = 1.0;
  SparseGradient grad(params.dim());
  Optimum best;
  for (std::size_t it = 0; it <= max_iterations; ++it) {
    grad.clear();
    const double value = global_gradient(params, loss, prefs, grad).value;
    const double sq = grad.squared_norm(frozen);
    best.loss = value;
    best.grad_norm = std::sqrt(sq);
    best.iterations = it;
    if (best.grad_norm <= tolerance) break;
    if (it == max_iterations) break;
    step = std::min(step * 2.0, 1e3);
    while (true) {
      ModelParams trial = params;
      grad.apply(trial, step, frozen);
      const double trial_value = global_loss(trial, loss, prefs).value;
      if (trial_value <= value - 0.5 * step * sq || step < 1e-12) {
        params = std::move(trial);
        break;
      }
      step *= 0.5;
    }
  }
  best.params = std::move(params);
  return best;
}

std::vector<std::size_t> log_grid(std::size_t last) {
  std::set<std::size_t> points;
  for (double x = 1.0; x < static_cast<double>(last); x *= 1.25) {
    points.insert(static_cast<std::size_t>(std::llround(x)));
  }
  points.insert(std::max<std::size_t>(last / 10, 1));
  points.insert(last);
  return {points.begin(), points.end()};
}

}  // namespace

ConvergenceReport check_convergence_rate(const ConvexInstance& instance,
                                         const TrainerConfig& cfg, std::size_t users) {
  if (users < 10) throw std::invalid_argument("convergence check needs at least 10 users");
  if (instance.sessions.empty()) throw std::invalid_argument("instance has no sessions");
  const auto prefs = preferences_of(instance.sessions);
  const LossConfig loss = cfg.loss();
  constexpr double kTolerance = 1e-8;

  const auto optimum =
      batch_optimum(prefs, instance.initial, loss, instance.frozen, kTolerance, 200000);
  if (!(optimum.grad_norm <= kTolerance)) {
    throw std::runtime_error("batch reference did not converge: gradient norm " +
                             std::to_string(optimum.grad_norm));
  }

  ConvergenceReport report;
  report.optimum_loss = optimum.loss;
  report.reference_grad_norm = optimum.grad_norm;
  report.reference_iterations = optimum.iterations;

  const auto grid = log_grid(users);
  auto gap = [&](const ModelParams& params) {
    return global_loss(params, loss, prefs).value - optimum.loss;
  };

  if (cfg.eta == 0.0) {
    // nothing moves: every averaged iterate is the initial point
    const double constant = gap(instance.initial);
    for (std::size_t u : grid) report.curve.push_back({u, constant});
  } else {
    TrainerConfig run_cfg = cfg;
    run_cfg.frozen = instance.frozen;
    run_cfg.record_updates = false;
    run_cfg.trace_every = 0;
    SarosTrainer trainer(instance.initial, run_cfg);
    std::size_t next = 0;
    for (std::size_t u = 1; u <= users; ++u) {
      trainer.visit(instance.sessions[(u - 1) % instance.sessions.size()]);
      if (next < grid.size() && grid[next] == u) {
        report.curve.push_back({u, gap(trainer.averaged())});
        ++next;
      }
    }
  }

  report.fit_from = std::max<std::size_t>(users / 10, 1);
  std::vector<double> xs, ys;
  bool positive = true;
  for (const auto& p : report.curve) {
    if (p.users < report.fit_from) continue;
    xs.push_back(static_cast<double>(p.users));
    ys.push_back(p.suboptimality);
    positive = positive && p.suboptimality > 0.0;
  }
  const auto at = [&](std::size_t u) {
    for (const auto& p : report.curve) {
      if (p.users == u) return p.suboptimality;
    }
    return std::numeric_limits<double>::quiet_NaN();
  };
  report.final_ratio = at(users) / at(std::max<std::size_t>(users / 10, 1));
  if (positive) {
    report.fit = fit_log_log(xs, ys);
    report.alpha = -report.fit.slope;
  }
  report.passed = positive && report.alpha >= report.min_alpha &&
                  report.alpha <= report.max_alpha && report.final_ratio <= report.max_final_ratio;
  return report;
}

BoxplotSummary summarize(std::vector<double> values) {
  BoxplotSummary s;
  s.n = values.size();
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  auto quantile = [&](double q) {
    const double h = (static_cast<double>(values.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  s.min = values.front();
  s.max = values.back();
  s.q1 = quantile(0.25);
  s.median = quantile(0.5);
  s.q3 = quantile(0.75);
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  return s;
}

BlockDistribution block_distribution(std::span<const UserSession> train,
                                     SegmenterOptions options) {
  BlockDistribution dist;
  std::vector<double> logs, raw;
  for (const auto& session : train) {
    const auto run = blocks_of(session, kNoCap, options);
    dist.counts.emplace_back(session.user, run.total);
    for (const auto& block : run.blocks) ++dist.sizes[block.size()];
    if (run.total == 0) continue;
    const double lg = std::log10(static_cast<double>(run.total));
    dist.log10_counts.emplace_back(session.user, lg);
    logs.push_back(lg);
    raw.push_back(static_cast<double>(run.total));
  }
  dist.log10_summary = summarize(std::move(logs));
  dist.count_summary = summarize(std::move(raw));

  std::vector<std::size_t> bins(8, 0);
  for (const auto& [size, freq] : dist.sizes) bins[std::min<std::size_t>(size / 5, 7)] += freq;
  for (std::size_t b = 0; b < 7; ++b) {
    const std::size_t lo = b == 0 ? 1 : 5 * b;
    dist.size_bins.emplace_back(std::to_string(lo) + "-" + std::to_string(5 * (b + 1)), bins[b]);
  }
  dist.size_bins.emplace_back("35+", bins[7]);
  return dist;
}

}  // namespace saros

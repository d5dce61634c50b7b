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
#include <map>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "saros/blocks.hpp"
#include "saros/model.hpp"
#include "saros/optimizers.hpp"

namespace saros {

/// Items are drawn i.i.d. uniformly from m items; item i receives positive
/// feedback with probability positive_probability[i].
struct SyntheticUserModel {
  std::vector<double> positive_probability;
  std::size_t min_length = 12;
  std::size_t max_length = 12;
  std::uint64_t seed = 1;

  static SyntheticUserModel uniform(std::size_t items, double p, std::size_t length,
                                    std::uint64_t seed);

  std::size_t n_items() const noexcept { return positive_probability.size(); }
  /// Throws std::invalid_argument on bad probabilities or lengths, and when
  /// the model can never produce both labels.
  void validate() const;
};

/// Independent stream for Monte-Carlo run `run` of a model seeded with `seed`.
std::mt19937_64 run_stream(std::uint64_t seed, std::uint64_t run);

Event sample_event(const SyntheticUserModel& model, std::mt19937_64& rng,
                   Timestamp timestamp);
UserSession sample_session(const SyntheticUserModel& model, std::mt19937_64& rng,
                           UserIndex user = 0);

/// Segmenter settings used by the checks: emission in either order over
/// every event, duplicates included.
SegmenterOptions multiset_segmentation();

/// (1/k) * sum over the session's blocks of the block-loss gradient, dense.
/// Returns an empty vector when the session forms no block.
std::vector<double> mean_block_gradient(const ModelParams& params, const LossConfig& cfg,
                                        const UserSession& session);

/// Gradient of the all-pairs loss of the session at event level: every
/// (positive event, negative event) pair, dense. Empty without both labels.
std::vector<double> session_gradient(const ModelParams& params, const LossConfig& cfg,
                                     const UserSession& session);

/// E over (i ~ D+, i' ~ D-) of the pair gradient, by enumeration of item pairs.
std::vector<double> population_gradient(const SyntheticUserModel& model,
                                        const ModelParams& params, const LossConfig& cfg);

struct UnbiasednessReport {
  std::size_t monte_carlo_runs = 0;
  std::size_t runs_used = 0;  // runs that produced at least one block
  std::vector<double> block_mean;
  std::vector<double> reference_mean;
  std::vector<double> standard_error;  // of the paired per-coordinate difference
  double max_deviation = 0.0;
  double max_standard_errors = 0.0;
  double tolerance_standard_errors = 4.0;
  bool within_tolerance = false;
};

UnbiasednessReport check_lemma1_unbiasedness(const SyntheticUserModel& model,
                                             const ModelParams& params,
                                             const LossConfig& cfg, std::size_t runs);

struct VariancePoint {
  std::size_t blocks = 0;
  double variance = 0.0;
  double standard_error = 0.0;
};

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Least squares of log(y) on log(x). Non-positive values are rejected with
/// std::invalid_argument.
LogLogFit fit_log_log(std::span<const double> x, std::span<const double> y);

struct VarianceReport {
  std::vector<VariancePoint> points;
  std::vector<double> reference_gradient;
  LogLogFit fit;
  bool non_increasing = false;
  double max_slope = -0.8;
  double min_r_squared = 0.9;
  bool passed = false;
};

/// For each k, streams events until k blocks form and measures
/// E|| population gradient - (1/k) sum of block gradients ||^2.
VarianceReport check_variance_decay(const SyntheticUserModel& model, const ModelParams& params,
                                    const LossConfig& cfg, std::span<const std::size_t> k_values,
                                    std::size_t runs);

struct ConvexInstanceSpec {
  std::size_t users = 200;
  std::size_t items = 20;
  std::size_t dim = 4;
  std::size_t min_length = 10;
  std::size_t max_length = 30;
  std::uint64_t seed = 7;
  FrozenFactor frozen = FrozenFactor::users;
};

/// Users with fixed ground-truth embeddings; each shown item is positive
/// with probability sigmoid(U*_u . V*_i). The frozen factor starts at the
/// ground truth, the learnable one at zero.
struct ConvexInstance {
  std::vector<UserSession> sessions;
  ModelParams initial;
  FrozenFactor frozen = FrozenFactor::users;
};

ConvexInstance make_convex_instance(const ConvexInstanceSpec& spec);

struct ConvergencePoint {
  std::size_t users = 0;
  double suboptimality = 0.0;
};

struct ConvergenceReport {
  std::vector<ConvergencePoint> curve;
  double optimum_loss = 0.0;
  double reference_grad_norm = 0.0;
  std::size_t reference_iterations = 0;
  std::size_t fit_from = 0;  // the fit uses curve points with users >= fit_from
  LogLogFit fit;             // slope = -alpha
  double alpha = 0.0;
  double final_ratio = 0.0;  // suboptimality(users) / suboptimality(users / 10)
  double min_alpha = 0.4;
  double max_alpha = 1.2;
  double max_final_ratio = 0.5;
  bool passed = false;
};

/// Finds the optimum by batch gradient descent (gradient norm <= 1e-8),
/// runs `users` SAROS visits (cycling over the sessions) and tracks the
/// averaged iterate's suboptimality. The power law is fitted over the last
/// decade of visits, [users / 10, users]. Throws std::runtime_error when the
/// reference does not converge.
ConvergenceReport check_convergence_rate(const ConvexInstance& instance,
                                         const TrainerConfig& cfg, std::size_t users);

struct BoxplotSummary {
  std::size_t n = 0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

/// Linear-interpolation quantiles (R type 7) plus mean.
BoxplotSummary summarize(std::vector<double> values);

struct BlockDistribution {
  std::vector<std::pair<UserIndex, std::size_t>> counts;  // every train user
  std::vector<std::pair<UserIndex, double>> log10_counts; // users with >= 1 block
  BoxplotSummary log10_summary;
  BoxplotSummary count_summary;
  std::map<std::size_t, std::size_t> sizes;               // size -> frequency
  std::vector<std::pair<std::string, std::size_t>> size_bins;
};

/// Size bins [1,5), [5,10), ..., [30,35), [35,inf).
BlockDistribution block_distribution(std::span<const UserSession> train,
                                     SegmenterOptions options = {});

}  // namespace saros

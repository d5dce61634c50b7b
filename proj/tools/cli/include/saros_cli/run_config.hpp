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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "saros/diagnostics.hpp"
#include "saros/metrics.hpp"
#include "saros/optimizers.hpp"

namespace saros::cli {

enum class Algorithm { saros, bpr, bpr_batch, mf, mostpop };

Algorithm parse_algorithm(std::string_view name);
std::string_view algorithm_name(Algorithm algorithm);

/// Sizes of the synthetic checks run by `diagnose`.
struct DiagnoseConfig {
  std::size_t synthetic_items = 5;
  double synthetic_positive_probability = 0.5;
  std::size_t synthetic_length = 12;
  std::size_t unbiasedness_runs = 50000;
  std::size_t variance_runs = 2000;
  std::vector<std::size_t> variance_ks = {1, 2, 4, 8, 16};
  ConvexInstanceSpec convex;
  double convex_eta = 0.5;
  double convex_mu = 0.01;
  std::size_t convex_visits = 200;
};

/// Everything that affects a run's results. Loaded from one flat JSON object.
struct RunConfig {
  std::filesystem::path input;
  std::string format = "tsv";
  std::optional<double> binarize_threshold = 4.0;
  double split_fraction = 0.8;

  Algorithm algorithm = Algorithm::saros;
  TrainerConfig trainer;
  bool auto_thresholds = false;
  std::size_t bpr_draws_per_epoch = 0;
  double batch_grad_tol = 0.0;

  std::vector<std::size_t> ks = {5, 10};
  CandidatePolicy candidates = CandidatePolicy::test_items;

  DiagnoseConfig diagnose;

  // locations, excluded from the config hash (as is `input`)
  std::filesystem::path output_dir = "saros_out";
  std::optional<std::filesystem::path> dataset_dir;
  std::optional<std::filesystem::path> checkpoint;

  std::filesystem::path data_dir() const { return dataset_dir.value_or(output_dir); }
  std::filesystem::path checkpoint_path() const {
    return checkpoint.value_or(output_dir / "model.ckpt");
  }

  /// Hash of every result-affecting setting (locations excluded).
  std::uint64_t hash() const;
  /// Canonical JSON with every key, defaults filled in.
  std::string canonical_json(bool include_locations = true) const;
};

/// Throws ConfigError on unknown keys, wrong types and invalid values.
/// Relative paths are resolved against `base_dir`.
RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace saros::cli

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

#include <cstdint>
#include <filesystem>
#include <string>

#include "saros/diagnostics.hpp"
#include "saros/ingest.hpp"
#include "saros/metrics.hpp"
#include "saros/optimizers.hpp"

namespace saros {

/// Provenance stamped on every artifact.
struct ArtifactMeta {
  std::string tool = kToolName;
  std::string version = kToolVersion;
  std::uint64_t config_hash = 0;

  /// "# saros 0.1.0 config_hash=<16 hex digits>"
  std::string comment_line() const;
};

std::string hex64(std::uint64_t value);

// JSON documents. Each carries a "meta" object.
std::string stats_json(const DatasetStats& stats, const ArtifactMeta& meta);
std::string eval_json(const EvalReport& report, const ArtifactMeta& meta);
std::string unbiasedness_json(const UnbiasednessReport& report, const ArtifactMeta& meta);
std::string variance_json(const VarianceReport& report, const ArtifactMeta& meta);
std::string convergence_json(const ConvergenceReport& report, const ArtifactMeta& meta);

// CSV files, first line is the meta comment.
void write_block_counts_csv(const std::filesystem::path& path,
                            std::span<const std::pair<UserIndex, std::size_t>> counts,
                            const ArtifactMeta& meta);
void write_block_sizes_csv(const std::filesystem::path& path,
                           const std::map<std::size_t, std::size_t>& sizes,
                           const ArtifactMeta& meta);
void write_block_distribution(const std::filesystem::path& dir, const BlockDistribution& dist,
                              const ArtifactMeta& meta);
/// time_s,updates,users_seen,train_loss
void write_trace_csv(const std::filesystem::path& path, const TrainTrace& trace,
                     const ArtifactMeta& meta);
/// user,blocks_total,blocks_applied,kept
void write_gates_csv(const std::filesystem::path& path, const TrainTrace& trace,
                     const ArtifactMeta& meta);
/// user,K,ap,ndcg
void write_user_metrics_csv(const std::filesystem::path& path, const EvalReport& report,
                            const ArtifactMeta& meta);
/// users,suboptimality
void write_convergence_csv(const std::filesystem::path& path, const ConvergenceReport& report,
                           const ArtifactMeta& meta);
/// blocks,variance,standard_error
void write_variance_csv(const std::filesystem::path& path, const VarianceReport& report,
                        const ArtifactMeta& meta);

void write_text_file(const std::filesystem::path& path, const std::string& contents);

/// Shortest round-trip representation of a double.
std::string format_double(double value);

}  // namespace saros

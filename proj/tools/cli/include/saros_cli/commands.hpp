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

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "saros/ingest.hpp"
#include "saros_cli/run_config.hpp"

namespace saros::cli {

/// Raised when a diagnostic check fails; names the report to look at.
class CheckFailed : public std::runtime_error {
 public:
  CheckFailed(std::vector<std::filesystem::path> reports);
  const std::vector<std::filesystem::path>& reports() const noexcept { return reports_; }

 private:
  std::vector<std::filesystem::path> reports_;
};

/// Contents of dataset.json.
struct DatasetManifest {
  std::size_t n_users = 0;
  std::size_t n_items = 0;
  std::size_t train_events = 0;
  std::size_t test_events = 0;
};

DatasetManifest read_manifest(const std::filesystem::path& dataset_dir);
std::vector<UserSession> read_split(const std::filesystem::path& file);

void cmd_ingest(const RunConfig& config, std::ostream& log);
void cmd_train(const RunConfig& config, std::ostream& log);
void cmd_eval(const RunConfig& config, std::ostream& log);
void cmd_stats(const RunConfig& config, std::ostream& log);
/// Throws CheckFailed after writing every report when any check fails.
void cmd_diagnose(const RunConfig& config, std::ostream& log);

/// `argv`-style entry point; returns the process exit code.
int run(int argc, char** argv);

}  // namespace saros::cli

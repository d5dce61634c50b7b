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

#include "saros/artifacts.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace saros {
namespace {

using nlohmann::ordered_json;

ordered_json meta_json(const ArtifactMeta& meta) {
  return {{"tool", meta.tool}, {"version", meta.version}, {"config_hash", hex64(meta.config_hash)}};
}

// JSON has no NaN or infinity; those become null.
ordered_json number(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

ordered_json numbers(std::span<const double> xs) {
  auto out = ordered_json::array();
  for (double x : xs) out.push_back(number(x));
  return out;
}

ordered_json fit_json(const LogLogFit& fit) {
  return {{"slope", number(fit.slope)},
          {"intercept", number(fit.intercept)},
          {"r_squared", number(fit.r_squared)}};
}

class CsvFile {
 public:
  CsvFile(const std::filesystem::path& path, const ArtifactMeta& meta, const char* header)
      : out_(path, std::ios::trunc), path_(path) {
    if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out_ << meta.comment_line() << '\n' << header << '\n';
  }
  ~CsvFile() noexcept(false) {
    out_.flush();
    if (!out_ && std::uncaught_exceptions() == 0) {
      throw std::runtime_error("failed to write " + path_.string());
    }
  }
  std::ofstream& stream() { return out_; }

 private:
  std::ofstream out_;
  std::filesystem::path path_;
};

}  // namespace

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string ArtifactMeta::comment_line() const {
  return "# " + tool + " " + version + " config_hash=" + hex64(config_hash);
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw std::runtime_error("double formatting failed");
  return {buf, ptr};
}

std::string stats_json(const DatasetStats& stats, const ArtifactMeta& meta) {
  ordered_json j;
  j["meta"] = meta_json(meta);
  j["n_users"] = stats.n_users;
  j["n_items"] = stats.n_items;
  j["n_interactions"] = stats.n_interactions;
  j["sparsity"] = number(stats.sparsity);
  j["avg_pos"] = number(stats.avg_pos);
  j["avg_neg"] = number(stats.avg_neg);
  j["pos_fraction_train"] = number(stats.pos_fraction_train);
  j["pos_fraction_test"] = number(stats.pos_fraction_test);
  std::size_t blocks = 0;
  for (const auto& [size, freq] : stats.block_sizes) blocks += freq;
  j["train_blocks"] = blocks;
  j["block_counts_csv"] = "block_counts.csv";
  j["block_sizes_csv"] = "block_sizes.csv";
  return j.dump(2) + "\n";
}

std::string eval_json(const EvalReport& report, const ArtifactMeta& meta) {
  ordered_json j;
  j["meta"] = meta_json(meta);
  ordered_json map_at = ordered_json::object(), ndcg_at = ordered_json::object();
  for (const auto& [k, v] : report.map_at) map_at[std::to_string(k)] = number(v);
  for (const auto& [k, v] : report.ndcg_at) ndcg_at[std::to_string(k)] = number(v);
  j["map_at"] = map_at;
  j["ndcg_at"] = ndcg_at;
  j["test_loss"] = report.test_loss ? number(*report.test_loss) : ordered_json(nullptr);
  j["loss_users"] = report.loss_users;
  j["n_users_evaluated"] = report.n_users_evaluated;
  ordered_json skipped = ordered_json::object();
  for (const auto& [reason, count] : report.skipped) skipped[reason] = count;
  j["skipped_users"] = skipped;
  return j.dump(2) + "\n";
}

std::string unbiasedness_json(const UnbiasednessReport& r, const ArtifactMeta& meta) {
  ordered_json j;
  j["meta"] = meta_json(meta);
  j["monte_carlo_runs"] = r.monte_carlo_runs;
  j["runs_used"] = r.runs_used;
  j["max_deviation"] = number(r.max_deviation);
  j["max_standard_errors"] = number(r.max_standard_errors);
  j["tolerance_standard_errors"] = r.tolerance_standard_errors;
  j["within_tolerance"] = r.within_tolerance;
  j["block_mean"] = numbers(r.block_mean);
  j["reference_mean"] = numbers(r.reference_mean);
  j["standard_error"] = numbers(r.standard_error);
  return j.dump(2) + "\n";
}

std::string variance_json(const VarianceReport& r, const ArtifactMeta& meta) {
  ordered_json j;
  j["meta"] = meta_json(meta);
  auto points = ordered_json::array();
  for (const auto& p : r.points) {
    points.push_back({{"blocks", p.blocks},
                      {"variance", number(p.variance)},
                      {"standard_error", number(p.standard_error)}});
  }
  j["points"] = points;
  j["fit"] = fit_json(r.fit);
  j["non_increasing"] = r.non_increasing;
  j["max_slope"] = r.max_slope;
  j["min_r_squared"] = r.min_r_squared;
  j["passed"] = r.passed;
  return j.dump(2) + "\n";
}

std::string convergence_json(const ConvergenceReport& r, const ArtifactMeta& meta) {
  ordered_json j;
  j["meta"] = meta_json(meta);
  j["optimum_loss"] = number(r.optimum_loss);
  j["reference_grad_norm"] = number(r.reference_grad_norm);
  j["reference_iterations"] = r.reference_iterations;
  j["fit_from"] = r.fit_from;
  j["alpha"] = number(r.alpha);
  j["fit"] = fit_json(r.fit);
  j["final_ratio"] = number(r.final_ratio);
  j["min_alpha"] = r.min_alpha;
  j["max_alpha"] = r.max_alpha;
  j["max_final_ratio"] = r.max_final_ratio;
  j["passed"] = r.passed;
  auto curve = ordered_json::array();
  for (const auto& p : r.curve) {
    curve.push_back({{"users", p.users}, {"suboptimality", number(p.suboptimality)}});
  }
  j["curve"] = curve;
  return j.dump(2) + "\n";
}

void write_block_counts_csv(const std::filesystem::path& path,
                            std::span<const std::pair<UserIndex, std::size_t>> counts,
                            const ArtifactMeta& meta) {
  CsvFile csv(path, meta, "user_index,count");
  for (const auto& [user, count] : counts) csv.stream() << user << ',' << count << '\n';
}

void write_block_sizes_csv(const std::filesystem::path& path,
                           const std::map<std::size_t, std::size_t>& sizes,
                           const ArtifactMeta& meta) {
  CsvFile csv(path, meta, "size,frequency");
  for (const auto& [size, freq] : sizes) csv.stream() << size << ',' << freq << '\n';
}

void write_block_distribution(const std::filesystem::path& dir, const BlockDistribution& dist,
                              const ArtifactMeta& meta) {
  write_block_counts_csv(dir / "block_counts.csv", dist.counts, meta);
  write_block_sizes_csv(dir / "block_sizes.csv", dist.sizes, meta);
  {
    CsvFile csv(dir / "block_counts_log10.csv", meta, "user_index,log10_count");
    for (const auto& [user, lg] : dist.log10_counts) {
      csv.stream() << user << ',' << format_double(lg) << '\n';
    }
  }
  {
    CsvFile csv(dir / "block_boxplot.csv", meta, "quantile,value");
    const auto& s = dist.log10_summary;
    if (s.n > 0) {
      for (const auto& [name, value] :
           {std::pair{"min", s.min}, {"q1", s.q1}, {"median", s.median}, {"q3", s.q3},
            {"max", s.max}, {"mean", s.mean}}) {
        csv.stream() << name << ',' << format_double(value) << '\n';
      }
    }
  }
  {
    CsvFile csv(dir / "block_size_bins.csv", meta, "bin,frequency");
    for (const auto& [bin, freq] : dist.size_bins) csv.stream() << bin << ',' << freq << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path, const TrainTrace& trace,
                     const ArtifactMeta& meta) {
  CsvFile csv(path, meta, "time_s,updates,users_seen,train_loss");
  for (const auto& s : trace.curve) {
    csv.stream() << format_double(s.time_s) << ',' << s.updates << ',' << s.users_seen << ','
                 << format_double(s.train_loss) << '\n';
  }
}

void write_gates_csv(const std::filesystem::path& path, const TrainTrace& trace,
                     const ArtifactMeta& meta) {
  CsvFile csv(path, meta, "user,blocks_total,blocks_applied,kept");
  for (const auto& g : trace.gates) {
    csv.stream() << g.user << ',' << g.blocks_total << ',' << g.blocks_applied << ','
                 << (g.kept ? 1 : 0) << '\n';
  }
}

void write_user_metrics_csv(const std::filesystem::path& path, const EvalReport& report,
                            const ArtifactMeta& meta) {
  CsvFile csv(path, meta, "user,K,ap,ndcg");
  for (const auto& m : report.per_user) {
    csv.stream() << m.user << ',' << m.k << ',' << format_double(m.ap) << ','
                 << format_double(m.ndcg) << '\n';
  }
}

void write_convergence_csv(const std::filesystem::path& path, const ConvergenceReport& report,
                           const ArtifactMeta& meta) {
  CsvFile csv(path, meta, "users,suboptimality");
  for (const auto& p : report.curve) {
    csv.stream() << p.users << ',' << format_double(p.suboptimality) << '\n';
  }
}

void write_variance_csv(const std::filesystem::path& path, const VarianceReport& report,
                        const ArtifactMeta& meta) {
  CsvFile csv(path, meta, "blocks,variance,standard_error");
  for (const auto& p : report.points) {
    csv.stream() << p.blocks << ',' << format_double(p.variance) << ','
                 << format_double(p.standard_error) << '\n';
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << contents;
  if (!out) throw std::runtime_error("failed to write " + path.string());
}

}  // namespace saros

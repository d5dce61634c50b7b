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

#include "saros_cli/commands.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "saros/artifacts.hpp"
#include "saros/checkpoint.hpp"
#include "saros/diagnostics.hpp"
#include "saros/metrics.hpp"
#include "saros/optimizers.hpp"

namespace saros::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string join_paths(const std::vector<fs::path>& paths) {
  std::string out;
  for (const auto& p : paths) out += (out.empty() ? "" : ", ") + p.string();
  return out;
}

ArtifactMeta meta_of(const RunConfig& config) { return ArtifactMeta{.config_hash = config.hash()}; }

void require_file(const fs::path& path, const char* what) {
  if (!fs::is_regular_file(path)) {
    throw std::runtime_error(std::string(what) + " not found: " + path.string());
  }
}

void prepare_output(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw std::runtime_error("cannot create output directory " + dir.string());
  }
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

void close_out(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("failed to write " + path.string());
}

void write_split(const fs::path& path, std::span<const UserSession> sessions,
                 const ArtifactMeta& meta) {
  auto out = open_out(path);
  out << meta.comment_line() << '\n';
  write_sessions(out, sessions);
  close_out(out, path);
}

void write_dictionary(const fs::path& path, const IdDictionary& dict, const ArtifactMeta& meta) {
  auto out = open_out(path);
  out << meta.comment_line() << '\n';
  dict.save(out);
  close_out(out, path);
}

std::size_t event_count(std::span<const UserSession> sessions) {
  std::size_t n = 0;
  for (const auto& s : sessions) n += s.events.size();
  return n;
}

void emit_stats(const fs::path& out_dir, std::span<const UserSession> train,
                std::span<const UserSession> test, std::size_t n_users, std::size_t n_items,
                const RunConfig& config, std::ostream& log) {
  const ArtifactMeta meta = meta_of(config);
  const BlockDistribution dist = block_distribution(train, config.trainer.segmenter);
  std::vector<std::size_t> sizes;
  for (const auto& [size, freq] : dist.sizes) sizes.insert(sizes.end(), freq, size);
  DatasetStats stats = compute_stats(train, test, dist.counts, sizes);
  // dictionary sizes, so users or items seen only in dropped parts still count
  if (stats.n_users != n_users || stats.n_items != n_items) {
    const double cells = static_cast<double>(n_users) * static_cast<double>(n_items);
    stats.n_users = n_users;
    stats.n_items = n_items;
    stats.sparsity = cells > 0 ? 1.0 - static_cast<double>(stats.n_interactions) / cells : 0.0;
  }
  write_text_file(out_dir / "stats.json", stats_json(stats, meta));
  write_block_distribution(out_dir, dist, meta);
  log << "users " << stats.n_users << ", items " << stats.n_items << ", interactions "
      << stats.n_interactions << ", sparsity " << format_double(stats.sparsity) << '\n';
}

TrainerConfig effective_trainer(const RunConfig& config, std::span<const UserSession> train,
                                std::ostream& log) {
  TrainerConfig cfg = config.trainer;
  if (config.auto_thresholds) {
    const BlockThresholds th = auto_thresholds(train, cfg.segmenter);
    cfg.b_min = th.b_min;
    cfg.b_max = th.b_max;
    log << "thresholds b=" << cfg.b_min << " B=" << cfg.b_max << '\n';
  }
  return cfg;
}

void write_mostpop(const fs::path& path, std::span<const ItemIndex> ranking,
                   std::span<const std::size_t> counts, const ArtifactMeta& meta) {
  auto out = open_out(path);
  out << meta.comment_line() << '\n' << "rank,item,positive_count\n";
  for (std::size_t r = 0; r < ranking.size(); ++r) {
    out << r + 1 << ',' << ranking[r] << ',' << counts[ranking[r]] << '\n';
  }
  close_out(out, path);
}

std::vector<ItemIndex> read_mostpop(const fs::path& path, std::size_t n_items) {
  require_file(path, "popularity ranking");
  std::ifstream in(path);
  std::vector<ItemIndex> ranking;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    std::istringstream fields(line);
    std::size_t rank = 0, item = 0, count = 0;
    char c1 = 0, c2 = 0;
    if (!(fields >> rank >> c1 >> item >> c2 >> count) || c1 != ',' || c2 != ',' ||
        item >= n_items) {
      throw ParseError(line_no, "bad popularity ranking row in " + path.string());
    }
    ranking.push_back(static_cast<ItemIndex>(item));
  }
  return ranking;
}

ordered_json train_summary(const RunConfig& config, const TrainerConfig& cfg,
                           const TrainTrace& trace, const ArtifactMeta& meta) {
  ordered_json j;
  j["meta"] = {{"tool", meta.tool}, {"version", meta.version}, {"config_hash", hex64(meta.config_hash)}};
  j["algorithm"] = algorithm_name(config.algorithm);
  j["b_min"] = cfg.b_min;
  j["b_max"] = cfg.b_max;
  j["epochs_run"] = trace.epochs_run;
  j["users_seen"] = trace.users_seen;
  j["applied_updates"] = trace.applied_updates;
  j["pair_evaluations"] = trace.pair_evaluations;
  std::size_t kept = 0;
  for (const auto& g : trace.gates) kept += g.kept ? 1 : 0;
  j["users_kept"] = kept;
  j["users_rolled_back"] = trace.gates.size() - kept;
  j["draws"] = trace.draws;
  j["accepted"] = trace.accepted;
  j["rejected"] = trace.rejected;
  j["stopped_by_budget"] = trace.stopped_by_budget;
  return j;
}

}  // namespace

CheckFailed::CheckFailed(std::vector<fs::path> reports)
    : std::runtime_error("diagnostic check failed, see " + join_paths(reports)),
      reports_(std::move(reports)) {}

DatasetManifest read_manifest(const fs::path& dataset_dir) {
  const fs::path path = dataset_dir / "dataset.json";
  require_file(path, "dataset manifest");
  std::ifstream in(path);
  try {
    const auto j = nlohmann::json::parse(in);
    DatasetManifest m;
    m.n_users = j.at("n_users").get<std::size_t>();
    m.n_items = j.at("n_items").get<std::size_t>();
    m.train_events = j.at("train_events").get<std::size_t>();
    m.test_events = j.at("test_events").get<std::size_t>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("bad dataset manifest " + path.string() + ": " + e.what());
  }
}

std::vector<UserSession> read_split(const fs::path& file) {
  require_file(file, "dataset split");
  std::ifstream in(file);
  try {
    return read_sessions(in);
  } catch (const ParseError& e) {
    throw std::runtime_error(file.string() + ": " + e.what());
  }
}

void cmd_ingest(const RunConfig& config, std::ostream& log) {
  require_file(config.input, "input file");
  const LogFormat format = LogFormat::from_tag(config.format);
  const fs::path out_dir = config.data_dir();
  prepare_output(out_dir);

  ParsedLog parsed;
  try {
    parsed = parse_log(config.input, format);
  } catch (const ParseError& e) {
    throw std::runtime_error(config.input.string() + ": " + e.what());
  }
  const auto records = binarize(parsed.records, config.binarize_threshold);
  const auto sessions = build_sessions(records);
  const auto split = temporal_split(sessions, config.split_fraction);

  const ArtifactMeta meta = meta_of(config);
  write_split(out_dir / "interactions.tsv", sessions, meta);
  write_split(out_dir / "train.tsv", split.train, meta);
  write_split(out_dir / "test.tsv", split.test, meta);
  write_dictionary(out_dir / "users.dict", parsed.users, meta);
  write_dictionary(out_dir / "items.dict", parsed.items, meta);

  ordered_json manifest;
  manifest["meta"] = {{"tool", meta.tool}, {"version", meta.version}, {"config_hash", hex64(meta.config_hash)}};
  manifest["n_users"] = parsed.users.size();
  manifest["n_items"] = parsed.items.size();
  manifest["train_events"] = event_count(split.train);
  manifest["test_events"] = event_count(split.test);
  manifest["train_users"] = split.train.size();
  manifest["test_users"] = split.test.size();
  manifest["files"] = {{"interactions", "interactions.tsv"}, {"train", "train.tsv"},
                       {"test", "test.tsv"}, {"users", "users.dict"}, {"items", "items.dict"}};
  write_text_file(out_dir / "dataset.json", manifest.dump(2) + "\n");
  log << "ingested " << records.size() << " interactions: train " << event_count(split.train)
      << ", test " << event_count(split.test) << '\n';

  emit_stats(out_dir, split.train, split.test, parsed.users.size(), parsed.items.size(), config,
             log);
}

void cmd_stats(const RunConfig& config, std::ostream& log) {
  const DatasetManifest m = read_manifest(config.data_dir());
  const auto train = read_split(config.data_dir() / "train.tsv");
  const auto test = read_split(config.data_dir() / "test.tsv");
  prepare_output(config.output_dir);
  emit_stats(config.output_dir, train, test, m.n_users, m.n_items, config, log);
}

void cmd_train(const RunConfig& config, std::ostream& log) {
  const DatasetManifest m = read_manifest(config.data_dir());
  const auto train = read_split(config.data_dir() / "train.tsv");
  prepare_output(config.output_dir);
  const ArtifactMeta meta = meta_of(config);

  if (config.algorithm == Algorithm::mostpop) {
    const auto ranking = mostpop_rank(train);
    const auto counts = positive_counts(train, m.n_items);
    write_mostpop(config.output_dir / "mostpop.csv", ranking, counts, meta);
    log << "ranked " << ranking.size() << " items by popularity\n";
    return;
  }

  const TrainerConfig cfg = effective_trainer(config, train, log);
  ModelParams initial = ModelParams::random(m.n_users, m.n_items, cfg.dim, cfg.seed);
  TrainResult result;
  switch (config.algorithm) {
    case Algorithm::saros:
      result = saros_train(train, std::move(initial), cfg);
      break;
    case Algorithm::bpr:
      result = bpr_train(train, std::move(initial), cfg,
                         BprOptions{.draws_per_epoch = config.bpr_draws_per_epoch});
      break;
    case Algorithm::bpr_batch:
      result = bpr_batch_train(train, std::move(initial), cfg, config.batch_grad_tol);
      break;
    case Algorithm::mf:
      result = mf_train(train, std::move(initial), cfg);
      break;
    case Algorithm::mostpop:
      break;
  }
  if (!result.params.all_finite()) {
    throw std::runtime_error("training diverged: non-finite parameters (lower eta?)");
  }

  save_checkpoint(config.checkpoint_path(),
                  Checkpoint{result.params, cfg.seed, meta.config_hash, kToolVersion});
  write_trace_csv(config.output_dir / "trace.csv", result.trace, meta);
  if (config.algorithm == Algorithm::saros) {
    write_gates_csv(config.output_dir / "gates.csv", result.trace, meta);
  }
  write_text_file(config.output_dir / "train.json",
                  train_summary(config, cfg, result.trace, meta).dump(2) + "\n");
  log << algorithm_name(config.algorithm) << ": " << result.trace.applied_updates
      << " updates over " << result.trace.users_seen << " users in "
      << format_double(result.trace.elapsed_s) << " s"
      << (result.trace.stopped_by_budget ? " (time budget reached)" : "") << '\n';
}

void cmd_eval(const RunConfig& config, std::ostream& log) {
  const DatasetManifest m = read_manifest(config.data_dir());
  const auto test = read_split(config.data_dir() / "test.tsv");
  prepare_output(config.output_dir);
  const ArtifactMeta meta = meta_of(config);
  const EvalOptions options{.ks = config.ks, .candidates = config.candidates};

  EvalReport report;
  if (config.algorithm == Algorithm::mostpop) {
    const auto ranking = read_mostpop(config.output_dir / "mostpop.csv", m.n_items);
    std::vector<double> score(m.n_items, -static_cast<double>(ranking.size()) - 1.0);
    for (std::size_t r = 0; r < ranking.size(); ++r) {
      score[ranking[r]] = -static_cast<double>(r);
    }
    report = evaluate([&](UserIndex, ItemIndex i) { return score[i]; }, m.n_users, m.n_items,
                      test, options);
  } else {
    const fs::path ckpt_path = config.checkpoint_path();
    require_file(ckpt_path, "checkpoint");
    const Checkpoint ckpt = load_checkpoint(ckpt_path);
    const ModelParams& p = ckpt.params;
    if (p.n_users() != m.n_users || p.n_items() != m.n_items) {
      std::ostringstream msg;
      msg << "checkpoint shape (users " << p.n_users() << " x items " << p.n_items() << " x dim "
          << p.dim() << ") does not match dataset shape (users " << m.n_users << " x items "
          << m.n_items << ")";
      throw std::runtime_error(msg.str());
    }
    report = evaluate(p, config.trainer.loss(), test, options);
  }

  write_text_file(config.output_dir / "eval.json", eval_json(report, meta));
  write_user_metrics_csv(config.output_dir / "eval_users.csv", report, meta);
  for (const auto& [k, v] : report.map_at) {
    log << "MAP@" << k << " " << format_double(v) << "  NDCG@" << k << " "
        << format_double(report.ndcg_at.at(k)) << '\n';
  }
  if (report.test_loss) log << "test loss " << format_double(*report.test_loss) << '\n';
}

void cmd_diagnose(const RunConfig& config, std::ostream& log) {
  prepare_output(config.output_dir);
  const ArtifactMeta meta = meta_of(config);
  const DiagnoseConfig& d = config.diagnose;
  const LossConfig loss = config.trainer.loss();
  const std::uint64_t seed = config.trainer.seed;
  std::vector<fs::path> failed;

  const auto model = SyntheticUserModel::uniform(d.synthetic_items, d.synthetic_positive_probability,
                                                 d.synthetic_length, seed);
  const ModelParams params = ModelParams::random(1, d.synthetic_items, config.trainer.dim, seed);

  const fs::path unbiased_path = config.output_dir / "unbiasedness.json";
  const auto unbiased = check_lemma1_unbiasedness(model, params, loss, d.unbiasedness_runs);
  write_text_file(unbiased_path, unbiasedness_json(unbiased, meta));
  log << "unbiasedness: max deviation " << format_double(unbiased.max_standard_errors)
      << " standard errors over " << unbiased.runs_used << " runs: "
      << (unbiased.within_tolerance ? "PASS" : "FAIL") << '\n';
  if (!unbiased.within_tolerance) failed.push_back(unbiased_path);

  const fs::path variance_path = config.output_dir / "variance.json";
  const auto variance = check_variance_decay(model, params, loss, d.variance_ks, d.variance_runs);
  write_text_file(variance_path, variance_json(variance, meta));
  write_variance_csv(config.output_dir / "variance.csv", variance, meta);
  log << "variance decay: slope " << format_double(variance.fit.slope) << ", R^2 "
      << format_double(variance.fit.r_squared) << ": " << (variance.passed ? "PASS" : "FAIL")
      << '\n';
  if (!variance.passed) failed.push_back(variance_path);

  ConvexInstanceSpec spec = d.convex;
  spec.seed = seed;
  const auto instance = make_convex_instance(spec);
  TrainerConfig cfg;
  cfg.eta = d.convex_eta;
  cfg.mu = d.convex_mu;
  cfg.dim = spec.dim;
  cfg.b_min = 1;
  cfg.b_max = kNoCap;
  cfg.seed = seed;
  cfg.record_updates = false;
  cfg.segmenter = config.trainer.segmenter;
  const fs::path convergence_path = config.output_dir / "convergence.json";
  const auto convergence = check_convergence_rate(instance, cfg, d.convex_visits);
  write_text_file(convergence_path, convergence_json(convergence, meta));
  write_convergence_csv(config.output_dir / "convergence.csv", convergence, meta);
  log << "convergence: alpha " << format_double(convergence.alpha) << ", final ratio "
      << format_double(convergence.final_ratio) << ": "
      << (convergence.passed ? "PASS" : "FAIL") << '\n';
  if (!convergence.passed) failed.push_back(convergence_path);

  if (!failed.empty()) throw CheckFailed(std::move(failed));
}

int run(int argc, char** argv) {
  CLI::App app{"Sequential pairwise ranking trainer for implicit feedback"};
  app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
  app.require_subcommand(1);
  fs::path config_path;
  std::optional<fs::path> out_dir;

  const std::pair<const char*, const char*> commands[] = {
      {"ingest", "Parse, binarize and split a raw log into the canonical dataset"},
      {"train", "Train the configured algorithm on the ingested train split"},
      {"eval", "Score the test split with a trained model"},
      {"stats", "Dataset statistics and block distribution"},
      {"diagnose", "Synthetic unbiasedness, variance and convergence checks"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "Run configuration (flat JSON)")->required();
    sub->add_option("--out", out_dir, "Output directory, overrides output_dir");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    RunConfig config = load_run_config(config_path);
    if (out_dir) config.output_dir = *out_dir;
    if (command == "ingest") {
      cmd_ingest(config, std::cerr);
    } else if (command == "train") {
      cmd_train(config, std::cerr);
    } else if (command == "eval") {
      cmd_eval(config, std::cerr);
    } else if (command == "stats") {
      cmd_stats(config, std::cerr);
    } else {
      cmd_diagnose(config, std::cerr);
    }
  } catch (const CheckFailed& e) {
    std::cerr << kToolName << ": " << e.what() << '\n';
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << kToolName << ": config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << kToolName << ": error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace saros::cli

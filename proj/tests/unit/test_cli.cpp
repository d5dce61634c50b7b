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

#include <cstdlib>
#include <sstream>

#include <sys/wait.h>

#include "doctest.h"
#include "fixtures.hpp"
#include "json.hpp"
#include "saros/checkpoint.hpp"
#include "saros_cli/commands.hpp"
#include "saros_cli/run_config.hpp"

namespace fs = std::filesystem;
using namespace saros;
using namespace saros::cli;

namespace {

const fs::path kData = SAROS_TEST_DATA;

RunConfig tiny_config(const fixture::TempDir& dir) {
  auto c = parse_run_config(R"({"input": "ratings.tsv", "dim": 3, "epochs": 2, "seed": 5})",
                            kData / "tiny");
  c.output_dir = dir / "out";
  return c;
}

RunConfig fixture_config(const fixture::TempDir& dir, const std::string& extra = "") {
  auto c = parse_run_config(
      R"({"input": "fixture_ratings.tsv", "dim": 6, "epochs": 2, "eta": 0.05)" + extra + "}",
      kData);
  c.output_dir = dir / "out";
  return c;
}

struct Invocation {
  int status = 0;
  std::string err;
};

Invocation saros_cli(const fixture::TempDir& dir, const std::string& args) {
  const fs::path err = dir / "stderr.txt";
  const std::string line =
      std::string("\"") + SAROS_CLI_PATH + "\" " + args + " 2>\"" + err.string() + "\"";
  const int raw = std::system(line.c_str());
  const int status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return {status, fixture::read_file(err)};
}

void write(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
}

}  // namespace

TEST_CASE("config keys, types and validation") {
  const fs::path base = "/data";
  const auto c = parse_run_config(R"({"input": "r.tsv", "eta": 0.2, "ks": [1, 3]})", base);
  CHECK(c.input == base / "r.tsv");
  CHECK(c.trainer.eta == 0.2);
  CHECK(c.ks == std::vector<std::size_t>{1, 3});
  CHECK(c.binarize_threshold == 4.0);
  CHECK_FALSE(parse_run_config(R"({"binarize_threshold": null})", base).binarize_threshold);

  auto rejects = [&](const std::string& text, const std::string& fragment) {
    try {
      parse_run_config(text, base);
      FAIL("accepted " << text);
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find(fragment) != std::string::npos);
    }
  };
  rejects(R"({"etta": 0.1})", "unknown config key 'etta'");
  rejects(R"({"eta": "fast"})", "eta");
  rejects(R"({"dim": 2.5})", "dim");
  rejects(R"({"trainer": {"eta": 0.1}})", "trainer");
  rejects(R"({"algorithm": "als"})", "unknown algorithm 'als'");
  rejects(R"({"eta": 0})", "eta");
  rejects(R"({"b_min": 4, "b_max": 2})", "b_");
  rejects(R"({"split_fraction": 1.0})", "split_fraction");
  rejects(R"({"ks": [0]})", "ks");
  rejects(R"({"format": "parquet"})", "parquet");
  rejects(R"([1, 2])", "");
  rejects(R"({"eta": )", "");
}

TEST_CASE("config hash ignores locations") {
  const auto a = parse_run_config(R"({"input": "a.tsv", "output_dir": "x", "seed": 3})", "/one");
  const auto b = parse_run_config(R"({"input": "b.tsv", "output_dir": "y", "seed": 3})", "/two");
  const auto c = parse_run_config(R"({"input": "a.tsv", "output_dir": "x", "seed": 4})", "/one");
  CHECK(a.hash() == b.hash());
  CHECK(a.hash() != c.hash());
  CHECK(a.canonical_json(false) == b.canonical_json(false));
  CHECK(a.canonical_json(true) != b.canonical_json(true));
  // canonical JSON parses back to the same settings
  const auto again = parse_run_config(a.canonical_json(true), "/elsewhere");
  CHECK(again.hash() == a.hash());
}

TEST_CASE("ingest of the hand-traced log matches the golden files") {
  fixture::TempDir dir("cli-golden");
  const auto c = tiny_config(dir);
  std::ostringstream log;
  cmd_ingest(c, log);
  const fs::path out = c.output_dir;
  CHECK(fixture::read_data_lines(out / "train.tsv") ==
        fixture::read_file(kData / "tiny" / "train.golden"));
  CHECK(fixture::read_data_lines(out / "test.tsv") ==
        fixture::read_file(kData / "tiny" / "test.golden"));
  CHECK(fixture::read_data_lines(out / "users.dict") ==
        fixture::read_file(kData / "tiny" / "users.golden"));
  CHECK(fixture::read_data_lines(out / "items.dict") ==
        fixture::read_file(kData / "tiny" / "items.golden"));
  const auto manifest = read_manifest(out);
  CHECK(manifest.n_users == 3);
  CHECK(manifest.n_items == 5);
  CHECK(manifest.train_events == 7);
  CHECK(manifest.test_events == 3);
  CHECK(read_split(out / "train.tsv").size() == 2);
  for (const char* name : {"interactions.tsv", "stats.json", "block_counts.csv", "block_sizes.csv"}) {
    CHECK(fs::exists(out / name));
  }
  // every artifact opens with the metadata line
  CHECK(fixture::read_file(out / "train.tsv").rfind("# ", 0) == 0);
}

TEST_CASE("train and eval write their artifacts and are reproducible") {
  fixture::TempDir dir("cli-repeat");
  auto c = fixture_config(dir, R"(, "trace_every": 20)");
  std::ostringstream log;
  cmd_ingest(c, log);
  cmd_train(c, log);
  cmd_eval(c, log);
  for (const char* name : {"model.ckpt", "trace.csv", "gates.csv", "train.json", "eval.json",
                           "eval_users.csv"}) {
    CHECK(fs::exists(c.output_dir / name));
  }
  const auto checkpoint = load_checkpoint(c.output_dir / "model.ckpt");
  CHECK(checkpoint.config_hash == c.hash());
  CHECK(checkpoint.seed == c.trainer.seed);
  const auto eval = nlohmann::json::parse(fixture::read_file(c.output_dir / "eval.json"));
  CHECK(eval.contains("meta"));

  const auto first = fixture::read_file(c.output_dir / "model.ckpt");
  const auto first_eval = fixture::read_file(c.output_dir / "eval.json");
  c.output_dir = dir / "again";
  cmd_ingest(c, log);
  cmd_train(c, log);
  cmd_eval(c, log);
  CHECK(fixture::read_file(c.output_dir / "model.ckpt") == first);
  CHECK(fixture::read_file(c.output_dir / "eval.json") == first_eval);
}

TEST_CASE("every algorithm trains and evaluates") {
  for (const char* algorithm : {"bpr", "bpr_batch", "mf"}) {
    fixture::TempDir dir("cli-algo");
    auto c = fixture_config(dir, std::string(R"(, "algorithm": ")") + algorithm + "\"");
    std::ostringstream log;
    cmd_ingest(c, log);
    cmd_train(c, log);
    cmd_eval(c, log);
    CHECK(fs::exists(c.output_dir / "model.ckpt"));
    CHECK_FALSE(fs::exists(c.output_dir / "gates.csv"));
    CHECK(fs::exists(c.output_dir / "eval.json"));
  }
}

TEST_CASE("most-popular baseline writes a ranking, not a checkpoint") {
  fixture::TempDir dir("cli-mostpop");
  auto c = fixture_config(dir, R"(, "algorithm": "mostpop")");
  std::ostringstream log;
  cmd_ingest(c, log);
  cmd_train(c, log);
  CHECK(fs::exists(c.output_dir / "mostpop.csv"));
  CHECK_FALSE(fs::exists(c.output_dir / "model.ckpt"));
  cmd_eval(c, log);
  CHECK(fs::exists(c.output_dir / "eval.json"));
}

TEST_CASE("a tiny time budget stops training early") {
  fixture::TempDir dir("cli-budget");
  auto c = fixture_config(dir, R"(, "epochs": 100000, "time_budget_s": 0.05)");
  std::ostringstream log;
  cmd_ingest(c, log);
  cmd_train(c, log);
  const auto train = nlohmann::json::parse(fixture::read_file(c.output_dir / "train.json"));
  CHECK(train.at("stopped_by_budget") == true);
}

TEST_CASE("automatic thresholds come from the train split") {
  fixture::TempDir dir("cli-auto");
  auto c = fixture_config(dir, R"(, "auto_thresholds": true)");
  std::ostringstream log;
  cmd_ingest(c, log);
  cmd_train(c, log);
  const auto train = nlohmann::json::parse(fixture::read_file(c.output_dir / "train.json"));
  const auto expected = auto_thresholds(read_split(c.output_dir / "train.tsv"));
  CHECK(train.at("b_min") == expected.b_min);
  CHECK(train.at("b_max") == expected.b_max);
}

TEST_CASE("stats reports the block distribution") {
  fixture::TempDir dir("cli-stats");
  auto c = fixture_config(dir);
  std::ostringstream log;
  cmd_ingest(c, log);
  fs::remove(c.output_dir / "stats.json");
  cmd_stats(c, log);
  const auto stats = nlohmann::json::parse(fixture::read_file(c.output_dir / "stats.json"));
  CHECK(stats.contains("train_blocks"));
  CHECK(fs::exists(c.output_dir / "block_boxplot.csv"));
  CHECK(fs::exists(c.output_dir / "block_size_bins.csv"));
}

TEST_CASE("binary: exit codes and messages") {
  fixture::TempDir dir("cli-binary");
  const fs::path config = dir / "run.json";

  write(config, R"({"input": "does-not-exist.tsv"})");
  auto r = saros_cli(dir, "ingest --config \"" + config.string() + "\"");
  CHECK(r.status == 1);
  CHECK(r.err.find((dir / "does-not-exist.tsv").string()) != std::string::npos);

  write(config, R"({"algorithm": "als"})");
  r = saros_cli(dir, "train --config \"" + config.string() + "\"");
  CHECK(r.status == 2);
  CHECK(r.err.find("als") != std::string::npos);

  r = saros_cli(dir, "train");
  CHECK(r.status != 0);
  r = saros_cli(dir, "--version >/dev/null");
  CHECK(r.status == 0);
}

TEST_CASE("binary: eval against a dataset of another shape") {
  fixture::TempDir dir("cli-shape");
  const fs::path config = dir / "run.json";
  write(config, "{\"input\": \"" + (kData / "fixture_ratings.tsv").string() +
                    "\", \"dim\": 4, \"epochs\": 1}");
  const std::string out = " --out \"" + (dir / "run").string() + "\"";
  REQUIRE(saros_cli(dir, "ingest --config \"" + config.string() + "\"" + out).status == 0);
  REQUIRE(saros_cli(dir, "train --config \"" + config.string() + "\"" + out).status == 0);

  write(config, "{\"input\": \"" + (kData / "tiny" / "ratings.tsv").string() +
                    "\", \"dim\": 4, \"epochs\": 1}");
  REQUIRE(saros_cli(dir, "ingest --config \"" + config.string() + "\" --out \"" +
                             (dir / "tiny").string() + "\"")
              .status == 0);
  fs::copy_file(dir / "run" / "model.ckpt", dir / "tiny" / "model.ckpt");
  const auto r = saros_cli(dir, "eval --config \"" + config.string() + "\" --out \"" +
                                    (dir / "tiny").string() + "\"");
  CHECK(r.status == 1);
  CHECK(r.err.find("users 50 x items 40") != std::string::npos);
  CHECK(r.err.find("users 3 x items 5") != std::string::npos);
}

TEST_CASE("diagnose on a small budget writes every report") {
  fixture::TempDir dir("cli-diagnose");
  auto c = parse_run_config(
      R"({"unbiasedness_runs": 2000, "variance_runs": 300, "convex_users": 60, "convex_visits": 60})",
      dir.path());
  c.output_dir = dir / "out";
  std::ostringstream log;
  try {
    cmd_diagnose(c, log);
  } catch (const CheckFailed& e) {
    CHECK_FALSE(e.reports().empty());
  }
  for (const char* name : {"unbiasedness.json", "variance.json", "variance.csv", "convergence.json",
                           "convergence.csv"}) {
    CHECK(fs::exists(c.output_dir / name));
  }
  CHECK(log.str().find("unbiasedness") != std::string::npos);
}

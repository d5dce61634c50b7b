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

#include "saros_cli/run_config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "json.hpp"
#include "saros/checkpoint.hpp"
#include "saros/ingest.hpp"
#include "saros/types.hpp"

namespace saros::cli {
namespace {

using nlohmann::json;

std::string_view threshold_policy_name(ThresholdPolicy p) {
  return p == ThresholdPolicy::cap_and_rollback_below_b ? "cap_and_rollback_below_b"
                                                        : "rollback_outside_range";
}

std::string_view iterate_policy_name(IteratePolicy p) {
  return p == IteratePolicy::last ? "last" : "average";
}

std::string_view frozen_name(FrozenFactor f) {
  switch (f) {
    case FrozenFactor::none: return "none";
    case FrozenFactor::users: return "users";
    case FrozenFactor::items: return "items";
  }
  return "none";
}

std::string_view segmenter_name(SegmenterMode m) {
  return m == SegmenterMode::either_order ? "either_order" : "negatives_first";
}

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw ConfigError("config key '" + key + "': " + why);
}

double as_double(const std::string& key, const json& v) {
  if (!v.is_number()) bad(key, "expected a number");
  return v.get<double>();
}

std::size_t as_size(const std::string& key, const json& v) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    bad(key, "expected a non-negative integer");
  }
  return v.get<std::size_t>();
}

bool as_bool(const std::string& key, const json& v) {
  if (!v.is_boolean()) bad(key, "expected true or false");
  return v.get<bool>();
}

std::string as_string(const std::string& key, const json& v) {
  if (!v.is_string()) bad(key, "expected a string");
  return v.get<std::string>();
}

std::vector<std::size_t> as_sizes(const std::string& key, const json& v) {
  if (!v.is_array() || v.empty()) bad(key, "expected a non-empty array of integers");
  std::vector<std::size_t> out;
  for (const auto& x : v) out.push_back(as_size(key, x));
  return out;
}

template <typename Enum>
Enum as_enum(const std::string& key, const json& v,
             std::initializer_list<std::pair<std::string_view, Enum>> names) {
  const std::string s = as_string(key, v);
  for (const auto& [name, value] : names) {
    if (s == name) return value;
  }
  std::string known;
  for (const auto& [name, value] : names) known += (known.empty() ? "" : ", ") + std::string(name);
  bad(key, "unknown value '" + s + "' (expected one of: " + known + ")");
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

json to_json(const RunConfig& c, bool include_locations) {
  const TrainerConfig& t = c.trainer;
  json j;
  j["format"] = c.format;
  j["binarize_threshold"] = c.binarize_threshold ? json(*c.binarize_threshold) : json(nullptr);
  j["split_fraction"] = c.split_fraction;
  j["algorithm"] = algorithm_name(c.algorithm);
  j["eta"] = t.eta;
  j["mu"] = t.mu;
  j["dim"] = t.dim;
  j["b_min"] = t.b_min;
  j["b_max"] = t.b_max;
  j["auto_thresholds"] = c.auto_thresholds;
  j["epochs"] = t.epochs;
  j["seed"] = t.seed;
  j["threshold_policy"] = threshold_policy_name(t.threshold_policy);
  j["iterate_policy"] = iterate_policy_name(t.iterate_policy);
  j["time_budget_s"] = t.time_budget ? json(t.time_budget->count()) : json(nullptr);
  j["shuffle_users"] = t.shuffle_users;
  j["segmenter"] = segmenter_name(t.segmenter.mode);
  j["distinct_items"] = t.segmenter.distinct_items;
  j["frozen"] = frozen_name(t.frozen);
  j["trace_every"] = t.trace_every;
  j["bpr_draws_per_epoch"] = c.bpr_draws_per_epoch;
  j["batch_grad_tol"] = c.batch_grad_tol;
  j["ks"] = c.ks;
  j["candidates"] = c.candidates == CandidatePolicy::test_items ? "test_items" : "full_catalog";
  const DiagnoseConfig& d = c.diagnose;
  j["synthetic_items"] = d.synthetic_items;
  j["synthetic_positive_probability"] = d.synthetic_positive_probability;
  j["synthetic_length"] = d.synthetic_length;
  j["unbiasedness_runs"] = d.unbiasedness_runs;
  j["variance_runs"] = d.variance_runs;
  j["variance_ks"] = d.variance_ks;
  j["convex_users"] = d.convex.users;
  j["convex_items"] = d.convex.items;
  j["convex_dim"] = d.convex.dim;
  j["convex_min_length"] = d.convex.min_length;
  j["convex_max_length"] = d.convex.max_length;
  j["convex_frozen"] = frozen_name(d.convex.frozen);
  j["convex_eta"] = d.convex_eta;
  j["convex_mu"] = d.convex_mu;
  j["convex_visits"] = d.convex_visits;
  if (include_locations) {
    j["input"] = c.input.generic_string();
    j["output_dir"] = c.output_dir.generic_string();
    j["dataset_dir"] = c.dataset_dir ? json(c.dataset_dir->generic_string()) : json(nullptr);
    j["checkpoint"] = c.checkpoint ? json(c.checkpoint->generic_string()) : json(nullptr);
  }
  return j;
}

FrozenFactor as_frozen(const std::string& key, const json& v) {
  return as_enum<FrozenFactor>(
      key, v,
      {{"none", FrozenFactor::none}, {"users", FrozenFactor::users}, {"items", FrozenFactor::items}});
}

}  // namespace

Algorithm parse_algorithm(std::string_view name) {
  if (name == "saros") return Algorithm::saros;
  if (name == "bpr") return Algorithm::bpr;
  if (name == "bpr_batch") return Algorithm::bpr_batch;
  if (name == "mf") return Algorithm::mf;
  if (name == "mostpop") return Algorithm::mostpop;
  throw ConfigError("unknown algorithm '" + std::string(name) +
                    "' (expected saros, bpr, bpr_batch, mf or mostpop)");
}

std::string_view algorithm_name(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::saros: return "saros";
    case Algorithm::bpr: return "bpr";
    case Algorithm::bpr_batch: return "bpr_batch";
    case Algorithm::mf: return "mf";
    case Algorithm::mostpop: return "mostpop";
  }
  return "saros";
}

std::string RunConfig::canonical_json(bool include_locations) const {
  return to_json(*this, include_locations).dump();
}

std::uint64_t RunConfig::hash() const { return fnv1a64(canonical_json(false)); }

RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");

  RunConfig c;
  TrainerConfig& t = c.trainer;
  DiagnoseConfig& d = c.diagnose;
  using Setter = std::function<void(const std::string&, const json&)>;
  const std::map<std::string, Setter, std::less<>> setters = {
      {"input", [&](auto& k, auto& v) { c.input = resolve(base_dir, as_string(k, v)); }},
      {"format", [&](auto& k, auto& v) { c.format = as_string(k, v); }},
      {"binarize_threshold",
       [&](auto& k, auto& v) {
         c.binarize_threshold =
             v.is_null() ? std::nullopt : std::optional<double>(as_double(k, v));
       }},
      {"split_fraction", [&](auto& k, auto& v) { c.split_fraction = as_double(k, v); }},
      {"algorithm", [&](auto& k, auto& v) { c.algorithm = parse_algorithm(as_string(k, v)); }},
      {"eta", [&](auto& k, auto& v) { t.eta = as_double(k, v); }},
      {"mu", [&](auto& k, auto& v) { t.mu = as_double(k, v); }},
      {"dim", [&](auto& k, auto& v) { t.dim = as_size(k, v); }},
      {"b_min", [&](auto& k, auto& v) { t.b_min = as_size(k, v); }},
      {"b_max", [&](auto& k, auto& v) { t.b_max = as_size(k, v); }},
      {"auto_thresholds", [&](auto& k, auto& v) { c.auto_thresholds = as_bool(k, v); }},
      {"epochs", [&](auto& k, auto& v) { t.epochs = as_size(k, v); }},
      {"seed", [&](auto& k, auto& v) { t.seed = as_size(k, v); }},
      {"threshold_policy",
       [&](auto& k, auto& v) {
         t.threshold_policy = as_enum<ThresholdPolicy>(
             k, v,
             {{"cap_and_rollback_below_b", ThresholdPolicy::cap_and_rollback_below_b},
              {"rollback_outside_range", ThresholdPolicy::rollback_outside_range}});
       }},
      {"iterate_policy",
       [&](auto& k, auto& v) {
         t.iterate_policy = as_enum<IteratePolicy>(
             k, v, {{"last", IteratePolicy::last}, {"average", IteratePolicy::average}});
       }},
      {"time_budget_s",
       [&](auto& k, auto& v) {
         if (v.is_null()) {
           t.time_budget.reset();
         } else {
           t.time_budget = std::chrono::duration<double>(as_double(k, v));
         }
       }},
      {"shuffle_users", [&](auto& k, auto& v) { t.shuffle_users = as_bool(k, v); }},
      {"segmenter",
       [&](auto& k, auto& v) {
         t.segmenter.mode = as_enum<SegmenterMode>(
             k, v,
             {{"either_order", SegmenterMode::either_order},
              {"negatives_first", SegmenterMode::negatives_first}});
       }},
      {"distinct_items", [&](auto& k, auto& v) { t.segmenter.distinct_items = as_bool(k, v); }},
      {"frozen", [&](auto& k, auto& v) { t.frozen = as_frozen(k, v); }},
      {"trace_every", [&](auto& k, auto& v) { t.trace_every = as_size(k, v); }},
      {"bpr_draws_per_epoch", [&](auto& k, auto& v) { c.bpr_draws_per_epoch = as_size(k, v); }},
      {"batch_grad_tol", [&](auto& k, auto& v) { c.batch_grad_tol = as_double(k, v); }},
      {"ks", [&](auto& k, auto& v) { c.ks = as_sizes(k, v); }},
      {"candidates",
       [&](auto& k, auto& v) {
         c.candidates = as_enum<CandidatePolicy>(
             k, v,
             {{"test_items", CandidatePolicy::test_items},
              {"full_catalog", CandidatePolicy::full_catalog}});
       }},
      {"synthetic_items", [&](auto& k, auto& v) { d.synthetic_items = as_size(k, v); }},
      {"synthetic_positive_probability",
       [&](auto& k, auto& v) { d.synthetic_positive_probability = as_double(k, v); }},
      {"synthetic_length", [&](auto& k, auto& v) { d.synthetic_length = as_size(k, v); }},
      {"unbiasedness_runs", [&](auto& k, auto& v) { d.unbiasedness_runs = as_size(k, v); }},
      {"variance_runs", [&](auto& k, auto& v) { d.variance_runs = as_size(k, v); }},
      {"variance_ks", [&](auto& k, auto& v) { d.variance_ks = as_sizes(k, v); }},
      {"convex_users", [&](auto& k, auto& v) { d.convex.users = as_size(k, v); }},
      {"convex_items", [&](auto& k, auto& v) { d.convex.items = as_size(k, v); }},
      {"convex_dim", [&](auto& k, auto& v) { d.convex.dim = as_size(k, v); }},
      {"convex_min_length", [&](auto& k, auto& v) { d.convex.min_length = as_size(k, v); }},
      {"convex_max_length", [&](auto& k, auto& v) { d.convex.max_length = as_size(k, v); }},
      {"convex_frozen", [&](auto& k, auto& v) { d.convex.frozen = as_frozen(k, v); }},
      {"convex_eta", [&](auto& k, auto& v) { d.convex_eta = as_double(k, v); }},
      {"convex_mu", [&](auto& k, auto& v) { d.convex_mu = as_double(k, v); }},
      {"convex_visits", [&](auto& k, auto& v) { d.convex_visits = as_size(k, v); }},
      {"output_dir",
       [&](auto& k, auto& v) { c.output_dir = resolve(base_dir, as_string(k, v)); }},
      {"dataset_dir",
       [&](auto& k, auto& v) {
         if (v.is_null()) {
           c.dataset_dir.reset();
         } else {
           c.dataset_dir = resolve(base_dir, as_string(k, v));
         }
       }},
      {"checkpoint",
       [&](auto& k, auto& v) {
         if (v.is_null()) {
           c.checkpoint.reset();
         } else {
           c.checkpoint = resolve(base_dir, as_string(k, v));
         }
       }},
  };

  for (const auto& [key, value] : doc.items()) {
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown config key '" + key + "'");
    if (value.is_object() || (value.is_array() && key != "ks" && key != "variance_ks")) {
      bad(key, "config is flat, nested values are not allowed");
    }
    it->second(key, value);
  }

  t.validate();
  LogFormat::from_tag(c.format);
  if (!(c.split_fraction > 0.0 && c.split_fraction < 1.0)) {
    bad("split_fraction", "must lie strictly between 0 and 1");
  }
  for (std::size_t k : c.ks) {
    if (k == 0) bad("ks", "cutoffs must be positive");
  }
  if (c.batch_grad_tol < 0.0) bad("batch_grad_tol", "must be non-negative");
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str(), path.parent_path());
}

}  // namespace saros::cli

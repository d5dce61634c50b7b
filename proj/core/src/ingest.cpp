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

#include "saros/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace saros {
namespace {

std::vector<std::string_view> split(std::string_view line, std::string_view delimiter) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delimiter, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + delimiter.size();
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  text = trim(text);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

bool is_blank(std::string_view line) { return trim(line).empty(); }

}  // namespace

LogFormat LogFormat::from_tag(std::string_view tag) {
  LogFormat f;
  if (tag == "tsv" || tag == "canonical" || tag == "ml-100k") {
    f.delimiter = "\t";
  } else if (tag == "csv") {
    f.delimiter = ",";
  } else if (tag == "ml-1m") {
    f.delimiter = "::";
  } else {
    throw ConfigError("unknown log format '" + std::string(tag) + "'");
  }
  return f;
}

std::uint32_t IdDictionary::intern(std::string_view id) {
  std::string key(id);
  if (auto it = index_.find(key); it != index_.end()) return it->second;
  const auto index = static_cast<std::uint32_t>(ids_.size());
  ids_.push_back(key);
  index_.emplace(std::move(key), index);
  return index;
}

std::optional<std::uint32_t> IdDictionary::find(std::string_view id) const {
  if (auto it = index_.find(std::string(id)); it != index_.end()) return it->second;
  return std::nullopt;
}

void IdDictionary::save(std::ostream& out) const {
  for (std::size_t i = 0; i < ids_.size(); ++i) out << ids_[i] << '\t' << i << '\n';
}

IdDictionary IdDictionary::load(std::istream& in) {
  IdDictionary dict;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line) || line.front() == '#') continue;
    const auto fields = split(line, "\t");
    std::uint32_t index = 0;
    if (fields.size() != 2 || !parse_number(fields[1], index)) {
      throw ParseError(line_no, "expected 'id<TAB>index'");
    }
    if (index != dict.size()) throw ParseError(line_no, "dictionary indices must be dense");
    dict.intern(fields[0]);
    if (dict.size() != index + 1u) throw ParseError(line_no, "duplicate id");
  }
  return dict;
}

ParsedLog parse_log(std::istream& in, const LogFormat& format) {
  if (format.delimiter.empty()) throw ConfigError("empty delimiter");
  std::size_t needed = std::max({format.user_column, format.item_column, format.value_column});
  if (format.timestamp_column) needed = std::max(needed, *format.timestamp_column);

  ParsedLog log;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && format.skip_header) continue;
    if (is_blank(line)) continue;
    const auto fields = split(line, format.delimiter);
    if (fields.size() <= needed) {
      throw ParseError(line_no, "expected at least " + std::to_string(needed + 1) +
                                    " columns, found " + std::to_string(fields.size()));
    }
    const auto user_id = trim(fields[format.user_column]);
    const auto item_id = trim(fields[format.item_column]);
    if (user_id.empty() || item_id.empty()) throw ParseError(line_no, "empty user or item id");

    RatedInteraction record;
    if (!parse_number(fields[format.value_column], record.value) ||
        !std::isfinite(record.value)) {
      throw ParseError(line_no, "bad feedback value '" +
                                    std::string(fields[format.value_column]) + "'");
    }
    if (format.timestamp_column) {
      if (!parse_number(fields[*format.timestamp_column], record.timestamp)) {
        throw ParseError(line_no, "bad timestamp '" +
                                      std::string(fields[*format.timestamp_column]) + "'");
      }
    } else {
      record.timestamp = static_cast<Timestamp>(line_no);
    }
    record.user = log.users.intern(user_id);
    record.item = log.items.intern(item_id);
    log.records.push_back(record);
  }
  return log;
}

ParsedLog parse_log(const std::filesystem::path& path, const LogFormat& format) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_log(in, format);
}

void write_log(std::ostream& out, const ParsedLog& log, const LogFormat& format) {
  std::size_t columns = std::max({format.user_column, format.item_column, format.value_column});
  if (format.timestamp_column) columns = std::max(columns, *format.timestamp_column);
  ++columns;
  if (format.skip_header) out << "header\n";
  std::vector<std::string> fields(columns);
  for (const auto& r : log.records) {
    std::fill(fields.begin(), fields.end(), std::string("0"));
    fields[format.user_column] = log.users.id_of(r.user);
    fields[format.item_column] = log.items.id_of(r.item);
    std::ostringstream value;
    value.precision(17);
    value << r.value;
    fields[format.value_column] = value.str();
    if (format.timestamp_column) fields[*format.timestamp_column] = std::to_string(r.timestamp);
    for (std::size_t c = 0; c < columns; ++c) {
      if (c) out << format.delimiter;
      out << fields[c];
    }
    out << '\n';
  }
}

std::vector<InteractionRecord> binarize(std::span<const RatedInteraction> records,
                                        std::optional<double> threshold) {
  std::vector<InteractionRecord> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    const bool positive = threshold ? r.value >= *threshold : r.value != 0.0;
    out.push_back({r.user, r.item, positive ? Feedback::positive : Feedback::negative,
                   r.timestamp});
  }
  return out;
}

std::vector<UserSession> build_sessions(std::span<const InteractionRecord> records) {
  UserIndex max_user = 0;
  for (const auto& r : records) max_user = std::max(max_user, r.user);
  std::vector<std::vector<Event>> per_user(records.empty() ? 0 : max_user + 1u);
  for (const auto& r : records) per_user[r.user].push_back({r.item, r.feedback, r.timestamp});

  std::vector<UserSession> sessions;
  for (std::size_t u = 0; u < per_user.size(); ++u) {
    auto& events = per_user[u];
    if (events.empty()) continue;
    std::stable_sort(events.begin(), events.end(),
                     [](const Event& a, const Event& b) { return a.timestamp < b.timestamp; });
    sessions.push_back({static_cast<UserIndex>(u), std::move(events)});
  }
  return sessions;
}

SplitResult temporal_split(std::span<const UserSession> sessions, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train fraction must lie in (0, 1)");
  }
  SplitResult split;
  for (const auto& s : sessions) {
    const auto n = s.events.size();
    // floor; the small epsilon keeps exact products such as 0.8 * 10 at 8
    const auto cut = static_cast<std::size_t>(
        std::floor(train_fraction * static_cast<double>(n) + 1e-9));
    const auto mid = s.events.begin() + static_cast<std::ptrdiff_t>(std::min(cut, n));
    if (mid != s.events.begin()) split.train.push_back({s.user, {s.events.begin(), mid}});
    if (mid != s.events.end()) split.test.push_back({s.user, {mid, s.events.end()}});
  }
  return split;
}

void write_sessions(std::ostream& out, std::span<const UserSession> sessions) {
  out << "user\titem\tlabel\ttimestamp\n";
  for (const auto& s : sessions) {
    for (const auto& e : s.events) {
      out << s.user << '\t' << e.item << '\t' << (e.feedback == Feedback::positive ? 1 : 0)
          << '\t' << e.timestamp << '\n';
    }
  }
}

std::vector<UserSession> read_sessions(std::istream& in) {
  std::vector<UserSession> sessions;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line) || line.front() == '#') continue;
    if (!header_seen) {
      header_seen = true;
      if (trim(line) == "user\titem\tlabel\ttimestamp") continue;
    }
    const auto fields = split(line, "\t");
    UserIndex user = 0;
    ItemIndex item = 0;
    int label = 0;
    Timestamp ts = 0;
    if (fields.size() != 4 || !parse_number(fields[0], user) || !parse_number(fields[1], item) ||
        !parse_number(fields[2], label) || !parse_number(fields[3], ts) ||
        (label != 0 && label != 1)) {
      throw ParseError(line_no, "expected 'user<TAB>item<TAB>0|1<TAB>timestamp'");
    }
    if (sessions.empty() || sessions.back().user != user) {
      for (const auto& s : sessions) {
        if (s.user == user) throw ParseError(line_no, "user events are not contiguous");
      }
      sessions.push_back({user, {}});
    }
    auto& events = sessions.back().events;
    if (!events.empty() && events.back().timestamp > ts) {
      throw ParseError(line_no, "events are not in time order");
    }
    events.push_back({item, label ? Feedback::positive : Feedback::negative, ts});
  }
  return sessions;
}

DatasetStats compute_stats(std::span<const UserSession> train, std::span<const UserSession> test,
                           std::span<const std::pair<UserIndex, std::size_t>> block_counts,
                           std::span<const std::size_t> block_sizes) {
  DatasetStats stats;
  std::set<UserIndex> users;
  std::set<ItemIndex> items;
  std::size_t pos_train = 0, n_train = 0, pos_test = 0, n_test = 0;
  auto scan = [&](std::span<const UserSession> part, std::size_t& pos, std::size_t& n) {
    for (const auto& s : part) {
      users.insert(s.user);
      for (const auto& e : s.events) {
        items.insert(e.item);
        ++n;
        if (e.feedback == Feedback::positive) ++pos;
      }
    }
  };
  scan(train, pos_train, n_train);
  scan(test, pos_test, n_test);

  stats.n_users = users.size();
  stats.n_items = items.size();
  stats.n_interactions = n_train + n_test;
  const double cells = static_cast<double>(stats.n_users) * static_cast<double>(stats.n_items);
  stats.sparsity = cells > 0 ? 1.0 - static_cast<double>(stats.n_interactions) / cells : 0.0;
  if (stats.n_users > 0) {
    const double nu = static_cast<double>(stats.n_users);
    stats.avg_pos = static_cast<double>(pos_train + pos_test) / nu;
    stats.avg_neg = static_cast<double>(stats.n_interactions - pos_train - pos_test) / nu;
  }
  if (n_train > 0) stats.pos_fraction_train = 100.0 * static_cast<double>(pos_train) / n_train;
  if (n_test > 0) stats.pos_fraction_test = 100.0 * static_cast<double>(pos_test) / n_test;
  stats.block_counts.assign(block_counts.begin(), block_counts.end());
  for (auto size : block_sizes) ++stats.block_sizes[size];
  return stats;
}

}  // namespace saros

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

#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "saros/ingest.hpp"

using namespace saros;

namespace {

ParsedLog parse(const std::string& text, const std::string& tag = "tsv") {
  std::istringstream in(text);
  return parse_log(in, LogFormat::from_tag(tag));
}

}  // namespace

TEST_CASE("parse_log counts records, users and items") {
  const auto log = parse("u1\ti1\t5\t10\nu2\ti2\t3\t11\nu1\ti3\t4\t12\nu2\ti1\t1\t13\n");
  CHECK(log.records.size() == 4);
  CHECK(log.users.size() == 2);
  CHECK(log.items.size() == 3);
  CHECK(log.records[2] == RatedInteraction{0, 2, 4.0, 12});
}

TEST_CASE("empty input gives empty output") {
  const auto log = parse("");
  CHECK(log.records.empty());
  CHECK(log.users.empty());
  CHECK(log.items.empty());
}

TEST_CASE("ml-1m double-colon format") {
  const auto log = parse("1::1193::5::978300760\n1::661::3::978302109\n", "ml-1m");
  REQUIRE(log.records.size() == 2);
  CHECK(log.records[1].value == 3.0);
  CHECK(log.records[1].timestamp == 978302109);
  CHECK(log.items.id_of(1) == "661");
}

TEST_CASE("csv with header") {
  LogFormat f = LogFormat::from_tag("csv");
  f.skip_header = true;
  std::istringstream in("user,item,rating,ts\na,b,1,5\n");
  const auto log = parse_log(in, f);
  REQUIRE(log.records.size() == 1);
  CHECK(log.users.id_of(0) == "a");
}

TEST_CASE("missing timestamp column uses the line number") {
  LogFormat f = LogFormat::from_tag("tsv");
  f.timestamp_column.reset();
  std::istringstream in("a\tx\t1\n\na\ty\t0\n");
  const auto log = parse_log(in, f);
  REQUIRE(log.records.size() == 2);
  CHECK(log.records[0].timestamp == 1);
  CHECK(log.records[1].timestamp == 3);
}

TEST_CASE("malformed lines report their line number") {
  try {
    parse("a\tb\t1\t1\na\tb\tnot-a-number\t2\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse("a\tb\n"), ParseError);
  CHECK_THROWS_AS(parse("a\tb\t1\tyesterday\n"), ParseError);
  CHECK_THROWS_AS(LogFormat::from_tag("parquet"), ConfigError);
}

TEST_CASE("write_log then parse_log round-trips") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::ostringstream text;
    std::uniform_int_distribution<int> id(0, 9), rating(1, 5);
    const int n = 1 + trial % 17;
    for (int r = 0; r < n; ++r) {
      text << "user" << id(rng) << '\t' << "item" << id(rng) << '\t' << rating(rng) << '\t'
           << 1000 + r << '\n';
    }
    const auto first = parse(text.str());
    std::ostringstream again;
    write_log(again, first, LogFormat::from_tag("tsv"));
    const auto second = parse(again.str());
    CHECK(second.records == first.records);
    CHECK(second.users == first.users);
    CHECK(second.items == first.items);
  }
}

TEST_CASE("binarize at threshold 4") {
  const std::vector<RatedInteraction> in = {
      {0, 0, 5, 1}, {0, 1, 4, 2}, {0, 2, 3, 3}, {0, 3, 1, 4}};
  const auto out = binarize(in, 4.0);
  REQUIRE(out.size() == 4);
  CHECK(out[0].feedback == Feedback::positive);
  CHECK(out[1].feedback == Feedback::positive);
  CHECK(out[2].feedback == Feedback::negative);
  CHECK(out[3].feedback == Feedback::negative);

  const std::vector<RatedInteraction> at = {{0, 0, 4, 1}, {1, 1, 4, 2}};
  for (const auto& r : binarize(at, 4.0)) CHECK(r.feedback == Feedback::positive);

  const std::vector<RatedInteraction> clicks = {{0, 0, 1, 1}, {0, 1, 0, 2}};
  const auto passed = binarize(clicks, std::nullopt);
  CHECK(passed[0].feedback == Feedback::positive);
  CHECK(passed[1].feedback == Feedback::negative);
}

TEST_CASE("build_sessions sorts stably by time") {
  const std::vector<InteractionRecord> records = {{1, 0, Feedback::positive, 5},
                                                  {0, 1, Feedback::negative, 9},
                                                  {1, 2, Feedback::negative, 3},
                                                  {1, 3, Feedback::positive, 5}};
  const auto sessions = build_sessions(records);
  REQUIRE(sessions.size() == 2);
  CHECK(sessions[0].user == 0);
  REQUIRE(sessions[1].events.size() == 3);
  CHECK(sessions[1].events[0].item == 2);
  CHECK(sessions[1].events[1].item == 0);
  CHECK(sessions[1].events[2].item == 3);
}

TEST_CASE("temporal split takes floor(0.8 n) events") {
  auto ten = fixture::session(0, "++--+-+-+-");
  const auto split = temporal_split(std::vector{ten}, 0.8);
  REQUIRE(split.train.size() == 1);
  CHECK(split.train[0].events.size() == 8);
  CHECK(split.test[0].events.size() == 2);
  CHECK(split.test[0].events[0].timestamp == 8);

  // floor(0.8 n) for n = 1..5 is 0, 1, 2, 3, 4
  const std::size_t expected[] = {0, 1, 2, 3, 4};
  for (std::size_t n = 1; n <= 5; ++n) {
    const auto s = temporal_split(std::vector{fixture::session(7, std::string(n, '+'))}, 0.8);
    const std::size_t got = s.train.empty() ? 0 : s.train[0].events.size();
    CHECK(got == expected[n - 1]);
    CHECK(s.test.at(0).events.size() == n - expected[n - 1]);
  }
  CHECK_THROWS_AS(temporal_split(std::vector{ten}, 1.0), ConfigError);
  CHECK_THROWS_AS(temporal_split(std::vector{ten}, 0.0), ConfigError);
}

TEST_CASE("dictionaries round-trip and reject gaps") {
  IdDictionary d;
  CHECK(d.intern("x") == 0);
  CHECK(d.intern("y") == 1);
  CHECK(d.intern("x") == 0);
  CHECK(d.find("z") == std::nullopt);
  std::stringstream buf;
  d.save(buf);
  CHECK(IdDictionary::load(buf) == d);

  std::istringstream gap("a\t0\nb\t2\n");
  CHECK_THROWS_AS(IdDictionary::load(gap), ParseError);
  std::istringstream dup("a\t0\na\t1\n");
  CHECK_THROWS_AS(IdDictionary::load(dup), ParseError);
}

TEST_CASE("canonical session files round-trip") {
  const std::vector<UserSession> sessions = {fixture::session(0, "-+-", {4, 2, 9}),
                                             fixture::session(3, "++", {1, 0})};
  std::stringstream buf;
  buf << "# comment\n";
  write_sessions(buf, sessions);
  CHECK(read_sessions(buf) == sessions);

  std::istringstream unordered("user\titem\tlabel\ttimestamp\n0\t1\t1\t5\n0\t2\t0\t4\n");
  CHECK_THROWS_AS(read_sessions(unordered), ParseError);
}

TEST_CASE("sparsity of 3 interactions over 2 x 2") {
  const std::vector<UserSession> train = {fixture::session(0, "+-", {0, 1})};
  const std::vector<UserSession> test = {fixture::session(1, "+", {0})};
  const auto stats = compute_stats(train, test, {}, {});
  CHECK(stats.n_users == 2);
  CHECK(stats.n_items == 2);
  CHECK(stats.n_interactions == 3);
  CHECK(stats.sparsity == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(stats.avg_pos == doctest::Approx(1.0));
  CHECK(stats.avg_neg == doctest::Approx(0.5));
  CHECK(stats.pos_fraction_train == doctest::Approx(50.0));
  CHECK(stats.pos_fraction_test == doctest::Approx(100.0));
}

TEST_CASE("tiny fixture matches the hand-traced split") {
  const std::filesystem::path dir = std::filesystem::path(SAROS_TEST_DATA) / "tiny";
  const auto parsed = parse_log(dir / "ratings.tsv", LogFormat::from_tag("ml-100k"));
  const auto split = temporal_split(build_sessions(binarize(parsed.records, 4.0)), 0.8);
  std::ostringstream train, test, users, items;
  write_sessions(train, split.train);
  write_sessions(test, split.test);
  parsed.users.save(users);
  parsed.items.save(items);
  CHECK(train.str() == fixture::read_file(dir / "train.golden"));
  CHECK(test.str() == fixture::read_file(dir / "test.golden"));
  CHECK(users.str() == fixture::read_file(dir / "users.golden"));
  CHECK(items.str() == fixture::read_file(dir / "items.golden"));
}

TEST_CASE("missing files name the path") {
  try {
    parse_log(std::filesystem::path("/nonexistent/ratings.dat"), LogFormat::from_tag("ml-1m"));
    FAIL("expected an error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("/nonexistent/ratings.dat") != std::string::npos);
  }
}

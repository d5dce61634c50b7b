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

#include <cstring>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "saros/checkpoint.hpp"

using namespace saros;

TEST_CASE("checkpoint round-trips bit-exactly") {
  std::mt19937_64 rng(31);
  Checkpoint c{fixture::gaussian_params(4, 6, 3, rng), 42, 0xdeadbeefcafef00dULL, "9.9.9"};
  c.params.items(2, 1) = -0.0;
  c.params.users(0, 0) = std::numeric_limits<double>::denorm_min();
  std::stringstream buf;
  save_checkpoint(buf, c);
  const Checkpoint back = load_checkpoint(buf);
  CHECK(back == c);
  CHECK(std::signbit(back.params.items(2, 1)));
}

TEST_CASE("checkpoint header layout") {
  Checkpoint c{ModelParams(1, 2, 1), 7, 9, "0.1.0"};
  c.params.users(0, 0) = 1.0;
  std::ostringstream out;
  save_checkpoint(out, c);
  const std::string bytes = out.str();
  CHECK(bytes.size() == 16 + 5 + 5 * 8 + 3 * 8);
  CHECK(bytes.substr(0, 8) == "SAROSCKP");
  CHECK(static_cast<unsigned char>(bytes[8]) == 1);
  CHECK(static_cast<unsigned char>(bytes[12]) == 5);
  CHECK(bytes.substr(16, 5) == "0.1.0");
  CHECK(static_cast<unsigned char>(bytes[21]) == 1);  // dim, low byte first
  double first = 0.0;
  std::memcpy(&first, bytes.data() + 16 + 5 + 40, 8);
  CHECK(first == 1.0);
}

TEST_CASE("corrupt checkpoints are rejected") {
  Checkpoint c{ModelParams(2, 2, 2), 1, 2, "0.1.0"};
  std::ostringstream out;
  save_checkpoint(out, c);
  const std::string good = out.str();

  std::string bad_magic = good;
  bad_magic[0] = 'X';
  std::istringstream a(bad_magic);
  CHECK_THROWS_AS(load_checkpoint(a), std::runtime_error);

  std::string bad_version = good;
  bad_version[8] = 2;
  std::istringstream b(bad_version);
  CHECK_THROWS_AS(load_checkpoint(b), std::runtime_error);

  std::istringstream truncated(good.substr(0, good.size() - 3));
  CHECK_THROWS_AS(load_checkpoint(truncated), std::runtime_error);

  CHECK_THROWS_AS(load_checkpoint(std::filesystem::path("/nonexistent/model.ckpt")),
                  std::runtime_error);
}

TEST_CASE("fnv1a64 reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

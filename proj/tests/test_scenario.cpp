// Copyright 2026 The Clook Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sstream>

#include <catch_amalgamated.hpp>

#include "clook/config.hpp"
#include "clook/scenario.hpp"
#include "generators.hpp"

using clook::Json;
using clook::Scenario;
using clook::ScenarioError;

namespace {

Scenario parse(const std::string& text) {
  std::istringstream in(text);
  return clook::parse_scenario(in);
}

void expect_error(const std::string& text, std::size_t line, const std::string& field) {
  CAPTURE(text);
  try {
    parse(text);
    FAIL("no error raised");
  } catch (const ScenarioError& e) {
    CHECK(e.line() == line);
    CHECK(e.field() == field);
    const std::string what = e.what();
    if (line > 0) CHECK(what.find("line " + std::to_string(line)) != std::string::npos);
  }
}

const char* kHeader = R"({"clocks":[{"id":"a"}]})";

}  // namespace

TEST_CASE("parse a two-clock scenario") {
  const Scenario sc = parse(
      R"({"clocks":[{"id":"boston","tz_offset_minutes":-240,"policy":{"rate_away":30}},)"
      R"({"id":"beijing","tz_offset_minutes":480}],"seed":7,"start_utc_ms":25200000,)"
      R"("duration_ms":60000,"link":{"latency_ms":200},"network":{"drop_probability":0.1}})"
      "\n\n"
      R"({"t_ms":0,"clock_id":"boston","face_count":1})"
      "\n"
      R"({"t_ms":100,"clock_id":"beijing","face_count":2})"
      "\n");
  REQUIRE(sc.clocks.size() == 2);
  CHECK(sc.clocks[0].id == "boston");
  CHECK(sc.clocks[0].tz_offset_minutes == -240);
  CHECK(sc.clocks[0].policy.at("rate_away") == 30);
  CHECK(sc.clocks[1].tz_offset_minutes == 480);
  CHECK(sc.seed == 7);
  CHECK(sc.start_utc_ms == 25'200'000);
  CHECK(sc.duration() == 60'000);
  REQUIRE(sc.link);
  CHECK(sc.link->at("latency_ms") == 200);
  REQUIRE(sc.events.size() == 2);
  CHECK(sc.events[1].clock_id == "beijing");
  CHECK(sc.events[1].face_count == 2);
}

TEST_CASE("duration defaults to the last event") {
  const Scenario sc = parse(std::string(kHeader) + "\n" +
                            R"({"t_ms":500,"clock_id":"a","face_count":1})" + "\n" +
                            R"({"t_ms":2500,"clock_id":"a","face_count":0})");
  CHECK(sc.duration() == 2'500);
  CHECK(parse(kHeader).duration() == 0);
}

TEST_CASE("errors name the line and field") {
  const std::string h = kHeader;
  expect_error("", 0, "clocks");
  expect_error("\n\n", 0, "clocks");
  expect_error("{not json", 1, "");
  expect_error(R"({"clocks":[]})", 1, "clocks");
  expect_error(R"({"clocks":[{"id":"a"}],"colour":1})", 1, "colour");
  expect_error(R"({"clocks":[{"id":""}]})", 1, "clocks[0].id");
  expect_error(R"({"clocks":[{"id":"a","tz_offset_minutes":900}]})", 1,
               "clocks[0].tz_offset_minutes");
  expect_error(R"({"clocks":[{"id":"a"},{"id":"a"}]})", 1, "clocks[1].id");
  expect_error(R"({"clocks":[{"id":"a"},{"id":"b"},{"id":"c"}]})", 1, "clocks");
  expect_error(R"({"clocks":[{"id":"a","policy":{"rate_away":-1}}]})", 1, "clocks[0].policy");
  expect_error(R"({"clocks":[{"id":"a"}],"link":{"drop_probability":2}})", 1, "link");
  expect_error(h + "\n" + R"({"t_ms":-1,"clock_id":"a","face_count":1})", 2, "t_ms");
  expect_error(h + "\n" + R"({"t_ms":0,"clock_id":"a","face_count":65})", 2, "face_count");
  expect_error(h + "\n" + R"({"t_ms":0,"clock_id":"a","face_count":"1"})", 2, "face_count");
  expect_error(h + "\n" + R"({"t_ms":0,"clock_id":7,"face_count":1})", 2, "clock_id");
  expect_error(h + "\n" + R"({"t_ms":0,"clock_id":"z","face_count":1})", 2, "clock_id");
  expect_error(h + "\n" + R"({"t_ms":0,"clock_id":"a","face_count":1,"x":1})", 2, "x");
  expect_error(h + "\n\n" + R"({"t_ms":5,"clock_id":"a","face_count":1})" + "\n" +
                   R"({"t_ms":5,"clock_id":"a","face_count":0})",
               4, "t_ms");
  expect_error(h + "\n" + "[1,2,3]", 2, "");
}

TEST_CASE("events must be sorted per clock only") {
  const Scenario sc = parse(R"({"clocks":[{"id":"a"},{"id":"b"}]})"
                            "\n"
                            R"({"t_ms":100,"clock_id":"a","face_count":1})"
                            "\n"
                            R"({"t_ms":50,"clock_id":"b","face_count":1})");
  CHECK(sc.events.size() == 2);
}

TEST_CASE("write and parse round trip") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Scenario sc = clook::testing::random_single_clock(seed, 30'000).scenario;
    std::ostringstream out;
    clook::write_scenario(out, sc);
    const Scenario back = parse(out.str());
    CHECK(clook::to_json(back) == clook::to_json(sc));
    CHECK(clook::to_json(clook::scenario_from_json(clook::to_json(sc))) == clook::to_json(sc));
  }
}

TEST_CASE("config parsing") {
  SECTION("defaults") {
    const auto cfg = clook::parse_config(Json::object());
    CHECK(cfg.warp.rate_away == 60.0);
    CHECK(cfg.hold_ms == 500);
    CHECK(cfg.sample_ms == 1'000);
    CHECK(cfg.drive.step_period_ms == 2);
  }
  SECTION("every section") {
    const auto cfg = clook::parse_config(Json::parse(R"({
      "warp": {"rate_away": 30, "resync": {"mode": "SLEW", "rate": 2}},
      "gear": {"minute": {"motor_to_ring_ratio": "1/2"}, "step_period_ms": 3},
      "link": {"latency_ms": 200, "jitter_ms": 5},
      "network": {"drop_probability": 0.1},
      "peer": {"heartbeat_ms": 250, "overlap_window_ms": 1000},
      "attention": {"hold_ms": 0},
      "sim": {"sample_ms": 100, "staleness_ms": 1500}})"));
    CHECK(cfg.warp.rate_away == 30.0);
    CHECK(cfg.warp.resync == clook::ResyncPolicy::slew(2.0));
    CHECK(cfg.drive.minute.motor_to_ring_ratio == clook::Rational{1, 2});
    CHECK(cfg.drive.step_period_ms == 3);
    CHECK(cfg.link.latency_ms == 200);
    CHECK(cfg.network.drop_probability == 0.1);
    CHECK(cfg.peer.heartbeat_ms == 250);
    CHECK(cfg.hold_ms == 0);
    CHECK(cfg.sample_ms == 100);
    CHECK(cfg.staleness_ms == 1'500);
    CHECK(clook::to_json(clook::parse_config(clook::to_json(cfg))) == clook::to_json(cfg));
  }
  SECTION("resync spellings") {
    CHECK(clook::parse_config(Json::parse(R"({"warp":{"resync":"SNAP"}})")).warp.resync ==
          clook::ResyncPolicy::snap());
    CHECK(clook::parse_config(Json::parse(R"({"warp":{"resync":"NONE"}})")).warp.resync ==
          clook::ResyncPolicy::none());
  }
  SECTION("rejections") {
    for (const char* bad : {
             R"({"warp":{"rate_away":-1}})",
             R"({"warp":{"resync":{"mode":"SLEW","rate":0.5}}})",
             R"({"warp":{"resync":"SOMETIMES"}})",
             R"({"warp":{"speed":2}})",
             R"({"gear":{"minute":{"steps_per_motor_rev":0}}})",
             R"({"link":{"drop_probability":1.5}})",
             R"({"peer":{"heartbeat_ms":3000}})",
             R"({"sim":{"sample_ms":0}})",
             R"({"attention":{"hold_ms":-5}})",
             R"({"extra":{}})",
             R"([])",
         }) {
      CAPTURE(bad);
      CHECK_THROWS_AS(clook::parse_config(Json::parse(bad)), clook::ValidationError);
    }
  }
}

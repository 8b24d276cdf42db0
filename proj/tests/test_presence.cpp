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

#include <algorithm>
#include <map>

#include <catch_amalgamated.hpp>

#include "clook/presence.hpp"
#include "presence_harness.hpp"

using clook::AttentionState;
using clook::kHourMs;
using clook::Millis;
using clook::PeerConfig;
using clook::PresenceMessage;
using clook::PresenceSession;
using clook::PresenceState;
using clook::testing::HarnessPlan;
using clook::testing::run_harness;
namespace msg = clook::presence;

namespace {

PeerConfig config(const std::string& local, const std::string& peer) {
  PeerConfig c;
  c.local_id = local;
  c.peer_id = peer;
  return c;
}

template <class T>
bool has(const clook::PresenceEffects& fx) {
  return std::any_of(fx.outbound.begin(), fx.outbound.end(),
                     [](const PresenceMessage& m) { return std::holds_alternative<T>(m); });
}

template <class T>
std::size_t count_sent(const clook::testing::HarnessOutcome& o, int from) {
  return static_cast<std::size_t>(
      std::count_if(o.log.begin(), o.log.end(), [&](const clook::testing::SentMessage& s) {
        return s.from == from && std::holds_alternative<T>(s.msg);
      }));
}

// A session that has already exchanged HELLO with its peer.
PresenceSession introduced(const std::string& local, const std::string& peer) {
  PresenceSession s(config(local, peer));
  s.start(0);
  s.on_message(msg::Hello{peer, 0}, 0, 0.0);
  return s;
}

}  // namespace

TEST_CASE("local_civil_tod") {
  const Millis utc7 = 20'000 * 24 * kHourMs + 7 * kHourMs;
  CHECK(clook::local_civil_tod(-240, utc7) == 3 * kHourMs);
  CHECK(clook::local_civil_tod(480, utc7) == 3 * kHourMs);
  CHECK(clook::local_civil_tod(0, 5 * kHourMs + 17) == 5 * kHourMs + 17);
  CHECK(clook::local_civil_tod(0, 13 * kHourMs) == kHourMs);
  CHECK(clook::local_civil_tod(-60, 0) == 11 * kHourMs);
}

TEST_CASE("wire encoding") {
  CHECK(clook::to_wire(msg::Gaze{12, true, 123456}) ==
        R"({"v":1,"type":"GAZE","seq":12,"watching":true,"since_ms":123456})");
  const std::vector<PresenceMessage> all = {
      msg::Hello{"boston", -240}, msg::Gaze{4294967295u, false, 0}, msg::Propose{7},
      msg::Confirm{7, 43'199'999}, msg::ShowAck{7},                 msg::Bye{}};
  for (const auto& m : all) {
    const std::string line = clook::to_wire(m);
    CAPTURE(line);
    CHECK(line.find('\n') == std::string::npos);
    CHECK(clook::parse_wire(line) == m);
    CHECK(clook::is_presence_type(clook::message_type(m)));
  }
  CHECK_FALSE(clook::is_presence_type("faces"));
}

TEST_CASE("wire parse errors") {
  for (const char* bad : {
           "",
           "not json",
           "[1,2]",
           R"({"type":"BYE"})",
           R"({"v":2,"type":"BYE"})",
           R"({"v":1,"type":"NOPE"})",
           R"({"v":1,"type":"GAZE","seq":1,"watching":true})",
           R"({"v":1,"type":"GAZE","seq":-1,"watching":true,"since_ms":0})",
           R"({"v":1,"type":"GAZE","seq":1,"watching":"yes","since_ms":0})",
           R"({"v":1,"type":"PROPOSE"})",
           R"({"v":1,"type":"HELLO","id":"x"})",
       }) {
    CAPTURE(bad);
    CHECK_THROWS_AS(clook::parse_wire(bad), clook::ValidationError);
  }
}

TEST_CASE("peer config validation") {
  CHECK_NOTHROW(config("a", "b").validate());
  CHECK_THROWS_AS(config("a", "a").validate(), clook::ValidationError);
  PeerConfig c = config("a", "b");
  c.overlap_window_ms = 100;
  CHECK_THROWS_AS(c.validate(), clook::ValidationError);
  c = config("a", "b");
  c.tz_offset_minutes = 841;
  CHECK_THROWS_AS(c.validate(), clook::ValidationError);
}

TEST_CASE("watching sends GAZE within one heartbeat") {
  PresenceSession s = introduced("a", "b");
  const auto fx = s.on_local_attention(AttentionState::Watching, 1'234, 0.0);
  CHECK(s.state() == PresenceState::LocalWatching);
  REQUIRE(has<msg::Gaze>(fx));
  for (const auto& m : fx.outbound) {
    if (auto g = std::get_if<msg::Gaze>(&m)) CHECK(g->watching);
  }
  REQUIRE(s.next_deadline());
  CHECK(*s.next_deadline() <= 1'234 + s.config().heartbeat_ms);
}

TEST_CASE("conversation does not count as watching") {
  PresenceSession s = introduced("a", "b");
  s.on_local_attention(AttentionState::Watching, 100, 0.0);
  const auto fx = s.on_local_attention(AttentionState::Conversation, 200, 0.0);
  CHECK(s.state() == PresenceState::Idle);
  REQUIRE(has<msg::Gaze>(fx));
  CHECK_FALSE(std::get<msg::Gaze>(fx.outbound.front()).watching);
}

TEST_CASE("leaving during MUTUAL_PENDING aborts") {
  PresenceSession s = introduced("a", "b");
  s.on_local_attention(AttentionState::Watching, 0, 0.0);
  s.on_message(msg::Gaze{1, true, 0}, 10, 0.0);
  for (Millis t = 500; t <= 2'500 && s.state() != PresenceState::MutualPending; t += 500) {
    s.on_message(msg::Gaze{static_cast<std::uint32_t>(t), true, t - 10}, t, 0.0);
    s.on_timer(t, 0.0);
  }
  REQUIRE(s.state() == PresenceState::MutualPending);
  const auto fx = s.on_local_attention(AttentionState::Away, 2'600, 0.0);
  CHECK(s.state() == PresenceState::Idle);
  CHECK(has<msg::Gaze>(fx));
  CHECK(has<msg::Bye>(fx));
  CHECK_FALSE(fx.grant);
}

TEST_CASE("CONFIRM for an unknown window is counted and ignored") {
  PresenceSession s = introduced("b", "a");
  s.on_local_attention(AttentionState::Watching, 0, 0.0);
  const auto fx = s.on_message(msg::Confirm{99, 0}, 100, 0.0);
  CHECK(s.stats().unknown_confirms == 1);
  CHECK_FALSE(fx.grant);
  CHECK(s.state() == PresenceState::LocalWatching);
}

TEST_CASE("duplicate GAZE is dropped by seq") {
  PresenceSession s = introduced("b", "a");
  s.on_message(msg::Gaze{5, true, 0}, 100, 0.0);
  s.on_message(msg::Gaze{5, true, 0}, 150, 0.0);
  s.on_message(msg::Gaze{4, false, 0}, 160, 0.0);
  CHECK(s.stats().duplicate_gazes == 2);
}

TEST_CASE("proposer is the smaller id") {
  CHECK(introduced("a", "b").is_proposer());
  CHECK_FALSE(introduced("b", "a").is_proposer());
  CHECK(introduced("Zed", "alpha").is_proposer());
}

TEST_CASE("both watching, no loss: both show within mutual_timeout") {
  for (Millis lat : {5, 150, 450}) {
    HarnessPlan p;
    p.a = {0, 16'000};
    p.b = {300, 16'000};
    p.latency_ab = lat;
    p.latency_ba = lat;
    p.civil_at_zero = {3.0 * kHourMs, 15.0 * kHourMs};
    const auto o = run_harness(p);
    CAPTURE(lat);
    REQUIRE(o.shows(0) >= 1);
    REQUIRE(o.shows(1) >= 1);
    CHECK(o.safety_violations.empty());
    CHECK(o.unilateral_windows.empty());
    // True overlap reaches W at 2300.
    for (int side = 0; side < 2; ++side) {
      const auto first = std::find_if(o.spans.begin(), o.spans.end(),
                                      [&](const auto& s) { return s.side == side; });
      CHECK(first->start >= 2'300);
      CHECK(first->start <= 2'300 + p.timing.mutual_timeout_ms);
      CHECK(first->end - first->start == p.timing.show_duration_ms);
    }
    // Each side sees the other's civil time, give or take the delay estimate.
    REQUIRE(o.grants.size() >= 2);
    for (const auto& g : o.grants) {
      const double peer_civil =
          clook::wrap_dial(p.civil_at_zero[1 - g.side] + static_cast<double>(g.t));
      const double err = std::abs(clook::dial_delta(g.grant.remote_tod_ms, peer_civil));
      CHECK(err <= static_cast<double>(p.timing.heartbeat_ms));
      CHECK(g.grant.duration_ms == p.timing.show_duration_ms);
    }
    // One proposer.
    CHECK(count_sent<msg::Propose>(o, 0) >= 1);
    CHECK(count_sent<msg::Propose>(o, 1) == 0);
  }
}

TEST_CASE("only one side watching: no PROPOSE ever") {
  for (int who = 0; who < 2; ++who) {
    HarnessPlan p;
    (who == 0 ? p.a : p.b) = {0, 16'000};
    (who == 0 ? p.b : p.a) = {0, 0};
    const auto o = run_harness(p);
    CHECK(count_sent<msg::Propose>(o, 0) == 0);
    CHECK(count_sent<msg::Propose>(o, 1) == 0);
    CHECK(o.spans.empty());
  }
}

TEST_CASE("overlap below the window never shows") {
  HarnessPlan p;
  p.a = {0, 16'000};
  p.b = {200, 2'000};
  const auto o = run_harness(p);
  CHECK(o.spans.empty());
  CHECK(count_sent<msg::Propose>(o, 0) == 0);
}

TEST_CASE("conversation while SHOWING runs to expiry, then cooldown, then idle") {
  PresenceSession a = introduced("a", "b");
  PresenceSession b = introduced("b", "a");
  std::vector<std::pair<int, PresenceMessage>> wire;
  std::map<int, std::vector<PresenceState>> seen;
  auto pump = [&](int side, clook::PresenceEffects fx) {
    for (auto& m : fx.outbound) wire.emplace_back(1 - side, std::move(m));
    for (auto st : fx.transitions) seen[side].push_back(st);
  };
  pump(0, a.on_local_attention(AttentionState::Watching, 0, 0.0));
  pump(1, b.on_local_attention(AttentionState::Watching, 0, 0.0));
  Millis t = 0;
  Millis showing_at = -1;
  for (; t <= 20'000; ++t) {
    auto now_wire = std::move(wire);
    wire.clear();
    for (auto& [to, m] : now_wire) pump(to, (to == 0 ? a : b).on_message(m, t, 0.0));
    pump(0, a.on_timer(t, 0.0));
    pump(1, b.on_timer(t, 0.0));
    if (showing_at < 0 && a.state() == PresenceState::Showing &&
        b.state() == PresenceState::Showing) {
      showing_at = t;
      pump(1, b.on_local_attention(AttentionState::Conversation, t, 0.0));
      CHECK(b.state() == PresenceState::Showing);
    }
  }
  REQUIRE(showing_at > 0);
  const std::vector<PresenceState> want = {PresenceState::LocalWatching,
                                           PresenceState::MutualPending, PresenceState::Showing,
                                           PresenceState::Cooldown, PresenceState::Idle};
  CHECK(seen[1] == want);
  CHECK(b.state() == PresenceState::Idle);
}

TEST_CASE("heartbeat gap stays within 1.5 heartbeats while watching") {
  HarnessPlan p;
  p.a = {0, 16'000};
  p.b = {1'000, 9'000};
  const auto o = run_harness(p);
  for (int side = 0; side < 2; ++side) {
    const auto& w = side == 0 ? p.a : p.b;
    Millis last = -1;
    for (const auto& s : o.log) {
      if (s.from != side || !std::holds_alternative<msg::Gaze>(s.msg)) continue;
      if (s.t < w.start || s.t >= w.end) continue;
      if (last >= 0) CHECK(s.t - last <= 3 * p.timing.heartbeat_ms / 2);
      last = s.t;
    }
    CHECK(last >= w.end - p.timing.heartbeat_ms);
  }
}

TEST_CASE("gaze seq strictly increases per sender") {
  HarnessPlan p;
  p.a = {0, 16'000};
  p.b = {500, 12'000};
  const auto o = run_harness(p);
  for (int side = 0; side < 2; ++side) {
    std::optional<std::uint32_t> last;
    for (const auto& s : o.log) {
      if (s.from != side) continue;
      if (auto g = std::get_if<msg::Gaze>(&s.msg)) {
        if (last) CHECK(g->seq > *last);
        last = g->seq;
      }
    }
  }
}

TEST_CASE("exhaustive single drops: safety and symmetry") {
  const auto plans = clook::testing::standard_plans({5, 450});
  const auto sum = clook::testing::enumerate_drops(plans, 1, 60);
  INFO(sum.first_failure);
  CHECK(sum.runs > plans.size());
  CHECK(sum.safety_violations == 0);
  CHECK(sum.unilateral == 0);
  CHECK(sum.both_showed > 0);
}

TEST_CASE("a repeated HELLO is answered at most once per heartbeat") {
  PresenceSession s = introduced("a", "b");
  CHECK_FALSE(has<msg::Hello>(s.on_message(msg::Hello{"b", 0}, 100, 0.0)));
  CHECK(has<msg::Hello>(s.on_message(msg::Hello{"b", 0}, 500, 0.0)));
  CHECK_FALSE(has<msg::Hello>(s.on_message(msg::Hello{"b", 0}, 600, 0.0)));
}

TEST_CASE("losing both of one side's introductions still ends in a show") {
  HarnessPlan p;
  p.a = {0, 16'000};
  p.b = {0, 16'000};
  const auto clean = run_harness(p);
  for (std::size_t i = 0; i < clean.log.size() && p.drops.size() < 2; ++i) {
    if (clean.log[i].from == 0 && std::holds_alternative<msg::Hello>(clean.log[i].msg)) {
      p.drops.insert(i);
    }
  }
  REQUIRE(p.drops.size() == 2);
  const auto o = run_harness(p);
  CHECK(o.shows(0) >= 1);
  CHECK(o.shows(1) >= 1);
}

TEST_CASE("an unanswered PROPOSE is resent every handshake_retry_ms") {
  PresenceSession s = introduced("a", "b");
  s.on_local_attention(AttentionState::Watching, 0, 0.0);
  Millis t = 0;
  for (t = 500; t <= 2'500 && s.state() != PresenceState::MutualPending; t += 500) {
    s.on_message(msg::Gaze{static_cast<std::uint32_t>(t), true, t}, t, 0.0);
    s.on_timer(t, 0.0);
  }
  REQUIRE(s.state() == PresenceState::MutualPending);
  const Millis sent = t - 500;
  const Millis retry = s.config().handshake_retry_ms;
  CHECK_FALSE(has<msg::Propose>(s.on_timer(sent + retry - 1, 0.0)));
  CHECK(s.next_deadline() == sent + retry);
  CHECK(has<msg::Propose>(s.on_timer(sent + retry, 0.0)));
}

TEST_CASE("a responder that confirmed waits out the proposer's GAZE(false)") {
  PresenceSession s = introduced("b", "a");
  s.on_local_attention(AttentionState::Watching, 0, 0.0);
  s.on_message(msg::Gaze{1, true, 0}, 10, 0.0);
  s.on_message(msg::Gaze{2, true, 2'000}, 2'010, 0.0);
  const auto confirm = s.on_message(msg::Propose{1}, 2'100, 0.0);
  REQUIRE(has<msg::Confirm>(confirm));
  REQUIRE(s.state() == PresenceState::MutualPending);

  s.on_message(msg::Gaze{3, false, 0}, 2'150, 0.0);
  CHECK(s.state() == PresenceState::MutualPending);
  const auto fx = s.on_message(msg::Confirm{1, 1'000}, 2'160, 0.0);
  CHECK(s.state() == PresenceState::Showing);
  CHECK(fx.grant);
  CHECK(has<msg::ShowAck>(fx));
}

TEST_CASE("handshake_retry_ms is validated") {
  PeerConfig c = config("a", "b");
  c.handshake_retry_ms = 0;
  CHECK_THROWS_AS(c.validate(), clook::ValidationError);
  c.handshake_retry_ms = c.heartbeat_ms + 1;
  CHECK_THROWS_AS(c.validate(), clook::ValidationError);
}

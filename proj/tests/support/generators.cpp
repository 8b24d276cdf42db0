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

#include "generators.hpp"

#include <algorithm>
#include <array>

namespace clook::testing {

Generated random_single_clock(std::uint64_t seed, Millis duration_ms) {
  std::mt19937_64 rng(seed);
  auto pick = [&](auto const& options) {
    std::uniform_int_distribution<std::size_t> d(0, options.size() - 1);
    return options[d(rng)];
  };
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Generated g;
  ClockSpec clock;
  clock.id = "c" + std::to_string(seed);
  clock.tz_offset_minutes = std::uniform_int_distribution<int>(-720, 840)(rng);
  const std::array<double, 4> away{2.0, 30.0, 60.0, 120.0};
  const std::array<double, 3> conversation{0.0, 0.0, 0.5};
  clock.policy = Json{{"rate_away", pick(away)}, {"rate_conversation", pick(conversation)}};
  const std::array<int, 4> resync{0, 0, 1, 2};
  switch (pick(resync)) {
    case 1:
      clock.policy["resync"] = "SNAP";
      break;
    case 2:
      clock.policy["resync"] = Json{{"mode", "SLEW"}, {"rate", pick(std::array<double, 3>{1.5, 2.0, 4.0})}};
      break;
    default:
      break;
  }
  g.scenario.clocks.push_back(clock);
  g.scenario.seed = seed;
  g.scenario.start_utc_ms = std::uniform_int_distribution<Millis>(0, 48 * kHourMs)(rng);
  g.scenario.duration_ms = duration_ms;

  const std::array<int, 6> counts{0, 0, 1, 1, 2, 3};
  int current = pick(counts);
  for (Millis t = 0; t <= duration_ms; t += 100) {
    const double u = unit(rng);
    int shown = current;
    if (u < 0.02) {
      current = pick(counts);
      shown = current;
    } else if (u < 0.04) {
      shown = pick(counts);  // one-frame glitch
    }
    g.scenario.events.push_back({t, clock.id, shown});
  }
  g.config.hold_ms = pick(std::array<Millis, 4>{0, 200, 500, 1000});
  return g;
}

Scenario simple_scenario(std::initializer_list<std::pair<Millis, int>> events,
                         Millis duration_ms, Millis start_utc_ms, const Json& policy) {
  Scenario sc;
  sc.clocks.push_back({"clock", 0, policy});
  for (const auto& [t, n] : events) sc.events.push_back({t, "clock", n});
  sc.duration_ms = duration_ms;
  sc.start_utc_ms = start_utc_ms;
  return sc;
}

Scenario two_clock_scenario(const GazePlan& plan, Millis duration_ms, std::uint64_t seed,
                            const Json& network) {
  Scenario sc;
  sc.clocks.push_back({"a", -240, Json::object()});
  sc.clocks.push_back({"b", 480, Json::object()});
  auto add = [&](const std::string& id, Millis start, Millis end) {
    std::vector<std::pair<Millis, int>> evs{{0, 0}};
    if (start >= end) {
      sc.events.push_back({0, id, 0});
      return;
    }
    if (start > 0) evs.push_back({start, 1});
    else evs[0].second = 1;
    if (end < duration_ms) evs.push_back({end, 0});
    for (const auto& [t, n] : evs) sc.events.push_back({t, id, n});
  };
  add("a", plan.a_start, plan.a_end);
  add("b", plan.b_start, plan.b_end);
  std::stable_sort(sc.events.begin(), sc.events.end(),
                   [](const auto& x, const auto& y) { return x.t_ms < y.t_ms; });
  sc.seed = seed;
  sc.start_utc_ms = 16 * kHourMs;
  sc.duration_ms = duration_ms;
  if (!network.empty()) sc.network = network;
  return sc;
}

}  // namespace clook::testing

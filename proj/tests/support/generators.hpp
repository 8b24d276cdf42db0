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

#ifndef CLOOK_TESTS_GENERATORS_HPP_
#define CLOOK_TESTS_GENERATORS_HPP_

#include <cstdint>
#include <random>
#include <string>

#include "clook/config.hpp"
#include "clook/scenario.hpp"

namespace clook::testing {

struct Generated {
  Scenario scenario;
  SimConfig config;
};

/// One clock, face counts every 100 ms for `duration_ms`, sticky runs with
/// occasional one-frame glitches, random warp rates, resync mode, hold time,
/// zone and start time.
Generated random_single_clock(std::uint64_t seed, Millis duration_ms = 600'000);

/// One clock with a fixed list of (t, faces) events and default config.
Scenario simple_scenario(std::initializer_list<std::pair<Millis, int>> events,
                         Millis duration_ms, Millis start_utc_ms = 10 * kHourMs,
                         const Json& policy = Json::object());

/// Two clocks "a" and "b"; each watches (face count 1) over [start, end).
struct GazePlan {
  Millis a_start, a_end, b_start, b_end;
};
Scenario two_clock_scenario(const GazePlan& plan, Millis duration_ms, std::uint64_t seed,
                            const Json& network = Json::object());

}  // namespace clook::testing

#endif  // CLOOK_TESTS_GENERATORS_HPP_

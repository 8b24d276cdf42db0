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

#ifndef CLOOK_SIMULATOR_HPP_
#define CLOOK_SIMULATOR_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "clook/clock_node.hpp"
#include "clook/config.hpp"
#include "clook/scenario.hpp"
#include "clook/trace.hpp"

namespace clook {

struct ClockSummary {
  std::string id;
  RunMetrics metrics;
  double displayed_tod_ms = 0.0;
  AttentionState attention = AttentionState::Away;
  std::int64_t minute_settled = 0;
  std::int64_t hour_settled = 0;
  std::uint64_t step_commands = 0;
  LinkStats link;
};

struct RunResult {
  Trace trace;
  std::vector<ClockSummary> clocks;
};

/// Runs a scenario to its duration on a single global event heap.
///
/// Events at the same millisecond run observations first, then timers and
/// message deliveries in scheduling order, then display samples. Samples
/// fall every config.sample_ms from 0 plus one at the duration. Anything
/// scheduled past the duration is discarded.
RunResult run(const Scenario& scenario, const SimConfig& config);

/// Derives an independent stream seed from the scenario seed.
std::uint64_t derive_seed(std::uint64_t scenario_seed, std::uint64_t model_seed,
                          std::uint64_t clock_index, std::uint64_t salt);

struct ReplayReport {
  std::size_t samples = 0;
  std::size_t mismatches = 0;
  bool ok() const { return mismatches == 0; }
};

/// Re-runs the scenario and config embedded in a trace header and checks
/// that every DISPLAY_SAMPLE comes out identical. Samples are written to
/// `out` (one line each); speed > 0 paces them in real time at that
/// multiple, speed <= 0 or infinite writes as fast as possible.
ReplayReport replay(const Trace& trace, double speed, std::ostream& out);

}  // namespace clook

#endif  // CLOOK_SIMULATOR_HPP_

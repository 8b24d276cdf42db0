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

#ifndef CLOOK_CONFIG_HPP_
#define CLOOK_CONFIG_HPP_

#include <filesystem>

#include "clook/common.hpp"
#include "clook/motor.hpp"
#include "clook/presence.hpp"
#include "clook/serial_link.hpp"
#include "clook/timewarp.hpp"
#include "json.hpp"

namespace clook {

using Json = nlohmann::ordered_json;

/// Everything tunable about a run or a live gateway. The JSON form uses the
/// domain types' field names:
///
///   {"warp":      {"rate_watching", "rate_away", "rate_conversation",
///                  "resync": "NONE" | "SNAP" | {"mode": "SLEW", "rate": 2},
///                  "override_duration_ms"},
///    "gear":      {"minute": {"steps_per_motor_rev", "motor_to_ring_ratio",
///                             "ring_revs_per_displayed_hour"},
///                  "hour": {...}, "step_period_ms"},
///    "link":      {"latency_ms", "jitter_ms", "drop_probability", "seed",
///                  "allow_reorder"},
///    "network":   {same fields as "link"},
///    "peer":      {"local_id", "peer_id", "tz_offset_minutes", "heartbeat_ms",
///                  "overlap_window_ms", "show_duration_ms",
///                  "mutual_timeout_ms", "cooldown_ms"},
///    "attention": {"hold_ms"},
///    "sim":       {"sample_ms", "staleness_ms"}}
///
/// Every section and field is optional; unknown keys are rejected.
struct SimConfig {
  WarpPolicy warp;
  DriveConfig drive;
  /// Camera board to hour-motor board serial link.
  LinkModel link;
  /// Clock-to-clock presence transport (simulated runs only).
  LinkModel network;
  /// Protocol timing; ids and zone come from the scenario or CLI.
  PeerConfig peer;
  Millis hold_ms = kDefaultHoldMs;
  Millis sample_ms = 1'000;
  Millis staleness_ms = 2'000;

  void validate() const;
};

/// Throws ValidationError naming the offending field path.
SimConfig parse_config(const Json& j);
SimConfig load_config(const std::filesystem::path& path);
Json to_json(const SimConfig& config);

/// Section parsers, also used for per-clock and per-scenario overrides:
/// fields present in `j` replace those in `base`.
WarpPolicy merge_warp(const WarpPolicy& base, const Json& j, const std::string& path);
LinkModel merge_link(const LinkModel& base, const Json& j, const std::string& path);

Json to_json(const WarpPolicy& policy);
Json to_json(const LinkModel& link);

}  // namespace clook

#endif  // CLOOK_CONFIG_HPP_

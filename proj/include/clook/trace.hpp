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

#ifndef CLOOK_TRACE_HPP_
#define CLOOK_TRACE_HPP_

// Trace files are line-delimited JSON. Line 1 is a header:
//
//   {"kind":"HEADER","format":"clook-trace","version":1,"scenario":{...},"config":{...}}
//
// then one event per line, payload fields flattened after the common ones:
//
//   {"t_ms":1500,"clock_id":"a","kind":"ATTENTION","state":"WATCHING"}
//   {"t_ms":2000,"clock_id":"a","kind":"DISPLAY_SAMPLE","tod_ms":...,"mode":"NORMAL",...}
//   {"t_ms":2014,"clock_id":"a","kind":"STEP","event":"planned","cmd":7,...}
//
// Payloads by kind:
//   ATTENTION       state
//   DISPLAY_SAMPLE  tod_ms mode attention trajectory_ms civil_ms drift_ms
//                   minute_deg hour_deg skew_deg presence
//   STEP            event=planned: cmd motor dir count target
//                   event=applied: cmd motor position angle_deg skew_deg
//   FRAME_TX        cmd bytes dropped [deliver_ms]
//   FRAME_RX        cmd bytes ok
//   PRESENCE        event=tx|rx: msg     event=state: state
//   OVERRIDE        event=start: window_id remote_tod_ms until_ms
//                   event=end|revoke

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clook/attention.hpp"
#include "clook/config.hpp"

namespace clook {

enum class TraceKind : std::uint8_t {
  Attention,
  DisplaySample,
  Step,
  FrameTx,
  FrameRx,
  Presence,
  Override,
};

std::string_view to_string(TraceKind kind);
/// Throws ValidationError on an unknown name.
TraceKind parse_trace_kind(std::string_view name);

struct TraceEvent {
  Millis t_ms = 0;
  std::string clock_id;
  TraceKind kind = TraceKind::Attention;
  /// Object; its fields follow t_ms, clock_id and kind on the line.
  Json payload = Json::object();
};

std::string to_line(const TraceEvent& ev);
/// Throws ValidationError.
TraceEvent parse_trace_line(std::string_view line);

struct Trace {
  Json header = Json::object();
  std::vector<TraceEvent> events;
};

Json trace_header(const Json& scenario, const Json& config);
void write_trace(std::ostream& out, const Trace& trace);
/// Throws ValidationError naming the line.
Trace read_trace(std::istream& in);

struct RunMetrics {
  /// Underlying displayed progress minus civil progress at the last sample.
  double displayed_drift_ms = 0.0;
  double max_hand_skew_deg = 0.0;
  std::uint64_t mutual_show_count = 0;
  std::uint64_t frames_dropped = 0;
  /// Indexed by AttentionState.
  std::array<Millis, 3> dwell_ms{};
  Millis end_ms = 0;

  Millis dwell(AttentionState s) const { return dwell_ms[static_cast<std::size_t>(s)]; }
  friend bool operator==(const RunMetrics&, const RunMetrics&) = default;
};

Json to_json(const RunMetrics& m);

/// Pure fold over one clock's events.
RunMetrics metrics_from_trace(std::span<const TraceEvent> events, std::string_view clock_id);
std::map<std::string, RunMetrics> metrics_from_trace(const Trace& trace);

}  // namespace clook

#endif  // CLOOK_TRACE_HPP_

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

#include "clook/trace.hpp"

#include <algorithm>
#include <istream>
#include <optional>
#include <ostream>

namespace clook {

namespace {

constexpr std::array<std::pair<TraceKind, std::string_view>, 7> kKindNames{{
    {TraceKind::Attention, "ATTENTION"},
    {TraceKind::DisplaySample, "DISPLAY_SAMPLE"},
    {TraceKind::Step, "STEP"},
    {TraceKind::FrameTx, "FRAME_TX"},
    {TraceKind::FrameRx, "FRAME_RX"},
    {TraceKind::Presence, "PRESENCE"},
    {TraceKind::Override, "OVERRIDE"},
}};

}  // namespace

std::string_view to_string(TraceKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "ATTENTION";
}

TraceKind parse_trace_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  throw ValidationError("unknown trace kind '" + std::string(name) + "'");
}

std::string to_line(const TraceEvent& ev) {
  Json j{{"t_ms", ev.t_ms}, {"clock_id", ev.clock_id}, {"kind", to_string(ev.kind)}};
  for (auto it = ev.payload.begin(); it != ev.payload.end(); ++it) j[it.key()] = it.value();
  return j.dump();
}

TraceEvent parse_trace_line(std::string_view line) {
  Json j;
  try {
    j = Json::parse(line);
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("trace event must be an object");
  auto t = j.find("t_ms");
  auto id = j.find("clock_id");
  auto kind = j.find("kind");
  if (t == j.end() || !t->is_number_integer()) throw ValidationError("t_ms must be an integer");
  if (id == j.end() || !id->is_string()) throw ValidationError("clock_id must be a string");
  if (kind == j.end() || !kind->is_string()) throw ValidationError("kind must be a string");
  TraceEvent ev{t->get<Millis>(), id->get<std::string>(),
                parse_trace_kind(kind->get<std::string>()), Json::object()};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() != "t_ms" && it.key() != "clock_id" && it.key() != "kind") {
      ev.payload[it.key()] = it.value();
    }
  }
  return ev;
}

Json trace_header(const Json& scenario, const Json& config) {
  return Json{{"kind", "HEADER"},
              {"format", "clook-trace"},
              {"version", 1},
              {"scenario", scenario},
              {"config", config}};
}

void write_trace(std::ostream& out, const Trace& trace) {
  out << trace.header.dump() << '\n';
  for (const auto& ev : trace.events) out << to_line(ev) << '\n';
}

Trace read_trace(std::istream& in) {
  Trace trace;
  std::string text;
  std::size_t line = 0;
  bool have_header = false;
  while (std::getline(in, text)) {
    ++line;
    if (text.empty()) continue;
    try {
      if (!have_header) {
        Json h = Json::parse(text);
        if (!h.is_object() || h.value("kind", "") != "HEADER" ||
            h.value("format", "") != "clook-trace") {
          throw ValidationError("first line is not a clook-trace header");
        }
        if (h.value("version", 0) != 1) throw ValidationError("unsupported trace version");
        trace.header = std::move(h);
        have_header = true;
      } else {
        trace.events.push_back(parse_trace_line(text));
      }
    } catch (const Json::exception& e) {
      throw ValidationError("trace line " + std::to_string(line) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError("trace line " + std::to_string(line) + ": " + e.what());
    }
  }
  if (!have_header) throw ValidationError("trace is empty");
  return trace;
}

Json to_json(const RunMetrics& m) {
  return Json{{"displayed_drift_ms", m.displayed_drift_ms},
              {"max_hand_skew_deg", m.max_hand_skew_deg},
              {"mutual_show_count", m.mutual_show_count},
              {"frames_dropped", m.frames_dropped},
              {"dwell_ms", Json{{"AWAY", m.dwell_ms[0]},
                                {"WATCHING", m.dwell_ms[1]},
                                {"CONVERSATION", m.dwell_ms[2]}}},
              {"end_ms", m.end_ms}};
}

RunMetrics metrics_from_trace(std::span<const TraceEvent> events, std::string_view clock_id) {
  RunMetrics m;
  std::optional<AttentionState> state;
  Millis state_since = 0;
  std::vector<std::pair<Millis, AttentionState>> attention;
  for (const auto& ev : events) {
    if (ev.clock_id != clock_id) continue;
    const Json& p = ev.payload;
    switch (ev.kind) {
      case TraceKind::Attention:
        if (auto s = parse_attention(p.at("state").get<std::string>())) {
          attention.emplace_back(ev.t_ms, *s);
        }
        break;
      case TraceKind::DisplaySample:
        m.displayed_drift_ms = p.at("drift_ms").get<double>();
        m.max_hand_skew_deg = std::max(m.max_hand_skew_deg, p.at("skew_deg").get<double>());
        m.end_ms = ev.t_ms;
        break;
      case TraceKind::Step:
        if (p.value("event", "") == "applied") {
          m.max_hand_skew_deg = std::max(m.max_hand_skew_deg, p.at("skew_deg").get<double>());
        }
        break;
      case TraceKind::FrameTx:
        if (p.value("dropped", false)) ++m.frames_dropped;
        break;
      case TraceKind::Presence:
        if (p.value("event", "") == "state" && p.value("state", "") == "SHOWING") {
          ++m.mutual_show_count;
        }
        break;
      case TraceKind::FrameRx:
      case TraceKind::Override:
        break;
    }
  }
  // Dwell runs from each attention change to the next, closed at the last sample.
  for (const auto& [t, s] : attention) {
    if (t > m.end_ms) break;
    if (state) m.dwell_ms[static_cast<std::size_t>(*state)] += t - state_since;
    state = s;
    state_since = t;
  }
  if (state) m.dwell_ms[static_cast<std::size_t>(*state)] += m.end_ms - state_since;
  return m;
}

std::map<std::string, RunMetrics> metrics_from_trace(const Trace& trace) {
  std::map<std::string, RunMetrics> out;
  for (const auto& ev : trace.events) {
    if (!out.contains(ev.clock_id)) out[ev.clock_id] = metrics_from_trace(trace.events, ev.clock_id);
  }
  return out;
}

}  // namespace clook

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

#include "clook/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include "clook/attention.hpp"

namespace clook {

namespace {

std::string located(std::size_t line, const std::string& field, const std::string& message) {
  std::string out;
  if (line > 0) out += "line " + std::to_string(line) + ": ";
  if (!field.empty()) out += "field '" + field + "': ";
  return out + message;
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

void parse_header(const Json& h, std::size_t line, Scenario& sc) {
  if (!h.is_object()) throw ScenarioError(line, "", "header must be a JSON object");
  for (auto it = h.begin(); it != h.end(); ++it) {
    static const std::set<std::string> known = {"clocks",      "seed", "start_utc_ms",
                                                "duration_ms", "link", "network"};
    if (!known.contains(it.key())) throw ScenarioError(line, it.key(), "unknown header field");
  }
  auto cl = h.find("clocks");
  if (cl == h.end() || !cl->is_array() || cl->empty()) {
    throw ScenarioError(line, "clocks", "must be a non-empty array");
  }
  for (std::size_t i = 0; i < cl->size(); ++i) {
    const Json& c = (*cl)[i];
    const std::string base = "clocks[" + std::to_string(i) + "]";
    if (!c.is_object()) throw ScenarioError(line, base, "must be an object");
    ClockSpec spec;
    for (auto it = c.begin(); it != c.end(); ++it) {
      if (it.key() != "id" && it.key() != "tz_offset_minutes" && it.key() != "policy") {
        throw ScenarioError(line, base + "." + it.key(), "unknown field");
      }
    }
    auto id = c.find("id");
    if (id == c.end() || !id->is_string() || id->get<std::string>().empty()) {
      throw ScenarioError(line, base + ".id", "must be a non-empty string");
    }
    spec.id = id->get<std::string>();
    if (auto tz = c.find("tz_offset_minutes"); tz != c.end()) {
      if (!tz->is_number_integer()) {
        throw ScenarioError(line, base + ".tz_offset_minutes", "must be an integer");
      }
      spec.tz_offset_minutes = tz->get<int>();
    }
    if (auto p = c.find("policy"); p != c.end()) spec.policy = *p;
    sc.clocks.push_back(std::move(spec));
  }
  auto read_int = [&](const char* key, auto& out) {
    if (auto v = h.find(key); v != h.end()) {
      if (!v->is_number_integer()) throw ScenarioError(line, key, "must be an integer");
      out = v->template get<std::remove_reference_t<decltype(out)>>();
    }
  };
  read_int("seed", sc.seed);
  read_int("start_utc_ms", sc.start_utc_ms);
  if (auto d = h.find("duration_ms"); d != h.end()) {
    if (!d->is_number_integer() || d->get<Millis>() < 0) {
      throw ScenarioError(line, "duration_ms", "must be a non-negative integer");
    }
    sc.duration_ms = d->get<Millis>();
  }
  if (auto l = h.find("link"); l != h.end()) sc.link = *l;
  if (auto n = h.find("network"); n != h.end()) sc.network = *n;
}

ScenarioEvent parse_event(const Json& e, std::size_t line) {
  if (!e.is_object()) throw ScenarioError(line, "", "event must be a JSON object");
  for (auto it = e.begin(); it != e.end(); ++it) {
    if (it.key() != "t_ms" && it.key() != "clock_id" && it.key() != "face_count") {
      throw ScenarioError(line, it.key(), "unknown event field");
    }
  }
  ScenarioEvent ev;
  auto t = e.find("t_ms");
  if (t == e.end() || !t->is_number_integer() || t->get<Millis>() < 0) {
    throw ScenarioError(line, "t_ms", "must be a non-negative integer");
  }
  ev.t_ms = t->get<Millis>();
  auto id = e.find("clock_id");
  if (id == e.end() || !id->is_string()) throw ScenarioError(line, "clock_id", "must be a string");
  ev.clock_id = id->get<std::string>();
  auto fc = e.find("face_count");
  if (fc == e.end() || !fc->is_number_integer() || fc->get<std::int64_t>() < 0 ||
      fc->get<std::int64_t>() > kMaxFaceCount) {
    throw ScenarioError(line, "face_count", "must be an integer in [0, 64]");
  }
  ev.face_count = fc->get<int>();
  return ev;
}

// Shared by the file parser (with real line numbers) and validate().
void check_structure(const Scenario& sc, const std::vector<std::size_t>& event_lines,
                     std::size_t header_line) {
  if (sc.clocks.empty()) throw ScenarioError(header_line, "clocks", "at least one clock required");
  if (sc.clocks.size() > 2) {
    throw ScenarioError(header_line, "clocks", "at most two clocks can be paired");
  }
  std::set<std::string> ids;
  for (std::size_t i = 0; i < sc.clocks.size(); ++i) {
    const auto& c = sc.clocks[i];
    const std::string base = "clocks[" + std::to_string(i) + "]";
    if (!ids.insert(c.id).second) throw ScenarioError(header_line, base + ".id", "duplicate clock id");
    if (c.tz_offset_minutes < -720 || c.tz_offset_minutes > 840) {
      throw ScenarioError(header_line, base + ".tz_offset_minutes", "must be in [-720, 840]");
    }
    try {
      merge_warp(WarpPolicy{}, c.policy, base + ".policy");
    } catch (const ValidationError& e) {
      throw ScenarioError(header_line, base + ".policy", e.what());
    }
  }
  try {
    if (sc.link) merge_link(LinkModel{}, *sc.link, "link");
    if (sc.network) merge_link(LinkModel{}, *sc.network, "network");
  } catch (const ValidationError& e) {
    throw ScenarioError(header_line, sc.link ? "link" : "network", e.what());
  }
  std::map<std::string, Millis> last;
  for (std::size_t i = 0; i < sc.events.size(); ++i) {
    const auto& ev = sc.events[i];
    const std::size_t line = i < event_lines.size() ? event_lines[i] : 0;
    if (!ids.contains(ev.clock_id)) {
      throw ScenarioError(line, "clock_id", "undeclared clock '" + ev.clock_id + "'");
    }
    if (auto it = last.find(ev.clock_id); it != last.end() && ev.t_ms <= it->second) {
      throw ScenarioError(line, "t_ms",
                          "events for clock '" + ev.clock_id + "' must be strictly increasing");
    }
    last[ev.clock_id] = ev.t_ms;
  }
}

}  // namespace

ScenarioError::ScenarioError(std::size_t line, std::string field, const std::string& message)
    : ValidationError(located(line, field, message)), line_(line), field_(std::move(field)) {}

Millis Scenario::duration() const {
  if (duration_ms) return *duration_ms;
  Millis end = 0;
  for (const auto& ev : events) end = std::max(end, ev.t_ms);
  return end;
}

void Scenario::validate() const { check_structure(*this, {}, 0); }

Scenario parse_scenario(std::istream& in) {
  Scenario sc;
  std::vector<std::size_t> event_lines;
  std::string text;
  std::size_t line = 0;
  std::size_t header_line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (blank(text)) continue;
    Json j;
    try {
      j = Json::parse(text);
    } catch (const Json::exception& e) {
      throw ScenarioError(line, "", std::string("invalid JSON: ") + e.what());
    }
    if (header_line == 0) {
      header_line = line;
      parse_header(j, line, sc);
    } else {
      sc.events.push_back(parse_event(j, line));
      event_lines.push_back(line);
    }
  }
  if (header_line == 0) throw ScenarioError(0, "clocks", "scenario has no header line");
  check_structure(sc, event_lines, header_line);
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(0, "", "cannot open scenario file " + path.string());
  return parse_scenario(in);
}

Json header_json(const Scenario& sc) {
  Json clocks = Json::array();
  for (const auto& c : sc.clocks) {
    Json o{{"id", c.id}, {"tz_offset_minutes", c.tz_offset_minutes}};
    if (!c.policy.empty()) o["policy"] = c.policy;
    clocks.push_back(std::move(o));
  }
  Json h{{"clocks", std::move(clocks)}, {"seed", sc.seed}, {"start_utc_ms", sc.start_utc_ms}};
  if (sc.duration_ms) h["duration_ms"] = *sc.duration_ms;
  if (sc.link) h["link"] = *sc.link;
  if (sc.network) h["network"] = *sc.network;
  return h;
}

void write_scenario(std::ostream& out, const Scenario& sc) {
  out << header_json(sc).dump() << '\n';
  for (const auto& ev : sc.events) {
    out << Json{{"t_ms", ev.t_ms}, {"clock_id", ev.clock_id}, {"face_count", ev.face_count}}.dump()
        << '\n';
  }
}

Json to_json(const Scenario& sc) {
  Json events = Json::array();
  for (const auto& ev : sc.events) events.push_back(Json::array({ev.t_ms, ev.clock_id, ev.face_count}));
  return Json{{"header", header_json(sc)}, {"events", std::move(events)}};
}

Scenario scenario_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("header") || !j.contains("events")) {
    throw ScenarioError(0, "scenario", "embedded scenario must have header and events");
  }
  Scenario sc;
  parse_header(j.at("header"), 0, sc);
  for (const auto& e : j.at("events")) {
    if (!e.is_array() || e.size() != 3) throw ScenarioError(0, "events", "malformed event");
    sc.events.push_back({e[0].get<Millis>(), e[1].get<std::string>(), e[2].get<int>()});
  }
  sc.validate();
  return sc;
}

}  // namespace clook

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

#ifndef CLOOK_SCENARIO_HPP_
#define CLOOK_SCENARIO_HPP_

// Scenario files are line-delimited JSON. The first non-blank line is the
// header, every following line one face-count observation:
//
//   {"clocks":[{"id":"boston","tz_offset_minutes":-240,"policy":{"rate_away":30}},
//              {"id":"beijing","tz_offset_minutes":480}],
//    "seed":7,"start_utc_ms":25200000,"duration_ms":60000,
//    "link":{"latency_ms":200},"network":{"latency_ms":20,"drop_probability":0.1}}
//   {"t_ms":0,"clock_id":"boston","face_count":1}
//   ...
//
// "policy" overrides warp fields per clock; "link" and "network" override
// the config's models. duration_ms defaults to the last event time.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "clook/config.hpp"

namespace clook {

struct ClockSpec {
  std::string id;
  int tz_offset_minutes = 0;
  /// Partial WarpPolicy object, possibly empty.
  Json policy = Json::object();
};

struct ScenarioEvent {
  Millis t_ms = 0;
  std::string clock_id;
  int face_count = 0;
};

struct Scenario {
  std::vector<ClockSpec> clocks;
  std::vector<ScenarioEvent> events;
  std::uint64_t seed = 0;
  Millis start_utc_ms = 0;
  std::optional<Millis> duration_ms;
  std::optional<Json> link;
  std::optional<Json> network;

  Millis duration() const;
  /// Throws ScenarioError (line 0) on structural problems.
  void validate() const;
};

/// Malformed scenario, located by 1-based line (0 when not line-specific)
/// and field name.
class ScenarioError : public ValidationError {
 public:
  ScenarioError(std::size_t line, std::string field, const std::string& message);

  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

Scenario parse_scenario(std::istream& in);
Scenario load_scenario(const std::filesystem::path& path);
void write_scenario(std::ostream& out, const Scenario& scenario);

Json header_json(const Scenario& scenario);
Json to_json(const Scenario& scenario);
/// Inverse of to_json (used to rebuild a run from a trace header).
Scenario scenario_from_json(const Json& j);

}  // namespace clook

#endif  // CLOOK_SCENARIO_HPP_

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

#include "clook/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

namespace clook {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ValidationError(path + ": " + what);
}

void require_object(const Json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "must be an object");
}

void reject_unknown(const Json& j, const std::string& path,
                    std::initializer_list<std::string_view> known) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (auto k : known) ok = ok || it.key() == k;
    if (!ok) fail(path + "." + it.key(), "unknown field");
  }
}

const Json* field(const Json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

void read_number(const Json& j, const char* key, const std::string& path, double& out) {
  if (const Json* v = field(j, key)) {
    if (!v->is_number()) fail(path + "." + key, "must be a number");
    out = v->get<double>();
  }
}

template <class Int>
void read_int(const Json& j, const char* key, const std::string& path, Int& out) {
  if (const Json* v = field(j, key)) {
    if (!v->is_number_integer()) fail(path + "." + key, "must be an integer");
    out = v->get<Int>();
  }
}

void read_bool(const Json& j, const char* key, const std::string& path, bool& out) {
  if (const Json* v = field(j, key)) {
    if (!v->is_boolean()) fail(path + "." + key, "must be a boolean");
    out = v->get<bool>();
  }
}

void read_string(const Json& j, const char* key, const std::string& path, std::string& out) {
  if (const Json* v = field(j, key)) {
    if (!v->is_string()) fail(path + "." + key, "must be a string");
    out = v->get<std::string>();
  }
}

void read_rational(const Json& j, const char* key, const std::string& path, Rational& out) {
  const Json* v = field(j, key);
  if (!v) return;
  try {
    if (v->is_string()) {
      out = parse_rational(v->get<std::string>());
    } else if (v->is_number_integer()) {
      out = {v->get<std::int64_t>(), 1};
    } else if (v->is_number()) {
      std::ostringstream os;
      os << v->get<double>();
      out = parse_rational(os.str());
    } else {
      fail(path + "." + key, "must be a rational like \"1/12\"");
    }
  } catch (const ValidationError& e) {
    fail(path + "." + key, e.what());
  }
}

ResyncPolicy parse_resync(const Json& j, const std::string& path) {
  auto mode_from = [&](const std::string& name) {
    if (name == "NONE") return ResyncMode::None;
    if (name == "SNAP") return ResyncMode::Snap;
    if (name == "SLEW") return ResyncMode::Slew;
    fail(path, "unknown resync mode '" + name + "'");
  };
  if (j.is_string()) {
    const auto mode = mode_from(j.get<std::string>());
    return {mode, 1.0};
  }
  require_object(j, path);
  reject_unknown(j, path, {"mode", "rate"});
  std::string name = "NONE";
  read_string(j, "mode", path, name);
  ResyncPolicy rs{mode_from(name), 1.0};
  read_number(j, "rate", path, rs.slew_rate);
  return rs;
}

GearTrain merge_gear(const GearTrain& base, const Json& j, const std::string& path) {
  require_object(j, path);
  reject_unknown(j, path,
                 {"steps_per_motor_rev", "motor_to_ring_ratio", "ring_revs_per_displayed_hour"});
  GearTrain g = base;
  read_int(j, "steps_per_motor_rev", path, g.steps_per_motor_rev);
  read_rational(j, "motor_to_ring_ratio", path, g.motor_to_ring_ratio);
  read_rational(j, "ring_revs_per_displayed_hour", path, g.ring_revs_per_displayed_hour);
  try {
    g.validate();
  } catch (const ValidationError& e) {
    fail(path, e.what());
  }
  return g;
}

Json gear_json(const GearTrain& g) {
  return Json{{"steps_per_motor_rev", g.steps_per_motor_rev},
              {"motor_to_ring_ratio", to_string(g.motor_to_ring_ratio)},
              {"ring_revs_per_displayed_hour", to_string(g.ring_revs_per_displayed_hour)}};
}

}  // namespace

WarpPolicy merge_warp(const WarpPolicy& base, const Json& j, const std::string& path) {
  require_object(j, path);
  reject_unknown(j, path, {"rate_watching", "rate_away", "rate_conversation", "resync",
                           "override_duration_ms"});
  WarpPolicy w = base;
  read_number(j, "rate_watching", path, w.rate_watching);
  read_number(j, "rate_away", path, w.rate_away);
  read_number(j, "rate_conversation", path, w.rate_conversation);
  if (const Json* rs = field(j, "resync")) w.resync = parse_resync(*rs, path + ".resync");
  read_int(j, "override_duration_ms", path, w.override_duration_ms);
  try {
    w.validate();
  } catch (const ValidationError& e) {
    fail(path, e.what());
  }
  return w;
}

LinkModel merge_link(const LinkModel& base, const Json& j, const std::string& path) {
  require_object(j, path);
  reject_unknown(j, path, {"latency_ms", "jitter_ms", "drop_probability", "seed", "allow_reorder"});
  LinkModel l = base;
  read_int(j, "latency_ms", path, l.latency_ms);
  read_int(j, "jitter_ms", path, l.jitter_ms);
  read_number(j, "drop_probability", path, l.drop_probability);
  read_int(j, "seed", path, l.seed);
  read_bool(j, "allow_reorder", path, l.allow_reorder);
  try {
    l.validate();
  } catch (const ValidationError& e) {
    fail(path, e.what());
  }
  return l;
}

void SimConfig::validate() const {
  warp.validate();
  drive.validate();
  link.validate();
  network.validate();
  if (hold_ms < 0) throw ValidationError("attention.hold_ms must be >= 0");
  if (sample_ms <= 0) throw ValidationError("sim.sample_ms must be > 0");
  if (staleness_ms <= 0) throw ValidationError("sim.staleness_ms must be > 0");
}

SimConfig parse_config(const Json& j) {
  require_object(j, "config");
  reject_unknown(j, "config", {"warp", "gear", "link", "network", "peer", "attention", "sim"});
  SimConfig c;
  if (const Json* w = field(j, "warp")) c.warp = merge_warp(c.warp, *w, "warp");
  if (const Json* g = field(j, "gear")) {
    require_object(*g, "gear");
    reject_unknown(*g, "gear", {"minute", "hour", "step_period_ms"});
    if (const Json* m = field(*g, "minute")) c.drive.minute = merge_gear(c.drive.minute, *m, "gear.minute");
    if (const Json* h = field(*g, "hour")) c.drive.hour = merge_gear(c.drive.hour, *h, "gear.hour");
    read_int(*g, "step_period_ms", "gear", c.drive.step_period_ms);
  }
  if (const Json* l = field(j, "link")) c.link = merge_link(c.link, *l, "link");
  if (const Json* n = field(j, "network")) c.network = merge_link(c.network, *n, "network");
  if (const Json* p = field(j, "peer")) {
    require_object(*p, "peer");
    reject_unknown(*p, "peer", {"local_id", "peer_id", "tz_offset_minutes", "heartbeat_ms",
                                "overlap_window_ms", "show_duration_ms", "mutual_timeout_ms",
                                "cooldown_ms", "handshake_retry_ms"});
    read_string(*p, "local_id", "peer", c.peer.local_id);
    read_string(*p, "peer_id", "peer", c.peer.peer_id);
    read_int(*p, "tz_offset_minutes", "peer", c.peer.tz_offset_minutes);
    read_int(*p, "heartbeat_ms", "peer", c.peer.heartbeat_ms);
    read_int(*p, "overlap_window_ms", "peer", c.peer.overlap_window_ms);
    read_int(*p, "show_duration_ms", "peer", c.peer.show_duration_ms);
    read_int(*p, "mutual_timeout_ms", "peer", c.peer.mutual_timeout_ms);
    read_int(*p, "cooldown_ms", "peer", c.peer.cooldown_ms);
    read_int(*p, "handshake_retry_ms", "peer", c.peer.handshake_retry_ms);
    // Ids are usually supplied later; check the rest now.
    PeerConfig probe = c.peer;
    if (probe.local_id.empty()) probe.local_id = probe.peer_id + "#";
    try {
      probe.validate();
    } catch (const ValidationError& e) {
      fail("peer", e.what());
    }
  }
  if (const Json* a = field(j, "attention")) {
    require_object(*a, "attention");
    reject_unknown(*a, "attention", {"hold_ms"});
    read_int(*a, "hold_ms", "attention", c.hold_ms);
  }
  if (const Json* s = field(j, "sim")) {
    require_object(*s, "sim");
    reject_unknown(*s, "sim", {"sample_ms", "staleness_ms"});
    read_int(*s, "sample_ms", "sim", c.sample_ms);
    read_int(*s, "staleness_ms", "sim", c.staleness_ms);
  }
  c.validate();
  return c;
}

SimConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    throw ValidationError("config " + path.string() + ": " + e.what());
  }
  return parse_config(j);
}

Json to_json(const WarpPolicy& w) {
  return Json{{"rate_watching", w.rate_watching},
              {"rate_away", w.rate_away},
              {"rate_conversation", w.rate_conversation},
              {"resync", Json{{"mode", to_string(w.resync.mode)}, {"rate", w.resync.slew_rate}}},
              {"override_duration_ms", w.override_duration_ms}};
}

Json to_json(const LinkModel& l) {
  return Json{{"latency_ms", l.latency_ms},
              {"jitter_ms", l.jitter_ms},
              {"drop_probability", l.drop_probability},
              {"seed", l.seed},
              {"allow_reorder", l.allow_reorder}};
}

Json to_json(const SimConfig& c) {
  Json peer{{"local_id", c.peer.local_id},
            {"peer_id", c.peer.peer_id},
            {"tz_offset_minutes", c.peer.tz_offset_minutes},
            {"heartbeat_ms", c.peer.heartbeat_ms},
            {"overlap_window_ms", c.peer.overlap_window_ms},
            {"show_duration_ms", c.peer.show_duration_ms},
            {"mutual_timeout_ms", c.peer.mutual_timeout_ms},
            {"cooldown_ms", c.peer.cooldown_ms},
            {"handshake_retry_ms", c.peer.handshake_retry_ms}};
  return Json{{"warp", to_json(c.warp)},
              {"gear", Json{{"minute", gear_json(c.drive.minute)},
                            {"hour", gear_json(c.drive.hour)},
                            {"step_period_ms", c.drive.step_period_ms}}},
              {"link", to_json(c.link)},
              {"network", to_json(c.network)},
              {"peer", std::move(peer)},
              {"attention", Json{{"hold_ms", c.hold_ms}}},
              {"sim", Json{{"sample_ms", c.sample_ms}, {"staleness_ms", c.staleness_ms}}}};
}

}  // namespace clook

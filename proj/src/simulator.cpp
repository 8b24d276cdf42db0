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

#include "clook/simulator.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <memory>
#include <ostream>
#include <queue>
#include <thread>

#include <spdlog/spdlog.h>

namespace clook {

namespace {

constexpr std::uint64_t kSaltLink = 0x6c696e6b;
constexpr std::uint64_t kSaltNetwork = 0x6e6574;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

enum class Prio : std::uint8_t { Observation = 0, Timer = 1, Sample = 2 };

struct Event {
  Millis t = 0;
  Prio prio = Prio::Timer;
  std::uint64_t seq = 0;
  enum class Type : std::uint8_t { Observe, Timer, Message, Sample } type = Type::Timer;
  std::size_t node = 0;
  NodeTimer timer{};
  int face_count = 0;
  std::string wire;
};

struct Later {
  bool operator()(const Event& a, const Event& b) const {
    if (a.t != b.t) return a.t > b.t;
    if (a.prio != b.prio) return a.prio > b.prio;
    return a.seq > b.seq;
  }
};

class Sim final : public NodeHost {
 public:
  Sim(const Scenario& sc, const SimConfig& cfg) : sc_(sc), cfg_(cfg) {
    const std::size_t n = sc.clocks.size();
    for (std::size_t i = 0; i < n; ++i) {
      const ClockSpec& spec = sc.clocks[i];
      NodeSetup setup;
      setup.id = spec.id;
      setup.tz_offset_minutes = spec.tz_offset_minutes;
      setup.warp = merge_warp(cfg.warp, spec.policy, "clocks[" + std::to_string(i) + "].policy");
      setup.drive = cfg.drive;
      setup.link = sc.link ? merge_link(cfg.link, *sc.link, "link") : cfg.link;
      setup.link.seed = derive_seed(sc.seed, setup.link.seed, i, kSaltLink);
      setup.hold_ms = cfg.hold_ms;
      if (n == 2) {
        PeerConfig peer = cfg.peer;
        peer.local_id = spec.id;
        peer.peer_id = sc.clocks[1 - i].id;
        peer.tz_offset_minutes = spec.tz_offset_minutes;
        setup.peer = peer;
        LinkModel net = sc.network ? merge_link(cfg.network, *sc.network, "network") : cfg.network;
        net.seed = derive_seed(sc.seed, net.seed, i, kSaltNetwork);
        network_.push_back(std::make_unique<Channel>(net));
      }
      nodes_.push_back(std::make_unique<ClockNode>(std::move(setup), i, *this));
      index_[spec.id] = i;
    }
  }

  RunResult run() {
    const Millis end = sc_.duration();
    for (const auto& ev : sc_.events) {
      Event e;
      e.t = ev.t_ms;
      e.prio = Prio::Observation;
      e.type = Event::Type::Observe;
      e.node = index_.at(ev.clock_id);
      e.face_count = ev.face_count;
      push(std::move(e));
    }
    for (auto& node : nodes_) node->start(0);
    push_sample(0);

    while (!heap_.empty() && heap_.top().t <= end) {
      Event e = heap_.top();
      heap_.pop();
      now_ = e.t;
      switch (e.type) {
        case Event::Type::Observe:
          nodes_[e.node]->observe(e.t, e.face_count);
          break;
        case Event::Type::Timer:
          nodes_[e.node]->fire(e.timer, e.t);
          break;
        case Event::Type::Message:
          nodes_[e.node]->receive(parse_wire(e.wire), e.t);
          break;
        case Event::Type::Sample:
          for (auto& node : nodes_) node->sample(e.t);
          if (e.t < end) push_sample(std::min(e.t + cfg_.sample_ms, end));
          break;
      }
    }

    RunResult out;
    out.trace.header = trace_header(to_json(sc_), to_json(cfg_));
    out.trace.events = std::move(events_);
    for (const auto& node : nodes_) {
      ClockSummary s;
      s.id = node->id();
      s.metrics = node->live_metrics();
      s.displayed_tod_ms = node->displayed_tod(end);
      s.attention = node->attention();
      s.minute_settled = node->settled_position(RingId::Minute);
      s.hour_settled = node->settled_position(RingId::Hour);
      s.step_commands = node->step_commands();
      s.link = node->link_stats();
      out.clocks.push_back(std::move(s));
    }
    return out;
  }

  void schedule(Millis at, std::size_t node, NodeTimer timer) override {
    Event e;
    e.t = at;
    e.type = Event::Type::Timer;
    e.node = node;
    e.timer = timer;
    push(std::move(e));
  }

  void send_presence(std::size_t from, const PresenceMessage& msg, Millis now) override {
    if (nodes_.size() != 2) return;
    const auto at = network_[from]->transmit(now);
    if (!at) return;
    Event e;
    e.t = *at;
    e.type = Event::Type::Message;
    e.node = 1 - from;
    e.wire = to_wire(msg);
    push(std::move(e));
  }

  void emit(TraceEvent ev) override { events_.push_back(std::move(ev)); }

  Millis utc_at(Millis t) const override { return sc_.start_utc_ms + t; }

 private:
  void push(Event e) {
    e.seq = seq_++;
    heap_.push(std::move(e));
  }

  void push_sample(Millis t) {
    Event e;
    e.t = t;
    e.prio = Prio::Sample;
    e.type = Event::Type::Sample;
    push(std::move(e));
  }

  const Scenario& sc_;
  const SimConfig& cfg_;
  std::vector<std::unique_ptr<ClockNode>> nodes_;
  std::vector<std::unique_ptr<Channel>> network_;
  std::map<std::string, std::size_t> index_;
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  std::vector<TraceEvent> events_;
  std::uint64_t seq_ = 0;
  Millis now_ = 0;
};

}  // namespace

std::uint64_t derive_seed(std::uint64_t scenario_seed, std::uint64_t model_seed,
                          std::uint64_t clock_index, std::uint64_t salt) {
  std::uint64_t x = splitmix64(scenario_seed);
  x = splitmix64(x ^ model_seed);
  x = splitmix64(x ^ clock_index);
  return splitmix64(x ^ salt);
}

RunResult run(const Scenario& scenario, const SimConfig& config) {
  scenario.validate();
  config.validate();
  spdlog::debug("run: {} clock(s), {} events, duration {} ms", scenario.clocks.size(),
                scenario.events.size(), scenario.duration());
  Sim sim(scenario, config);
  return sim.run();
}

ReplayReport replay(const Trace& trace, double speed, std::ostream& out) {
  const Json& h = trace.header;
  if (!h.contains("scenario") || !h.contains("config")) {
    throw ValidationError("trace header lacks scenario or config");
  }
  const Scenario sc = scenario_from_json(h.at("scenario"));
  const SimConfig cfg = parse_config(h.at("config"));
  const RunResult rerun = run(sc, cfg);

  std::vector<const TraceEvent*> recorded;
  std::vector<const TraceEvent*> fresh;
  for (const auto& ev : trace.events) {
    if (ev.kind == TraceKind::DisplaySample) recorded.push_back(&ev);
  }
  for (const auto& ev : rerun.trace.events) {
    if (ev.kind == TraceKind::DisplaySample) fresh.push_back(&ev);
  }

  ReplayReport report;
  report.samples = recorded.size();
  const bool paced = speed > 0.0 && std::isfinite(speed);
  const auto wall_start = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < std::max(recorded.size(), fresh.size()); ++i) {
    if (i >= recorded.size() || i >= fresh.size()) {
      ++report.mismatches;
      continue;
    }
    const std::string line = to_line(*recorded[i]);
    if (line != to_line(*fresh[i])) {
      ++report.mismatches;
      spdlog::warn("replay: sample {} differs at t={} ({})", i, recorded[i]->t_ms,
                   recorded[i]->clock_id);
    }
    if (paced) {
      const auto due = wall_start + std::chrono::duration<double, std::milli>(
                                        static_cast<double>(recorded[i]->t_ms) / speed);
      std::this_thread::sleep_until(due);
    }
    out << line << '\n';
  }
  out.flush();
  return report;
}

}  // namespace clook

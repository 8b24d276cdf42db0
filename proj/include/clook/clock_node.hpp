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

#ifndef CLOOK_CLOCK_NODE_HPP_
#define CLOOK_CLOCK_NODE_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "clook/attention.hpp"
#include "clook/motor.hpp"
#include "clook/presence.hpp"
#include "clook/serial_link.hpp"
#include "clook/timewarp.hpp"
#include "clook/trace.hpp"

namespace clook {

struct NodeTimer {
  enum class Kind : std::uint8_t {
    Debounce,
    RingWake,
    PresenceWake,
    OverrideExpiry,
    ResyncWake,
    FrameDelivery,
    StepComplete,
  };
  Kind kind = Kind::Debounce;
  /// Generation for re-armable timers, command id for frames and steps.
  std::uint64_t token = 0;
  RingId ring = RingId::Minute;
};

/// What a node needs from its surroundings: the simulator's event heap or
/// the live gateway's real-time loop.
class NodeHost {
 public:
  virtual ~NodeHost() = default;
  virtual void schedule(Millis at, std::size_t node, NodeTimer timer) = 0;
  virtual void send_presence(std::size_t from, const PresenceMessage& msg, Millis now) = 0;
  virtual void emit(TraceEvent ev) = 0;
  /// UTC wall time (ms since epoch) at a node timestamp.
  virtual Millis utc_at(Millis t) const = 0;
};

struct NodeSetup {
  std::string id;
  int tz_offset_minutes = 0;
  WarpPolicy warp;
  DriveConfig drive;
  /// Camera board to hour-motor board.
  LinkModel link;
  Millis hold_ms = kDefaultHoldMs;
  /// Present when paired.
  std::optional<PeerConfig> peer;
};

enum class DisplayMode : std::uint8_t { Normal, Fast, Frozen, Remote };
std::string_view to_string(DisplayMode mode);

/// One complete clock: debouncer, warped clock, two-ring drive with the
/// hour motor behind the serial link, and optionally a presence session.
class ClockNode {
 public:
  ClockNode(NodeSetup setup, std::size_t index, NodeHost& host);

  /// Puts both rings on the civil time at `now` and starts everything.
  void start(Millis now);
  void observe(Millis t, int face_count);
  void receive(const PresenceMessage& msg, Millis now);
  void fire(const NodeTimer& timer, Millis now);
  /// Emits a DISPLAY_SAMPLE.
  void sample(Millis now);

  const std::string& id() const { return setup_.id; }
  const NodeSetup& setup() const { return setup_; }
  double displayed_tod(Millis now) const { return clock_->advance(now); }
  DisplayMode mode(Millis now) const;
  double civil_tod(Millis now) const;
  const WarpedClock& clock() const { return *clock_; }
  AttentionState attention() const { return clock_->attention(); }
  const PresenceSession* presence() const { return presence_ ? &*presence_ : nullptr; }

  /// Physical ring positions.
  const RingState& ring(RingId r) const { return r == RingId::Minute ? minute_ : hour_; }
  /// Positions the planner believes in (open loop).
  const RingState& commanded(RingId r) const {
    return r == RingId::Minute ? minute_cmd_ : hour_cmd_;
  }
  /// Physical position once every command still in flight has executed.
  std::int64_t settled_position(RingId r) const;
  const LinkStats& link_stats() const { return decoder_.stats(); }
  std::uint64_t step_commands() const { return next_cmd_id_ - 1; }

  /// Metrics as of the last sample, kept independently of the trace.
  RunMetrics live_metrics() const { return metrics_; }

 private:
  struct InFlight {
    StepCommand cmd;
    std::vector<std::uint8_t> frame;
    Millis started_at = 0;
  };

  void emit(Millis t, TraceKind kind, Json payload);
  void apply_transition(const AttentionTransition& tr);
  void rearm_debounce();
  void resync(Millis now);
  void handle(const PresenceEffects& fx, Millis now);
  void replan(Millis now, PlanMode mode);
  void replan_ring(RingId r, Millis now, PlanMode mode);
  void dispatch(StepCommand cmd, Millis now, double target);
  void start_steps(std::uint64_t id, Millis at);
  double skew() const;

  NodeSetup setup_;
  std::size_t index_;
  NodeHost& host_;
  Debouncer debouncer_;
  std::optional<WarpedClock> clock_;
  std::optional<PresenceSession> presence_;
  Channel channel_;
  FrameDecoder decoder_;

  RingState minute_{RingId::Minute, 0};
  RingState hour_{RingId::Hour, 0};
  RingState minute_cmd_{RingId::Minute, 0};
  RingState hour_cmd_{RingId::Hour, 0};
  Millis minute_busy_until_ = 0;
  Millis hour_busy_until_ = 0;
  std::int64_t minute_pending_ = 0;
  std::int64_t hour_pending_ = 0;
  std::map<std::uint64_t, InFlight> in_flight_;
  std::uint64_t next_cmd_id_ = 1;

  std::uint64_t debounce_gen_ = 0;
  std::uint64_t minute_wake_gen_ = 0;
  std::uint64_t hour_wake_gen_ = 0;
  std::uint64_t presence_gen_ = 0;
  std::uint64_t override_gen_ = 0;
  std::uint64_t resync_gen_ = 0;

  Millis start_t_ = 0;
  double start_civil_ = 0.0;
  RunMetrics metrics_;
  std::array<Millis, 3> dwell_acc_{};
  Millis state_since_ = 0;
};

}  // namespace clook

#endif  // CLOOK_CLOCK_NODE_HPP_

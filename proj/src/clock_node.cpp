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

#include "clook/clock_node.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace clook {

namespace {

constexpr std::int64_t kMaxBatch = std::numeric_limits<std::uint16_t>::max();

Json wire_json(const PresenceMessage& msg) { return Json::parse(to_wire(msg)); }

}  // namespace

std::string_view to_string(DisplayMode mode) {
  switch (mode) {
    case DisplayMode::Normal:
      return "NORMAL";
    case DisplayMode::Fast:
      return "FAST";
    case DisplayMode::Frozen:
      return "FROZEN";
    case DisplayMode::Remote:
      return "REMOTE";
  }
  return "NORMAL";
}

ClockNode::ClockNode(NodeSetup setup, std::size_t index, NodeHost& host)
    : setup_(std::move(setup)),
      index_(index),
      host_(host),
      debouncer_(setup_.hold_ms),
      channel_(setup_.link) {
  setup_.warp.validate();
  setup_.drive.validate();
  if (setup_.peer) presence_.emplace(*setup_.peer);
}

void ClockNode::emit(Millis t, TraceKind kind, Json payload) {
  host_.emit(TraceEvent{t, setup_.id, kind, std::move(payload)});
}

double ClockNode::civil_tod(Millis now) const {
  return static_cast<double>(local_civil_tod(setup_.tz_offset_minutes, host_.utc_at(now)));
}

DisplayMode ClockNode::mode(Millis now) const {
  if (clock_->override_active(now)) return DisplayMode::Remote;
  const double rate = clock_->current_rate();
  if (rate == 0.0) return DisplayMode::Frozen;
  if (rate > 1.0) return DisplayMode::Fast;
  return DisplayMode::Normal;
}

std::int64_t ClockNode::settled_position(RingId r) const {
  return r == RingId::Minute ? minute_.step_position + minute_pending_
                             : hour_.step_position + hour_pending_;
}

double ClockNode::skew() const { return hand_skew(minute_, hour_, setup_.drive); }

void ClockNode::start(Millis now) {
  start_t_ = now;
  start_civil_ = civil_tod(now);
  clock_.emplace(setup_.warp, now, start_civil_, AttentionState::Away);
  for (RingState* r : {&minute_, &hour_}) {
    const auto plan = plan_ring(*r, setup_.drive.gear(r->ring), start_civil_, now);
    r->step_position = std::llround(plan.ideal_position);
  }
  minute_cmd_ = minute_;
  hour_cmd_ = hour_;
  minute_busy_until_ = hour_busy_until_ = now;
  state_since_ = now;
  emit(now, TraceKind::Attention, Json{{"state", to_string(AttentionState::Away)}});
  if (presence_) handle(presence_->start(now), now);
  replan(now, PlanMode::ForwardOnly);
}

void ClockNode::observe(Millis t, int face_count) {
  for (const auto& tr : debouncer_.observe(t, face_count)) apply_transition(tr);
  rearm_debounce();
}

void ClockNode::rearm_debounce() {
  ++debounce_gen_;
  if (auto at = debouncer_.deadline()) {
    host_.schedule(*at, index_, NodeTimer{NodeTimer::Kind::Debounce, debounce_gen_});
  }
}

void ClockNode::apply_transition(const AttentionTransition& tr) {
  // Live hosts can deliver a confirmation late; never step behind the clock.
  const Millis now = std::max(tr.t, clock_->wall_anchor());
  const AttentionState prev = clock_->attention();
  if (tr.state == prev) return;
  dwell_acc_[static_cast<std::size_t>(prev)] += now - state_since_;
  state_since_ = now;
  clock_->set_attention(tr.state, now);
  emit(now, TraceKind::Attention, Json{{"state", to_string(tr.state)}});
  bool jumped = false;
  if (setup_.warp.resync.mode != ResyncMode::None) {
    const double before = clock_->trajectory_unwrapped(now);
    resync(now);
    jumped = clock_->trajectory_unwrapped(now) != before;
  }
  if (presence_) handle(presence_->on_local_attention(tr.state, now, civil_tod(now)), now);
  replan(now, jumped ? PlanMode::ShortestPath : PlanMode::ForwardOnly);
}

void ClockNode::resync(Millis now) {
  ++resync_gen_;
  if (auto at = clock_->resync_tick(civil_tod(now), now)) {
    host_.schedule(*at, index_, NodeTimer{NodeTimer::Kind::ResyncWake, resync_gen_});
  }
}

void ClockNode::receive(const PresenceMessage& msg, Millis now) {
  if (!presence_) return;
  emit(now, TraceKind::Presence, Json{{"event", "rx"}, {"msg", wire_json(msg)}});
  handle(presence_->on_message(msg, now, civil_tod(now)), now);
}

void ClockNode::handle(const PresenceEffects& fx, Millis now) {
  for (const auto& msg : fx.outbound) {
    emit(now, TraceKind::Presence, Json{{"event", "tx"}, {"msg", wire_json(msg)}});
    host_.send_presence(index_, msg, now);
  }
  for (PresenceState s : fx.transitions) {
    emit(now, TraceKind::Presence, Json{{"event", "state"}, {"state", to_string(s)}});
    if (s == PresenceState::Showing) ++metrics_.mutual_show_count;
  }
  if (fx.revoke && clock_->override_state()) {
    clock_->clear_override(now);
    ++override_gen_;
    emit(now, TraceKind::Override, Json{{"event", "revoke"}});
    replan(now, PlanMode::ShortestPath);
  }
  if (fx.grant) {
    clock_->apply_override(fx.grant->remote_tod_ms, now, fx.grant->duration_ms);
    ++override_gen_;
    const Millis until = now + fx.grant->duration_ms;
    emit(now, TraceKind::Override,
         Json{{"event", "start"},
              {"window_id", fx.grant->window_id},
              {"remote_tod_ms", fx.grant->remote_tod_ms},
              {"until_ms", until}});
    host_.schedule(until, index_, NodeTimer{NodeTimer::Kind::OverrideExpiry, override_gen_});
    replan(now, PlanMode::ShortestPath);
  }
  ++presence_gen_;
  if (auto at = presence_->next_deadline()) {
    host_.schedule(std::max(*at, now), index_,
                   NodeTimer{NodeTimer::Kind::PresenceWake, presence_gen_});
  }
}

void ClockNode::fire(const NodeTimer& timer, Millis now) {
  using K = NodeTimer::Kind;
  switch (timer.kind) {
    case K::Debounce:
      if (timer.token != debounce_gen_) return;
      for (const auto& tr : debouncer_.advance_to(now)) apply_transition(tr);
      rearm_debounce();
      return;
    case K::RingWake: {
      const auto gen = timer.ring == RingId::Minute ? minute_wake_gen_ : hour_wake_gen_;
      if (timer.token != gen) return;
      replan_ring(timer.ring, now, PlanMode::ForwardOnly);
      return;
    }
    case K::PresenceWake:
      if (timer.token != presence_gen_ || !presence_) return;
      handle(presence_->on_timer(now, civil_tod(now)), now);
      return;
    case K::OverrideExpiry:
      if (timer.token != override_gen_) return;
      emit(now, TraceKind::Override, Json{{"event", "end"}});
      replan(now, PlanMode::ShortestPath);
      return;
    case K::ResyncWake:
      if (timer.token != resync_gen_) return;
      resync(now);
      replan(now, PlanMode::ForwardOnly);
      return;
    case K::FrameDelivery: {
      auto it = in_flight_.find(timer.token);
      if (it == in_flight_.end()) return;
      const auto msgs = decoder_.feed(it->second.frame);
      const bool ok = msgs.size() == 1 && parse_step_batch(msgs.front()).has_value();
      emit(now, TraceKind::FrameRx,
           Json{{"cmd", timer.token}, {"bytes", to_hex(it->second.frame)}, {"ok", ok}});
      if (ok) {
        start_steps(timer.token, std::max(now, hour_busy_until_));
      } else {
        hour_pending_ -= it->second.cmd.signed_steps();
        in_flight_.erase(it);
      }
      return;
    }
    case K::StepComplete: {
      auto it = in_flight_.find(timer.token);
      if (it == in_flight_.end()) return;
      const StepCommand& cmd = it->second.cmd;
      RingState& ring = cmd.motor == RingId::Minute ? minute_ : hour_;
      ring = apply_steps(ring, cmd, it->second.started_at, setup_.drive.step_period_ms).state;
      (cmd.motor == RingId::Minute ? minute_pending_ : hour_pending_) -= cmd.signed_steps();
      const double s = skew();
      metrics_.max_hand_skew_deg = std::max(metrics_.max_hand_skew_deg, s);
      emit(now, TraceKind::Step,
           Json{{"event", "applied"},
                {"cmd", cmd.id},
                {"motor", to_string(cmd.motor)},
                {"position", ring.step_position},
                {"angle_deg", ring_angle(ring, setup_.drive.gear(cmd.motor))},
                {"skew_deg", s}});
      in_flight_.erase(it);
      return;
    }
  }
}

void ClockNode::replan(Millis now, PlanMode mode) {
  replan_ring(RingId::Minute, now, mode);
  replan_ring(RingId::Hour, now, mode);
}

void ClockNode::replan_ring(RingId r, Millis now, PlanMode mode) {
  RingState& cmd_state = r == RingId::Minute ? minute_cmd_ : hour_cmd_;
  const GearTrain& gear = setup_.drive.gear(r);
  const auto plan = plan_ring(cmd_state, gear, clock_->advance(now), now, mode);
  if (plan.command) dispatch(*plan.command, now, plan.ideal_position);

  // Sleep until the nearest step moves on: ideal + rate * t crosses p + 0.5.
  auto& gen = r == RingId::Minute ? minute_wake_gen_ : hour_wake_gen_;
  ++gen;
  const double rate = clock_->effective_rate(now);
  if (rate <= 0.0) return;
  const double steps_per_ms = gear.steps_per_displayed_hour() / static_cast<double>(kHourMs) * rate;
  const double gap = static_cast<double>(cmd_state.step_position) + 0.5 - plan.ideal_position;
  const auto dt = static_cast<Millis>(std::ceil(gap / steps_per_ms));
  host_.schedule(now + std::max<Millis>(dt, 1), index_,
                 NodeTimer{NodeTimer::Kind::RingWake, gen, r});
}

void ClockNode::dispatch(StepCommand planned, Millis now, double target) {
  RingState& cmd_state = planned.motor == RingId::Minute ? minute_cmd_ : hour_cmd_;
  std::int64_t remaining = planned.step_count;
  while (remaining > 0) {
    StepCommand cmd = planned;
    cmd.id = next_cmd_id_++;
    cmd.step_count = std::min(remaining, kMaxBatch);
    remaining -= cmd.step_count;
    cmd_state.step_position += cmd.signed_steps();
    emit(now, TraceKind::Step,
         Json{{"event", "planned"},
              {"cmd", cmd.id},
              {"motor", to_string(cmd.motor)},
              {"dir", to_string(cmd.direction)},
              {"count", cmd.step_count},
              {"target", target}});

    if (cmd.motor == RingId::Minute) {
      minute_pending_ += cmd.signed_steps();
      in_flight_[cmd.id] = InFlight{cmd, {}, 0};
      start_steps(cmd.id, std::max(now, minute_busy_until_));
      continue;
    }

    auto frame = encode(make_step_batch(
        {cmd.direction, static_cast<std::uint16_t>(cmd.step_count)}));
    const auto deliver = channel_.transmit(now);
    Json tx{{"cmd", cmd.id}, {"bytes", to_hex(frame)}, {"dropped", !deliver.has_value()}};
    if (deliver) tx["deliver_ms"] = *deliver;
    emit(now, TraceKind::FrameTx, std::move(tx));
    if (!deliver) {
      ++metrics_.frames_dropped;
      continue;
    }
    hour_pending_ += cmd.signed_steps();
    in_flight_[cmd.id] = InFlight{cmd, std::move(frame), 0};
    host_.schedule(*deliver, index_, NodeTimer{NodeTimer::Kind::FrameDelivery, cmd.id});
  }
}

void ClockNode::start_steps(std::uint64_t id, Millis at) {
  InFlight& f = in_flight_.at(id);
  f.started_at = at;
  const Millis done = at + f.cmd.step_count * setup_.drive.step_period_ms;
  (f.cmd.motor == RingId::Minute ? minute_busy_until_ : hour_busy_until_) = done;
  host_.schedule(done, index_, NodeTimer{NodeTimer::Kind::StepComplete, id});
}

void ClockNode::sample(Millis now) {
  const double civil_unwrapped = start_civil_ + static_cast<double>(now - start_t_);
  const double drift = clock_->trajectory_unwrapped(now) - civil_unwrapped;
  const double s = skew();
  const HandAngles angles{ring_angle(minute_, setup_.drive.minute),
                          ring_angle(hour_, setup_.drive.hour)};
  Json p{{"tod_ms", clock_->advance(now)},
         {"mode", to_string(mode(now))},
         {"attention", to_string(clock_->attention())},
         {"trajectory_ms", clock_->trajectory(now)},
         {"civil_ms", civil_tod(now)},
         {"drift_ms", drift},
         {"minute_deg", angles.minute_deg},
         {"hour_deg", angles.hour_deg},
         {"skew_deg", s}};
  if (presence_) p["presence"] = to_string(presence_->state());
  emit(now, TraceKind::DisplaySample, std::move(p));

  metrics_.displayed_drift_ms = drift;
  metrics_.max_hand_skew_deg = std::max(metrics_.max_hand_skew_deg, s);
  metrics_.end_ms = now;
  metrics_.dwell_ms = dwell_acc_;
  metrics_.dwell_ms[static_cast<std::size_t>(clock_->attention())] += now - state_since_;
}

}  // namespace clook

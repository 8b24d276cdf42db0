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

#include "clook/timewarp.hpp"

#include <cmath>
#include <string>

namespace clook {

std::string_view to_string(ResyncMode mode) {
  switch (mode) {
    case ResyncMode::None:
      return "NONE";
    case ResyncMode::Slew:
      return "SLEW";
    case ResyncMode::Snap:
      return "SNAP";
  }
  return "NONE";
}

void WarpPolicy::validate() const {
  auto check = [](const char* name, double r) {
    if (!std::isfinite(r) || r < 0.0) {
      throw ValidationError(std::string(name) + " must be finite and >= 0");
    }
  };
  check("rate_watching", rate_watching);
  check("rate_away", rate_away);
  check("rate_conversation", rate_conversation);
  if (rate_watching <= 0.0) throw ValidationError("rate_watching must be > 0");
  if (resync.mode == ResyncMode::Slew &&
      (!std::isfinite(resync.slew_rate) || resync.slew_rate < 1.0)) {
    throw ValidationError("SLEW rate must be >= 1, got " +
                          std::to_string(resync.slew_rate));
  }
  if (override_duration_ms <= 0) {
    throw ValidationError("override_duration_ms must be > 0");
  }
}

double WarpPolicy::rate_for(AttentionState state) const {
  switch (state) {
    case AttentionState::Watching:
      return rate_watching;
    case AttentionState::Away:
      return rate_away;
    case AttentionState::Conversation:
      return rate_conversation;
  }
  return rate_away;
}

WarpedClock::WarpedClock(WarpPolicy policy, Millis wall_now, double displayed_tod_ms,
                         AttentionState initial)
    : policy_(policy),
      wall_anchor_(wall_now),
      anchor_unwrapped_(wrap_dial(displayed_tod_ms)),
      rate_(0.0),
      attention_(initial) {
  policy_.validate();
  rate_ = policy_.rate_for(initial);
}

void WarpedClock::check_wall(Millis wall_now) const {
  if (wall_now < wall_anchor_) {
    throw MonotonicityError("wall time " + std::to_string(wall_now) +
                            " precedes clock anchor " + std::to_string(wall_anchor_));
  }
}

double WarpedClock::trajectory_unwrapped(Millis wall_now) const {
  check_wall(wall_now);
  return anchor_unwrapped_ + rate_ * static_cast<double>(wall_now - wall_anchor_);
}

double WarpedClock::trajectory(Millis wall_now) const {
  return wrap_dial(trajectory_unwrapped(wall_now));
}

bool WarpedClock::override_active(Millis wall_now) const {
  return override_ && override_->started_at <= wall_now && wall_now < override_->expires_at;
}

double WarpedClock::advance(Millis wall_now) const {
  check_wall(wall_now);
  if (override_active(wall_now)) {
    return wrap_dial(override_->remote_tod_ms +
                     static_cast<double>(wall_now - override_->started_at));
  }
  return trajectory(wall_now);
}

double WarpedClock::effective_rate(Millis wall_now) const {
  return override_active(wall_now) ? 1.0 : rate_;
}

void WarpedClock::reanchor(Millis wall_now) {
  anchor_unwrapped_ = trajectory_unwrapped(wall_now);
  wall_anchor_ = wall_now;
}

void WarpedClock::set_attention(AttentionState state, Millis wall_now) {
  reanchor(wall_now);
  if (state == attention_) return;
  if (state == AttentionState::Watching && policy_.resync.mode == ResyncMode::Snap) {
    snap_pending_ = true;
  }
  if (state != AttentionState::Watching) snap_pending_ = false;
  attention_ = state;
  rate_ = policy_.rate_for(state);
}

void WarpedClock::apply_override(double remote_tod_ms, Millis wall_now) {
  apply_override(remote_tod_ms, wall_now, policy_.override_duration_ms);
}

void WarpedClock::apply_override(double remote_tod_ms, Millis wall_now,
                                 Millis duration_ms) {
  check_wall(wall_now);
  if (duration_ms <= 0) throw ValidationError("override duration must be > 0");
  override_ = ClockOverride{wrap_dial(remote_tod_ms), wall_now, wall_now + duration_ms};
}

void WarpedClock::clear_override(Millis wall_now) {
  check_wall(wall_now);
  override_.reset();
}

std::optional<Millis> WarpedClock::resync_tick(double civil_tod_ms, Millis wall_now) {
  check_wall(wall_now);
  const ResyncPolicy& rs = policy_.resync;
  if (rs.mode == ResyncMode::None || attention_ != AttentionState::Watching) {
    return std::nullopt;
  }
  reanchor(wall_now);
  const double error = dial_delta(wrap_dial(anchor_unwrapped_), civil_tod_ms);

  if (rs.mode == ResyncMode::Snap) {
    if (snap_pending_) {
      anchor_unwrapped_ += error;
      snap_pending_ = false;
    }
    return std::nullopt;
  }

  // SLEW
  if (std::abs(error) < kResyncToleranceMs) {
    rate_ = policy_.rate_watching;
    return std::nullopt;
  }
  rate_ = error > 0 ? rs.slew_rate : 1.0 / rs.slew_rate;
  const double closing = std::abs(rate_ - 1.0);
  if (closing <= 0.0) return std::nullopt;
  const auto dt = static_cast<Millis>(std::ceil(std::abs(error) / closing));
  return wall_now + std::max<Millis>(dt, 1);
}

}  // namespace clook

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

#ifndef CLOOK_TIMEWARP_HPP_
#define CLOOK_TIMEWARP_HPP_

#include <optional>
#include <string_view>

#include "clook/attention.hpp"
#include "clook/common.hpp"

namespace clook {

enum class ResyncMode : std::uint8_t { None, Slew, Snap };

std::string_view to_string(ResyncMode mode);

struct ResyncPolicy {
  ResyncMode mode = ResyncMode::None;
  /// Multiplicative catch-up factor for SLEW, >= 1.
  double slew_rate = 1.0;

  static ResyncPolicy none() { return {}; }
  static ResyncPolicy snap() { return {ResyncMode::Snap, 1.0}; }
  static ResyncPolicy slew(double rate) { return {ResyncMode::Slew, rate}; }

  friend bool operator==(const ResyncPolicy&, const ResyncPolicy&) = default;
};

/// SLEW stops correcting once the display is this close to civil time.
inline constexpr double kResyncToleranceMs = 500.0;

struct WarpPolicy {
  double rate_watching = 1.0;
  double rate_away = 60.0;
  double rate_conversation = 0.0;
  ResyncPolicy resync{};
  Millis override_duration_ms = 10'000;

  /// Throws ValidationError when a rate is negative, rate_watching is zero,
  /// the slew factor is below 1 or the override duration is not positive.
  void validate() const;
  double rate_for(AttentionState state) const;

  friend bool operator==(const WarpPolicy&, const WarpPolicy&) = default;
};

struct ClockOverride {
  double remote_tod_ms = 0.0;
  Millis started_at = 0;
  Millis expires_at = 0;
};

/// Displayed time as a piecewise-linear function of monotonic wall time.
///
/// The underlying trajectory is stored unwrapped (total displayed progress,
/// starting from the initial time-of-day) so drift is measurable across
/// dial wraps; every public time-of-day is reduced onto the 12-hour dial.
/// An override shows another time on top without touching the trajectory.
class WarpedClock {
 public:
  WarpedClock(WarpPolicy policy, Millis wall_now, double displayed_tod_ms,
              AttentionState initial = AttentionState::Away);

  /// Time-of-day on the dial at `wall_now`, override included.
  double advance(Millis wall_now) const;
  /// Underlying warped time-of-day, ignoring any override.
  double trajectory(Millis wall_now) const;
  /// Underlying displayed progress without dial reduction.
  double trajectory_unwrapped(Millis wall_now) const;

  bool override_active(Millis wall_now) const;
  /// Slope of advance() at `wall_now`.
  double effective_rate(Millis wall_now) const;

  void set_attention(AttentionState state, Millis wall_now);
  void apply_override(double remote_tod_ms, Millis wall_now);
  void apply_override(double remote_tod_ms, Millis wall_now, Millis duration_ms);
  void clear_override(Millis wall_now);

  /// Pulls the trajectory back toward civil time per the resync policy.
  /// SNAP applies once after each entry into WATCHING. SLEW adjusts the
  /// rate while WATCHING and returns the wall time at which the display
  /// will meet civil time, so the caller can tick again there.
  std::optional<Millis> resync_tick(double civil_tod_ms, Millis wall_now);

  const WarpPolicy& policy() const { return policy_; }
  Millis wall_anchor() const { return wall_anchor_; }
  double displayed_anchor() const { return wrap_dial(anchor_unwrapped_); }
  double current_rate() const { return rate_; }
  AttentionState attention() const { return attention_; }
  const std::optional<ClockOverride>& override_state() const { return override_; }

 private:
  void check_wall(Millis wall_now) const;
  void reanchor(Millis wall_now);

  WarpPolicy policy_;
  Millis wall_anchor_;
  double anchor_unwrapped_;
  double rate_;
  AttentionState attention_;
  std::optional<ClockOverride> override_;
  bool snap_pending_ = false;
};

// Value-returning forms.

inline double advance(const WarpedClock& clock, Millis wall_now) {
  return clock.advance(wall_now);
}

[[nodiscard]] inline WarpedClock set_attention(WarpedClock clock, AttentionState state,
                                               Millis wall_now) {
  clock.set_attention(state, wall_now);
  return clock;
}

[[nodiscard]] inline WarpedClock apply_override(WarpedClock clock, double remote_tod_ms,
                                                Millis wall_now) {
  clock.apply_override(remote_tod_ms, wall_now);
  return clock;
}

[[nodiscard]] inline WarpedClock resync_tick(WarpedClock clock, double civil_tod_ms,
                                             Millis wall_now) {
  clock.resync_tick(civil_tod_ms, wall_now);
  return clock;
}

}  // namespace clook

#endif  // CLOOK_TIMEWARP_HPP_

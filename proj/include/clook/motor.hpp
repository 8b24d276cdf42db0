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

#ifndef CLOOK_MOTOR_HPP_
#define CLOOK_MOTOR_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "clook/common.hpp"

namespace clook {

struct Rational {
  std::int64_t num = 1;
  std::int64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

/// Parses "3/4", "2" or "0.5" (decimal only when exactly representable as
/// n/10^k). Throws ValidationError.
Rational parse_rational(std::string_view text);
std::string to_string(const Rational& r);

enum class RingId : std::uint8_t { Minute, Hour };
enum class Direction : std::uint8_t { Cw, Ccw };

std::string_view to_string(RingId ring);
std::string_view to_string(Direction dir);

/// One motor + gear stage driving one ring.
struct GearTrain {
  int steps_per_motor_rev = 4096;
  /// Ring revolutions per motor revolution.
  Rational motor_to_ring_ratio{1, 1};
  Rational ring_revs_per_displayed_hour{1, 1};

  void validate() const;
  double steps_per_ring_rev() const;
  /// Ring steps per displayed hour.
  double steps_per_displayed_hour() const;
  double step_degrees() const { return 360.0 / steps_per_ring_rev(); }

  static GearTrain minute_ring() { return {}; }
  static GearTrain hour_ring() { return {4096, {1, 1}, {1, 12}}; }

  friend bool operator==(const GearTrain&, const GearTrain&) = default;
};

struct DriveConfig {
  GearTrain minute = GearTrain::minute_ring();
  GearTrain hour = GearTrain::hour_ring();
  Millis step_period_ms = 2;

  void validate() const;
  const GearTrain& gear(RingId ring) const { return ring == RingId::Minute ? minute : hour; }

  friend bool operator==(const DriveConfig&, const DriveConfig&) = default;
};

struct RingState {
  RingId ring = RingId::Minute;
  /// Cumulative signed step count since power-on.
  std::int64_t step_position = 0;
};

/// Ring angle in [0, 360).
double ring_angle(const RingState& state, const GearTrain& gear);

struct StepCommand {
  std::uint64_t id = 0;
  RingId motor = RingId::Minute;
  Direction direction = Direction::Cw;
  std::int64_t step_count = 1;
  Millis issue_t = 0;

  std::int64_t signed_steps() const {
    return direction == Direction::Cw ? step_count : -step_count;
  }
};

struct HandAngles {
  double minute_deg = 0.0;
  double hour_deg = 0.0;
};

/// Standard analog geometry for a dial time-of-day in [0, 12 h).
HandAngles target_angles(double displayed_tod_ms);

enum class PlanMode : std::uint8_t { ForwardOnly, ShortestPath };

struct RingPlan {
  std::optional<StepCommand> command;
  /// Ideal (unrounded) cumulative step position chosen as the target.
  double ideal_position = 0.0;
};

/// Plans one ring toward the step nearest its target for `displayed_tod_ms`.
///
/// The target is recomputed from the absolute time-of-day every call, so
/// fractional steps never accumulate as drift. ForwardOnly picks the first
/// ideal position at or ahead of the current one (a 12 h wrap keeps going
/// clockwise); ShortestPath may reverse. Command ids are left at 0.
RingPlan plan_ring(const RingState& current, const GearTrain& gear,
                   double displayed_tod_ms, Millis wall_now,
                   PlanMode mode = PlanMode::ForwardOnly);

std::vector<StepCommand> plan_steps(const RingState& minute, const RingState& hour,
                                    const DriveConfig& drive, double displayed_tod_ms,
                                    Millis wall_now,
                                    PlanMode mode = PlanMode::ForwardOnly);

struct AppliedSteps {
  RingState state;
  /// Absent when the command was lost on the way.
  std::optional<Millis> completed_at;
};

/// Executes `cmd` on `state`. `started_at` is when the driver received the
/// command (the issue time for the direct minute motor, the frame delivery
/// time for the hour motor) or nullopt if the frame was dropped.
AppliedSteps apply_steps(const RingState& state, const StepCommand& cmd,
                         std::optional<Millis> started_at, Millis step_period_ms);

/// How far the hour ring is from where the minute ring says it should be:
/// the distance of (hour - minute/12) from the nearest whole hour (30 deg).
double hand_skew(double minute_deg, double hour_deg);
double hand_skew(const RingState& minute, const RingState& hour, const DriveConfig& drive);

}  // namespace clook

#endif  // CLOOK_MOTOR_HPP_

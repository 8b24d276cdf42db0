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

#include "clook/motor.hpp"

#include <charconv>
#include <cmath>
#include <numeric>

namespace clook {

namespace {

std::int64_t parse_int(std::string_view s, std::string_view whole) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ValidationError("not a rational: '" + std::string(whole) + "'");
  }
  return v;
}

Rational normalized(std::int64_t num, std::int64_t den) {
  if (den == 0) throw ValidationError("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num, den);
  return g > 1 ? Rational{num / g, den / g} : Rational{num, den};
}

}  // namespace

Rational parse_rational(std::string_view text) {
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    return normalized(parse_int(text.substr(0, slash), text),
                      parse_int(text.substr(slash + 1), text));
  }
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    const std::string_view frac = text.substr(dot + 1);
    if (frac.empty() || frac.size() > 12) {
      throw ValidationError("not a rational: '" + std::string(text) + "'");
    }
    std::int64_t den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    std::string digits(text.substr(0, dot));
    digits += frac;
    return normalized(parse_int(digits, text), den);
  }
  return normalized(parse_int(text, text), 1);
}

std::string to_string(const Rational& r) {
  return std::to_string(r.num) + "/" + std::to_string(r.den);
}

std::string_view to_string(RingId ring) { return ring == RingId::Minute ? "MINUTE" : "HOUR"; }

std::string_view to_string(Direction dir) { return dir == Direction::Cw ? "CW" : "CCW"; }

void GearTrain::validate() const {
  if (steps_per_motor_rev <= 0) throw ValidationError("steps_per_motor_rev must be > 0");
  if (motor_to_ring_ratio.num <= 0 || motor_to_ring_ratio.den <= 0) {
    throw ValidationError("motor_to_ring_ratio must be a positive rational");
  }
  if (ring_revs_per_displayed_hour.num <= 0 || ring_revs_per_displayed_hour.den <= 0) {
    throw ValidationError("ring_revs_per_displayed_hour must be a positive rational");
  }
}

double GearTrain::steps_per_ring_rev() const {
  return static_cast<double>(steps_per_motor_rev) / motor_to_ring_ratio.value();
}

double GearTrain::steps_per_displayed_hour() const {
  return steps_per_ring_rev() * ring_revs_per_displayed_hour.value();
}

void DriveConfig::validate() const {
  minute.validate();
  hour.validate();
  if (step_period_ms < 0) throw ValidationError("step_period_ms must be >= 0");
}

double ring_angle(const RingState& state, const GearTrain& gear) {
  const double revs = static_cast<double>(state.step_position) / gear.steps_per_ring_rev();
  double deg = (revs - std::floor(revs)) * 360.0;
  if (deg >= 360.0) deg = 0.0;
  return deg;
}

HandAngles target_angles(double displayed_tod_ms) {
  const double tod = wrap_dial(displayed_tod_ms);
  return {std::fmod(tod, static_cast<double>(kHourMs)) / static_cast<double>(kHourMs) * 360.0,
          tod / static_cast<double>(kDialMs) * 360.0};
}

RingPlan plan_ring(const RingState& current, const GearTrain& gear, double displayed_tod_ms,
                   Millis wall_now, PlanMode mode) {
  const double per_rev = gear.steps_per_ring_rev();
  const Rational& rph = gear.ring_revs_per_displayed_hour;
  const double revs = wrap_dial(displayed_tod_ms) * static_cast<double>(rph.num) /
                      (static_cast<double>(kHourMs) * static_cast<double>(rph.den));
  const double phase = (revs - std::floor(revs)) * per_rev;
  const auto pos = static_cast<double>(current.step_position);

  double turns = 0.0;
  if (mode == PlanMode::ForwardOnly) {
    turns = std::ceil((pos - 0.5 - phase) / per_rev);
  } else {
    turns = std::round((pos - phase) / per_rev);
  }
  RingPlan plan;
  plan.ideal_position = phase + turns * per_rev;
  const std::int64_t delta = std::llround(plan.ideal_position) - current.step_position;
  if (delta != 0) {
    plan.command = StepCommand{0, current.ring, delta > 0 ? Direction::Cw : Direction::Ccw,
                               delta > 0 ? delta : -delta, wall_now};
  }
  return plan;
}

std::vector<StepCommand> plan_steps(const RingState& minute, const RingState& hour,
                                    const DriveConfig& drive, double displayed_tod_ms,
                                    Millis wall_now, PlanMode mode) {
  std::vector<StepCommand> out;
  for (const RingState* ring : {&minute, &hour}) {
    auto plan = plan_ring(*ring, drive.gear(ring->ring), displayed_tod_ms, wall_now, mode);
    if (plan.command) out.push_back(*plan.command);
  }
  return out;
}

AppliedSteps apply_steps(const RingState& state, const StepCommand& cmd,
                         std::optional<Millis> started_at, Millis step_period_ms) {
  if (cmd.motor != state.ring) {
    throw ValidationError("step command for " + std::string(to_string(cmd.motor)) +
                          " applied to " + std::string(to_string(state.ring)) + " ring");
  }
  if (cmd.step_count < 1) throw ValidationError("step_count must be >= 1");
  if (!started_at) return {state, std::nullopt};
  RingState next = state;
  next.step_position += cmd.signed_steps();
  return {next, *started_at + cmd.step_count * step_period_ms};
}

double hand_skew(double minute_deg, double hour_deg) {
  const double d = hour_deg - minute_deg / 12.0;
  return std::abs(d - 30.0 * std::round(d / 30.0));
}

double hand_skew(const RingState& minute, const RingState& hour, const DriveConfig& drive) {
  return hand_skew(ring_angle(minute, drive.minute), ring_angle(hour, drive.hour));
}

}  // namespace clook

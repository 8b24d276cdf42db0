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

#ifndef CLOOK_COMMON_HPP_
#define CLOOK_COMMON_HPP_

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace clook {

/// Monotonic timestamp or duration in milliseconds.
using Millis = std::int64_t;

inline constexpr Millis kSecondMs = 1'000;
inline constexpr Millis kMinuteMs = 60'000;
inline constexpr Millis kHourMs = 3'600'000;
/// One turn of a 12-hour analog dial.
inline constexpr Millis kDialMs = 12 * kHourMs;

/// Reduces a time-of-day (ms) onto the 12-hour dial, result in [0, kDialMs).
inline double wrap_dial(double tod_ms) {
  double r = std::fmod(tod_ms, static_cast<double>(kDialMs));
  if (r < 0) r += static_cast<double>(kDialMs);
  // fmod of a tiny negative value can round up to exactly kDialMs.
  if (r >= static_cast<double>(kDialMs)) r = 0.0;
  return r;
}

/// Shortest signed dial distance from `from` to `to`, in [-6 h, 6 h).
inline double dial_delta(double from_ms, double to_ms) {
  constexpr double half = static_cast<double>(kDialMs) / 2.0;
  return wrap_dial(to_ms - from_ms + half) - half;
}

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A query or mutation used a wall time earlier than the clock's anchor.
class MonotonicityError : public Error {
 public:
  using Error::Error;
};

/// An input stream was not strictly time-ordered.
class OrderingError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration, payload or message.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace clook

#endif  // CLOOK_COMMON_HPP_

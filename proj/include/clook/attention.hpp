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

#ifndef CLOOK_ATTENTION_HPP_
#define CLOOK_ATTENTION_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clook/common.hpp"

namespace clook {

enum class AttentionState : std::uint8_t { Away, Watching, Conversation };

std::string_view to_string(AttentionState state);
std::optional<AttentionState> parse_attention(std::string_view name);

/// Detector sanity cap on faces per frame.
inline constexpr int kMaxFaceCount = 64;
inline constexpr Millis kDefaultHoldMs = 500;

struct GazeObservation {
  Millis t = 0;
  int face_count = 0;
  std::string source_id;
};

/// 0 faces: nobody looking. 1: a single viewer. 2 or more: people talking.
constexpr AttentionState classify_frame(int face_count) noexcept {
  if (face_count <= 0) return AttentionState::Away;
  if (face_count == 1) return AttentionState::Watching;
  return AttentionState::Conversation;
}

struct AttentionTransition {
  Millis t = 0;
  AttentionState state = AttentionState::Away;

  friend bool operator==(const AttentionTransition&,
                         const AttentionTransition&) = default;
};

/// Streaming debouncer for one observation source.
///
/// The raw classification of an observation holds until the next
/// observation. A new raw state becomes the debounced state once it has been
/// held for `hold_ms`; the transition is stamped at run start + hold, not at
/// the observation that happens to confirm it. The first confirmed state is
/// always emitted; after that only changes are.
class Debouncer {
 public:
  explicit Debouncer(Millis hold_ms = kDefaultHoldMs);

  /// Feeds one observation. Throws OrderingError unless `t` is strictly
  /// after the previous observation, ValidationError on a bad face count.
  std::vector<AttentionTransition> observe(Millis t, int face_count);

  /// Lets time pass without a new observation, confirming a pending
  /// candidate whose hold has elapsed by `t`.
  std::vector<AttentionTransition> advance_to(Millis t);

  /// When the pending candidate will be confirmed if nothing contradicts it.
  std::optional<Millis> deadline() const;

  /// Debounced state; AWAY before anything has been confirmed.
  AttentionState state() const { return emitted_.value_or(AttentionState::Away); }
  bool has_emitted() const { return emitted_.has_value(); }
  Millis hold_ms() const { return hold_ms_; }

 private:
  Millis hold_ms_;
  std::optional<Millis> last_observation_;
  Millis now_ = 0;
  std::optional<AttentionState> candidate_;
  Millis candidate_since_ = 0;
  std::optional<AttentionState> emitted_;
};

/// Batch form over a single time-ordered stream. A candidate still pending
/// at the last observation is confirmed only if its hold ended by then.
std::vector<AttentionTransition> debounce(std::span<const GazeObservation> stream,
                                          Millis hold_ms);

}  // namespace clook

#endif  // CLOOK_ATTENTION_HPP_

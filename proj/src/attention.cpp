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

#include "clook/attention.hpp"

#include <string>

namespace clook {

std::string_view to_string(AttentionState state) {
  switch (state) {
    case AttentionState::Away:
      return "AWAY";
    case AttentionState::Watching:
      return "WATCHING";
    case AttentionState::Conversation:
      return "CONVERSATION";
  }
  return "AWAY";
}

std::optional<AttentionState> parse_attention(std::string_view name) {
  if (name == "AWAY") return AttentionState::Away;
  if (name == "WATCHING") return AttentionState::Watching;
  if (name == "CONVERSATION") return AttentionState::Conversation;
  return std::nullopt;
}

Debouncer::Debouncer(Millis hold_ms) : hold_ms_(hold_ms) {
  if (hold_ms < 0) throw ValidationError("hold_ms must be >= 0");
}

std::optional<Millis> Debouncer::deadline() const {
  if (!candidate_) return std::nullopt;
  if (emitted_ && *emitted_ == *candidate_) return std::nullopt;
  return candidate_since_ + hold_ms_;
}

std::vector<AttentionTransition> Debouncer::advance_to(Millis t) {
  if (t < now_) {
    throw OrderingError("debouncer time went backwards: " + std::to_string(t) +
                        " < " + std::to_string(now_));
  }
  now_ = t;
  std::vector<AttentionTransition> out;
  if (auto due = deadline(); due && *due <= t) {
    emitted_ = candidate_;
    out.push_back({*due, *candidate_});
  }
  return out;
}

std::vector<AttentionTransition> Debouncer::observe(Millis t, int face_count) {
  if (face_count < 0 || face_count > kMaxFaceCount) {
    throw ValidationError("face_count out of range [0, 64]: " +
                          std::to_string(face_count));
  }
  if (last_observation_ && t <= *last_observation_) {
    throw OrderingError("observation at " + std::to_string(t) +
                        " not after previous at " +
                        std::to_string(*last_observation_));
  }
  last_observation_ = t;

  // The previous candidate held over [since, t); settle it first.
  auto out = advance_to(t);
  const AttentionState raw = classify_frame(face_count);
  if (!candidate_ || *candidate_ != raw) {
    candidate_ = raw;
    candidate_since_ = t;
  }
  for (const auto& tr : advance_to(t)) out.push_back(tr);
  return out;
}

std::vector<AttentionTransition> debounce(std::span<const GazeObservation> stream,
                                          Millis hold_ms) {
  Debouncer d(hold_ms);
  std::vector<AttentionTransition> out;
  for (const auto& obs : stream) {
    for (const auto& tr : d.observe(obs.t, obs.face_count)) out.push_back(tr);
  }
  return out;
}

}  // namespace clook

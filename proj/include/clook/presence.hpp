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

#ifndef CLOOK_PRESENCE_HPP_
#define CLOOK_PRESENCE_HPP_

// Mutual-gaze handshake between two paired clocks.
//
// Each side heartbeats GAZE{seq, watching, since_ms}; since_ms is how long
// the sender has been in its current gaze state, so the receiver places the
// peer's watching start at (receipt - since_ms) on its own clock. That is
// never earlier than the true start, so overlap is only ever underestimated.
//
// Once a side sees both watching for >= W, the side with the smaller id
// opens a window:
//
//   proposer                          responder
//   PROPOSE{w}            ------>
//                         <------     CONFIRM{w, tod_r}   (MUTUAL_PENDING)
//   SHOWING, CONFIRM{w, tod_p} ---->
//                         <------     SHOW_ACK{w}         (SHOWING)
//
// PROPOSE, both CONFIRMs and the proposer's CONFIRM (until acked) are
// retransmitted every heartbeat. A proposer without SHOW_ACK after
// mutual_timeout aborts SHOWING and sends BYE; a responder without the
// proposer's CONFIRM aborts to LOCAL_WATCHING. Either side leaving WATCHING
// while pending sends BYE.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "clook/attention.hpp"
#include "clook/common.hpp"

namespace clook {

struct PeerConfig {
  std::string local_id;
  /// May be left empty in live mode; learned from the peer's HELLO.
  std::string peer_id;
  int tz_offset_minutes = 0;
  Millis heartbeat_ms = 500;
  Millis overlap_window_ms = 2'000;
  Millis show_duration_ms = 10'000;
  Millis mutual_timeout_ms = 3'000;
  Millis cooldown_ms = 5'000;
  /// Resend interval for unanswered PROPOSE/CONFIRM; at most heartbeat_ms.
  Millis handshake_retry_ms = 100;

  void validate() const;
};

namespace presence {

struct Hello {
  std::string id;
  int tz_offset = 0;
  friend bool operator==(const Hello&, const Hello&) = default;
};
struct Gaze {
  std::uint32_t seq = 0;
  bool watching = false;
  Millis since_ms = 0;
  friend bool operator==(const Gaze&, const Gaze&) = default;
};
struct Propose {
  std::uint32_t window_id = 0;
  friend bool operator==(const Propose&, const Propose&) = default;
};
struct Confirm {
  std::uint32_t window_id = 0;
  Millis local_tod_ms = 0;
  friend bool operator==(const Confirm&, const Confirm&) = default;
};
struct ShowAck {
  std::uint32_t window_id = 0;
  friend bool operator==(const ShowAck&, const ShowAck&) = default;
};
struct Bye {
  friend bool operator==(const Bye&, const Bye&) = default;
};

}  // namespace presence

using PresenceMessage = std::variant<presence::Hello, presence::Gaze, presence::Propose,
                                     presence::Confirm, presence::ShowAck, presence::Bye>;

std::string_view message_type(const PresenceMessage& msg);

/// One JSON object, no trailing newline, e.g.
/// {"v":1,"type":"GAZE","seq":12,"watching":true,"since_ms":123456}
std::string to_wire(const PresenceMessage& msg);
/// Throws ValidationError on anything that is not a valid v1 message.
PresenceMessage parse_wire(std::string_view line);
/// True when `type` names a presence message (uppercase wire type).
bool is_presence_type(std::string_view type);

enum class PresenceState : std::uint8_t { Idle, LocalWatching, MutualPending, Showing, Cooldown };

std::string_view to_string(PresenceState state);

/// Civil time-of-day on the 12 h dial for a UTC instant and zone offset.
Millis local_civil_tod(int tz_offset_minutes, Millis utc_now_ms);

struct OverrideGrant {
  std::uint32_t window_id = 0;
  /// Peer's civil time-of-day, advanced by the one-way delay estimate.
  double remote_tod_ms = 0.0;
  Millis duration_ms = 0;
};

/// What the caller must do after feeding the session an event.
struct PresenceEffects {
  std::vector<PresenceMessage> outbound;
  std::optional<OverrideGrant> grant;
  bool revoke = false;
  std::vector<PresenceState> transitions;
};

struct PresenceStats {
  std::uint64_t unknown_confirms = 0;
  std::uint64_t duplicate_gazes = 0;
  std::uint64_t ignored = 0;
  std::uint64_t windows_opened = 0;
  std::uint64_t aborts = 0;
};

/// Protocol state machine for one side. Single-threaded; the caller owns
/// time. `civil_tod_ms` arguments are this side's current civil
/// time-of-day, stamped into CONFIRM.
class PresenceSession {
 public:
  explicit PresenceSession(PeerConfig config);

  PresenceEffects start(Millis now);
  PresenceEffects on_local_attention(AttentionState state, Millis now, double civil_tod_ms);
  PresenceEffects on_message(const PresenceMessage& msg, Millis now, double civil_tod_ms);
  /// Fires everything due at or before `now`.
  PresenceEffects on_timer(Millis now, double civil_tod_ms);
  /// Earliest time on_timer has work to do.
  std::optional<Millis> next_deadline() const;

  PresenceState state() const { return state_; }
  bool is_proposer() const;
  bool peer_known() const { return peer_known_; }
  int peer_tz_offset() const { return peer_tz_; }
  const std::string& peer_id() const { return config_.peer_id; }
  const PeerConfig& config() const { return config_; }
  std::uint32_t window_id() const { return window_id_; }
  const PresenceStats& stats() const { return stats_; }

  /// Current overlap estimate, or a negative value when not both watching.
  Millis overlap(Millis now) const;

 private:
  enum class Role : std::uint8_t { None, Proposer, Responder };

  void set_state(PresenceState next, PresenceEffects& fx);
  void send(PresenceMessage msg, PresenceEffects& fx);
  void send_hello(Millis now, PresenceEffects& fx);
  void send_gaze(Millis now, PresenceEffects& fx);
  void send_confirm(Millis now, double civil_tod_ms, PresenceEffects& fx);
  void evaluate(Millis now, double civil_tod_ms, PresenceEffects& fx);
  void abort_pending(Millis now, bool notify, PresenceEffects& fx);
  void abort_showing(Millis now, PresenceEffects& fx);
  void enter_showing(Millis now, double remote_tod, PresenceEffects& fx);
  void settle_idle(PresenceEffects& fx);
  bool awaiting_reply() const;
  bool peer_fresh(Millis now) const;
  std::optional<Millis> overlap_deadline() const;

  PeerConfig config_;
  PresenceState state_ = PresenceState::Idle;
  Role role_ = Role::None;
  bool started_ = false;

  bool local_watching_ = false;
  Millis local_since_ = 0;

  bool peer_known_ = false;
  std::optional<Millis> last_hello_sent_;
  int peer_tz_ = 0;
  bool peer_watching_ = false;
  Millis peer_since_est_ = 0;
  Millis last_peer_gaze_ = 0;
  std::optional<std::uint32_t> last_peer_seq_;

  std::uint32_t gaze_seq_ = 0;
  Millis next_heartbeat_ = 0;

  std::uint32_t window_id_ = 0;
  std::uint32_t next_window_id_ = 1;
  Millis pending_since_ = 0;
  Millis last_handshake_send_ = 0;
  Millis next_retry_ = 0;
  Millis retry_after_ = 0;
  struct PendingProposal {
    std::uint32_t window_id;
    Millis received_at;
  };
  std::optional<PendingProposal> pending_proposal_;

  Millis showing_since_ = 0;
  Millis show_until_ = 0;
  bool show_acked_ = false;
  Millis cooldown_until_ = 0;

  PresenceStats stats_;
};

}  // namespace clook

#endif  // CLOOK_PRESENCE_HPP_

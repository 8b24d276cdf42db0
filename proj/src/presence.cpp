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

#include "clook/presence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"

namespace clook {

namespace {

using json = nlohmann::ordered_json;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr int kWireVersion = 1;

const json& require(const json& obj, const char* field) {
  auto it = obj.find(field);
  if (it == obj.end()) {
    throw ValidationError(std::string("presence message missing field '") + field + "'");
  }
  return *it;
}

std::uint32_t require_u32(const json& obj, const char* field) {
  const json& v = require(obj, field);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0 ||
      v.get<std::int64_t>() > std::numeric_limits<std::uint32_t>::max()) {
    throw ValidationError(std::string("field '") + field + "' must be a u32");
  }
  return v.get<std::uint32_t>();
}

Millis require_millis(const json& obj, const char* field, Millis lo, Millis hi) {
  const json& v = require(obj, field);
  if (!v.is_number_integer()) {
    throw ValidationError(std::string("field '") + field + "' must be an integer");
  }
  const auto x = v.get<std::int64_t>();
  if (x < lo || x > hi) {
    throw ValidationError(std::string("field '") + field + "' out of range");
  }
  return x;
}

}  // namespace

void PeerConfig::validate() const {
  if (local_id.empty()) throw ValidationError("peer config: local_id must be set");
  if (!peer_id.empty() && peer_id == local_id) {
    throw ValidationError("peer config: local_id and peer_id must differ");
  }
  if (tz_offset_minutes < -720 || tz_offset_minutes > 840) {
    throw ValidationError("tz_offset_minutes must be in [-720, 840]");
  }
  if (heartbeat_ms <= 0) throw ValidationError("heartbeat_ms must be > 0");
  if (overlap_window_ms < heartbeat_ms) {
    throw ValidationError("overlap_window_ms must be >= heartbeat_ms");
  }
  if (show_duration_ms <= 0) throw ValidationError("show_duration_ms must be > 0");
  if (mutual_timeout_ms <= 0) throw ValidationError("mutual_timeout_ms must be > 0");
  if (cooldown_ms < 0) throw ValidationError("cooldown_ms must be >= 0");
  if (handshake_retry_ms <= 0 || handshake_retry_ms > heartbeat_ms) {
    throw ValidationError("handshake_retry_ms must be in (0, heartbeat_ms]");
  }
}

std::string_view message_type(const PresenceMessage& msg) {
  return std::visit(Overloaded{
                        [](const presence::Hello&) { return std::string_view("HELLO"); },
                        [](const presence::Gaze&) { return std::string_view("GAZE"); },
                        [](const presence::Propose&) { return std::string_view("PROPOSE"); },
                        [](const presence::Confirm&) { return std::string_view("CONFIRM"); },
                        [](const presence::ShowAck&) { return std::string_view("SHOW_ACK"); },
                        [](const presence::Bye&) { return std::string_view("BYE"); },
                    },
                    msg);
}

bool is_presence_type(std::string_view type) {
  return type == "HELLO" || type == "GAZE" || type == "PROPOSE" || type == "CONFIRM" ||
         type == "SHOW_ACK" || type == "BYE";
}

std::string to_wire(const PresenceMessage& msg) {
  json j;
  j["v"] = kWireVersion;
  j["type"] = message_type(msg);
  std::visit(Overloaded{
                 [&](const presence::Hello& m) {
                   j["id"] = m.id;
                   j["tz_offset"] = m.tz_offset;
                 },
                 [&](const presence::Gaze& m) {
                   j["seq"] = m.seq;
                   j["watching"] = m.watching;
                   j["since_ms"] = m.since_ms;
                 },
                 [&](const presence::Propose& m) { j["window_id"] = m.window_id; },
                 [&](const presence::Confirm& m) {
                   j["window_id"] = m.window_id;
                   j["local_tod_ms"] = m.local_tod_ms;
                 },
                 [&](const presence::ShowAck& m) { j["window_id"] = m.window_id; },
                 [&](const presence::Bye&) {},
             },
             msg);
  return j.dump();
}

PresenceMessage parse_wire(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("presence message is not JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("presence message must be a JSON object");
  const json& v = require(j, "v");
  if (!v.is_number_integer() || v.get<int>() != kWireVersion) {
    throw ValidationError("unsupported presence wire version");
  }
  const json& type = require(j, "type");
  if (!type.is_string()) throw ValidationError("field 'type' must be a string");
  const auto t = type.get<std::string>();

  if (t == "HELLO") {
    const json& id = require(j, "id");
    if (!id.is_string() || id.get<std::string>().empty()) {
      throw ValidationError("field 'id' must be a non-empty string");
    }
    return presence::Hello{id.get<std::string>(),
                           static_cast<int>(require_millis(j, "tz_offset", -720, 840))};
  }
  if (t == "GAZE") {
    const json& watching = require(j, "watching");
    if (!watching.is_boolean()) throw ValidationError("field 'watching' must be a boolean");
    return presence::Gaze{require_u32(j, "seq"), watching.get<bool>(),
                          require_millis(j, "since_ms", 0, std::numeric_limits<Millis>::max())};
  }
  if (t == "PROPOSE") return presence::Propose{require_u32(j, "window_id")};
  if (t == "CONFIRM") {
    return presence::Confirm{require_u32(j, "window_id"),
                             require_millis(j, "local_tod_ms", 0, kDialMs - 1)};
  }
  if (t == "SHOW_ACK") return presence::ShowAck{require_u32(j, "window_id")};
  if (t == "BYE") return presence::Bye{};
  throw ValidationError("unknown presence message type '" + t + "'");
}

std::string_view to_string(PresenceState state) {
  switch (state) {
    case PresenceState::Idle:
      return "IDLE";
    case PresenceState::LocalWatching:
      return "LOCAL_WATCHING";
    case PresenceState::MutualPending:
      return "MUTUAL_PENDING";
    case PresenceState::Showing:
      return "SHOWING";
    case PresenceState::Cooldown:
      return "COOLDOWN";
  }
  return "IDLE";
}

Millis local_civil_tod(int tz_offset_minutes, Millis utc_now_ms) {
  const Millis local = utc_now_ms + static_cast<Millis>(tz_offset_minutes) * kMinuteMs;
  return ((local % kDialMs) + kDialMs) % kDialMs;
}

PresenceSession::PresenceSession(PeerConfig config) : config_(std::move(config)) {
  config_.validate();
}

bool PresenceSession::is_proposer() const {
  return !config_.peer_id.empty() && config_.local_id < config_.peer_id;
}

void PresenceSession::set_state(PresenceState next, PresenceEffects& fx) {
  if (next == state_) return;
  state_ = next;
  fx.transitions.push_back(next);
}

void PresenceSession::send(PresenceMessage msg, PresenceEffects& fx) {
  fx.outbound.push_back(std::move(msg));
}

void PresenceSession::send_hello(Millis now, PresenceEffects& fx) {
  send(presence::Hello{config_.local_id, config_.tz_offset_minutes}, fx);
  last_hello_sent_ = now;
}

void PresenceSession::send_gaze(Millis now, PresenceEffects& fx) {
  send(presence::Gaze{++gaze_seq_, local_watching_, now - local_since_}, fx);
}

void PresenceSession::send_confirm(Millis now, double civil_tod_ms, PresenceEffects& fx) {
  const auto tod = static_cast<Millis>(std::llround(wrap_dial(civil_tod_ms))) % kDialMs;
  send(presence::Confirm{window_id_, tod}, fx);
  last_handshake_send_ = now;
  next_retry_ = now + config_.handshake_retry_ms;
}

bool PresenceSession::awaiting_reply() const {
  return state_ == PresenceState::MutualPending ||
         (state_ == PresenceState::Showing && role_ == Role::Proposer && !show_acked_);
}

bool PresenceSession::peer_fresh(Millis now) const {
  return peer_watching_ && now - last_peer_gaze_ <= 3 * config_.heartbeat_ms;
}

Millis PresenceSession::overlap(Millis now) const {
  if (!local_watching_ || !peer_fresh(now)) return -1;
  return now - std::max(local_since_, peer_since_est_);
}

std::optional<Millis> PresenceSession::overlap_deadline() const {
  if (state_ != PresenceState::LocalWatching || !peer_known_ || !local_watching_ ||
      !peer_watching_) {
    return std::nullopt;
  }
  if (!is_proposer() && !pending_proposal_) return std::nullopt;
  Millis at = std::max(local_since_, peer_since_est_) + config_.overlap_window_ms;
  if (is_proposer()) at = std::max(at, retry_after_);
  return at;
}

void PresenceSession::settle_idle(PresenceEffects& fx) {
  role_ = Role::None;
  set_state(local_watching_ ? PresenceState::LocalWatching : PresenceState::Idle, fx);
}

void PresenceSession::abort_pending(Millis now, bool notify, PresenceEffects& fx) {
  if (notify) send(presence::Bye{}, fx);
  ++stats_.aborts;
  pending_proposal_.reset();
  retry_after_ = now + config_.heartbeat_ms;
  settle_idle(fx);
}

void PresenceSession::abort_showing(Millis now, PresenceEffects& fx) {
  fx.revoke = true;
  ++stats_.aborts;
  cooldown_until_ = now + config_.cooldown_ms;
  set_state(PresenceState::Cooldown, fx);
}

void PresenceSession::enter_showing(Millis now, double remote_tod, PresenceEffects& fx) {
  showing_since_ = now;
  show_until_ = now + config_.show_duration_ms;
  set_state(PresenceState::Showing, fx);
  fx.grant = OverrideGrant{window_id_, wrap_dial(remote_tod), config_.show_duration_ms};
}

void PresenceSession::evaluate(Millis now, double civil_tod_ms, PresenceEffects& fx) {
  if (state_ != PresenceState::LocalWatching || !peer_known_) return;
  if (overlap(now) < config_.overlap_window_ms) return;
  if (is_proposer()) {
    if (now < retry_after_) return;
    window_id_ = next_window_id_++;
    role_ = Role::Proposer;
    pending_since_ = now;
    ++stats_.windows_opened;
    set_state(PresenceState::MutualPending, fx);
    send(presence::Propose{window_id_}, fx);
    last_handshake_send_ = now;
    next_retry_ = now + config_.handshake_retry_ms;
  } else if (pending_proposal_) {
    window_id_ = pending_proposal_->window_id;
    pending_proposal_.reset();
    role_ = Role::Responder;
    pending_since_ = now;
    ++stats_.windows_opened;
    set_state(PresenceState::MutualPending, fx);
    send_confirm(now, civil_tod_ms, fx);
  }
}

PresenceEffects PresenceSession::start(Millis now) {
  PresenceEffects fx;
  started_ = true;
  local_since_ = now;
  next_heartbeat_ = now + config_.heartbeat_ms;
  send_hello(now, fx);
  return fx;
}

PresenceEffects PresenceSession::on_local_attention(AttentionState state, Millis now,
                                                    double civil_tod_ms) {
  PresenceEffects fx;
  const bool watching = state == AttentionState::Watching;
  if (watching != local_watching_) {
    local_watching_ = watching;
    local_since_ = now;
    send_gaze(now, fx);
    next_heartbeat_ = now + config_.heartbeat_ms;
    if (watching) {
      if (state_ == PresenceState::Idle) set_state(PresenceState::LocalWatching, fx);
    } else if (state_ == PresenceState::MutualPending) {
      abort_pending(now, true, fx);
    } else if (state_ == PresenceState::LocalWatching) {
      set_state(PresenceState::Idle, fx);
    }
    // SHOWING and COOLDOWN run to completion.
  }
  evaluate(now, civil_tod_ms, fx);
  return fx;
}

PresenceEffects PresenceSession::on_message(const PresenceMessage& msg, Millis now,
                                            double civil_tod_ms) {
  PresenceEffects fx;
  const bool proposer = role_ == Role::Proposer;
  const bool responder = role_ == Role::Responder;

  std::visit(
      Overloaded{
          [&](const presence::Hello& m) {
            if (m.id == config_.local_id) {
              ++stats_.ignored;
              return;
            }
            if (config_.peer_id.empty()) config_.peer_id = m.id;
            if (m.id != config_.peer_id) {
              ++stats_.ignored;
              return;
            }
            const bool first = !peer_known_;
            peer_known_ = true;
            peer_tz_ = m.tz_offset;
            // A peer still saying HELLO has not heard ours; answer at most once per heartbeat.
            if (first || !last_hello_sent_ || now - *last_hello_sent_ >= config_.heartbeat_ms) {
              send_hello(now, fx);
            }
          },
          [&](const presence::Gaze& m) {
            if (!peer_known_) {
              ++stats_.ignored;
              return;
            }
            if (last_peer_seq_ && m.seq <= *last_peer_seq_) {
              ++stats_.duplicate_gazes;
              return;
            }
            last_peer_seq_ = m.seq;
            last_peer_gaze_ = now;
            if (m.watching) {
              peer_since_est_ = now - m.since_ms;
              peer_watching_ = true;
            } else {
              peer_watching_ = false;
              pending_proposal_.reset();
              // A responder has confirmed and the proposer may already be showing; a
              // proposer that backs out sends BYE, and the timeout covers a lost one.
              if (state_ == PresenceState::MutualPending && role_ == Role::Proposer) {
                abort_pending(now, false, fx);
              }
            }
          },
          [&](const presence::Propose& m) {
            if (!peer_known_ || is_proposer()) {
              ++stats_.ignored;
              return;
            }
            if (state_ == PresenceState::MutualPending && responder) {
              if (m.window_id == window_id_) {
                send_confirm(now, civil_tod_ms, fx);
                return;
              }
              if (m.window_id > window_id_) {
                abort_pending(now, false, fx);
              } else {
                ++stats_.ignored;
                return;
              }
            }
            if (state_ == PresenceState::LocalWatching) {
              pending_proposal_ = PendingProposal{m.window_id, now};
            } else {
              ++stats_.ignored;
            }
          },
          [&](const presence::Confirm& m) {
            const bool same = m.window_id == window_id_ && role_ != Role::None;
            const double delay =
                std::clamp(static_cast<double>(now - last_handshake_send_) / 2.0, 0.0,
                           static_cast<double>(config_.heartbeat_ms));
            if (same && proposer && state_ == PresenceState::MutualPending) {
              const double remote = static_cast<double>(m.local_tod_ms) + delay;
              send_confirm(now, civil_tod_ms, fx);
              show_acked_ = false;
              enter_showing(now, remote, fx);
            } else if (same && proposer && state_ == PresenceState::Showing) {
              if (!show_acked_) send_confirm(now, civil_tod_ms, fx);
            } else if (same && responder && state_ == PresenceState::MutualPending) {
              enter_showing(now, static_cast<double>(m.local_tod_ms) + delay, fx);
              send(presence::ShowAck{window_id_}, fx);
            } else if (same && responder && state_ == PresenceState::Showing) {
              send(presence::ShowAck{window_id_}, fx);
            } else {
              ++stats_.unknown_confirms;
            }
          },
          [&](const presence::ShowAck& m) {
            if (proposer && state_ == PresenceState::Showing && m.window_id == window_id_) {
              show_acked_ = true;
            } else {
              ++stats_.ignored;
            }
          },
          [&](const presence::Bye&) {
            pending_proposal_.reset();
            if (state_ == PresenceState::MutualPending) {
              abort_pending(now, false, fx);
            } else if (state_ == PresenceState::Showing) {
              abort_showing(now, fx);
            }
          },
      },
      msg);

  evaluate(now, civil_tod_ms, fx);
  return fx;
}

PresenceEffects PresenceSession::on_timer(Millis now, double civil_tod_ms) {
  PresenceEffects fx;
  if (!started_) return fx;

  if (state_ == PresenceState::MutualPending &&
      now >= pending_since_ + config_.mutual_timeout_ms) {
    abort_pending(now, true, fx);
  }
  if (state_ == PresenceState::Showing && role_ == Role::Proposer && !show_acked_ &&
      now >= showing_since_ + config_.mutual_timeout_ms) {
    send(presence::Bye{}, fx);
    abort_showing(now, fx);
  }
  if (state_ == PresenceState::Showing && now >= show_until_) {
    cooldown_until_ = now + config_.cooldown_ms;
    set_state(PresenceState::Cooldown, fx);
  }
  if (state_ == PresenceState::Cooldown && now >= cooldown_until_) {
    pending_proposal_.reset();
    settle_idle(fx);
  }
  if (pending_proposal_ && now >= pending_proposal_->received_at + config_.mutual_timeout_ms) {
    pending_proposal_.reset();
  }

  if (awaiting_reply() && now >= next_retry_) {
    if (state_ == PresenceState::MutualPending && role_ == Role::Proposer) {
      send(presence::Propose{window_id_}, fx);
      last_handshake_send_ = now;
      next_retry_ = now + config_.handshake_retry_ms;
    } else {
      send_confirm(now, civil_tod_ms, fx);
    }
  }
  if (now >= next_heartbeat_) {
    send_gaze(now, fx);
    if (!peer_known_) send_hello(now, fx);
    next_heartbeat_ += config_.heartbeat_ms;
    if (next_heartbeat_ <= now) next_heartbeat_ = now + config_.heartbeat_ms;
  }

  evaluate(now, civil_tod_ms, fx);
  return fx;
}

std::optional<Millis> PresenceSession::next_deadline() const {
  if (!started_) return std::nullopt;
  Millis at = next_heartbeat_;
  auto consider = [&](Millis t) { at = std::min(at, t); };
  if (state_ == PresenceState::MutualPending) consider(pending_since_ + config_.mutual_timeout_ms);
  if (awaiting_reply()) consider(next_retry_);
  if (state_ == PresenceState::Showing) {
    consider(show_until_);
    if (role_ == Role::Proposer && !show_acked_) {
      consider(showing_since_ + config_.mutual_timeout_ms);
    }
  }
  if (state_ == PresenceState::Cooldown) consider(cooldown_until_);
  if (pending_proposal_) consider(pending_proposal_->received_at + config_.mutual_timeout_ms);
  if (auto o = overlap_deadline()) consider(*o);
  return at;
}

}  // namespace clook

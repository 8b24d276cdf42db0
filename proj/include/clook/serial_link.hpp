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

#ifndef CLOOK_SERIAL_LINK_HPP_
#define CLOOK_SERIAL_LINK_HPP_

// Wire format (bit-exact):
//
//   +------+------+--------+-----------------+-------+
//   | 0xA5 | type | length | payload[length] | crc8  |
//   +------+------+--------+-----------------+-------+
//
// type: 0x01 STEP_BATCH, 0x02 PING, 0x03 ACK. length <= 32.
// crc8: polynomial 0x07, init 0x00, no reflection, no final xor, computed
// over type, length and payload. Multi-byte integers are little-endian.
// STEP_BATCH payload: direction (0x01 CW, 0x02 CCW), step count u16.

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clook/common.hpp"
#include "clook/motor.hpp"

namespace clook {

inline constexpr std::uint8_t kFrameSync = 0xA5;
inline constexpr std::size_t kMaxFramePayload = 32;
/// sync + type + length + crc
inline constexpr std::size_t kFrameOverhead = 4;

enum class MsgType : std::uint8_t { StepBatch = 0x01, Ping = 0x02, Ack = 0x03 };

std::string_view to_string(MsgType type);
bool is_known_msg_type(std::uint8_t byte);

struct SerialMessage {
  MsgType type = MsgType::Ping;
  std::vector<std::uint8_t> payload;

  friend bool operator==(const SerialMessage&, const SerialMessage&) = default;
};

std::uint8_t crc8(std::span<const std::uint8_t> data);

/// Throws ValidationError when the payload exceeds 32 bytes.
std::vector<std::uint8_t> encode(const SerialMessage& msg);

struct StepBatch {
  Direction direction = Direction::Cw;
  std::uint16_t count = 0;

  friend bool operator==(const StepBatch&, const StepBatch&) = default;
};

SerialMessage make_step_batch(const StepBatch& batch);
/// nullopt unless `msg` is a well-formed STEP_BATCH.
std::optional<StepBatch> parse_step_batch(const SerialMessage& msg);

enum class DecodeError : std::uint8_t { CrcMismatch, Truncated, UnknownType, BadLength };

std::string_view to_string(DecodeError err);

struct LinkStats {
  std::uint64_t frames_ok = 0;
  std::uint64_t crc_mismatch = 0;
  std::uint64_t truncated = 0;
  std::uint64_t unknown_type = 0;
  std::uint64_t bad_length = 0;
  /// Bytes skipped while hunting for a sync byte or after a rejection.
  std::uint64_t bytes_discarded = 0;

  std::uint64_t rejected() const { return crc_mismatch + truncated + unknown_type + bad_length; }
  void count(DecodeError err);
};

/// Incremental decoder. Scans for 0xA5, validates, and on any rejection
/// drops just that sync byte and rescans, so a valid frame hidden behind a
/// false sync is still found.
class FrameDecoder {
 public:
  std::vector<SerialMessage> feed(std::span<const std::uint8_t> bytes);
  /// End of input: an incomplete frame left in the buffer counts as
  /// TRUNCATED once, and the tail is rescanned for complete frames.
  std::vector<SerialMessage> finish();

  const LinkStats& stats() const { return stats_; }
  std::size_t buffered() const { return buf_.size() - head_; }

 private:
  enum class Step { NeedMore, Consumed };
  Step try_frame(std::vector<SerialMessage>& out);
  void drop(std::size_t n);

  std::vector<std::uint8_t> buf_;
  std::size_t head_ = 0;
  LinkStats stats_;
};

struct DecodeResult {
  std::vector<SerialMessage> messages;
  LinkStats stats;
};

/// One-shot decode of a complete byte buffer.
DecodeResult decode(std::span<const std::uint8_t> bytes);

struct LinkModel {
  Millis latency_ms = 0;
  Millis jitter_ms = 0;
  double drop_probability = 0.0;
  std::uint64_t seed = 0;
  /// With jitter, let later frames overtake earlier ones. Off = UART order.
  bool allow_reorder = false;

  void validate() const;

  friend bool operator==(const LinkModel&, const LinkModel&) = default;
};

struct Delivery {
  std::vector<std::uint8_t> frame;
  /// nullopt when dropped.
  std::optional<Millis> deliver_at;
};

/// Seeded lossy, laggy channel. Each transmit draws exactly two numbers
/// from a 64-bit Mersenne Twister (drop, then jitter), so a fixed seed fixes
/// the schedule regardless of frame contents.
class Channel {
 public:
  explicit Channel(LinkModel model);

  Delivery transmit(std::vector<std::uint8_t> frame, Millis t);
  /// Decides delivery only, for callers that carry their own payload.
  std::optional<Millis> transmit(Millis t);

  const LinkModel& model() const { return model_; }
  std::uint64_t sent() const { return sent_; }
  std::uint64_t dropped() const { return dropped_; }

 private:
  double next_unit();

  LinkModel model_;
  std::mt19937_64 rng_;
  Millis last_delivery_ = 0;
  std::uint64_t sent_ = 0;
  std::uint64_t dropped_ = 0;
};

std::string to_hex(std::span<const std::uint8_t> bytes);
/// Throws ValidationError on odd length or non-hex digits.
std::vector<std::uint8_t> from_hex(std::string_view hex);

}  // namespace clook

#endif  // CLOOK_SERIAL_LINK_HPP_

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

#include "clook/serial_link.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace clook {

namespace {

constexpr std::array<std::uint8_t, 256> make_crc_table() {
  std::array<std::uint8_t, 256> table{};
  for (int i = 0; i < 256; ++i) {
    auto crc = static_cast<std::uint8_t>(i);
    for (int bit = 0; bit < 8; ++bit) {
      crc = (crc & 0x80) ? static_cast<std::uint8_t>((crc << 1) ^ 0x07)
                         : static_cast<std::uint8_t>(crc << 1);
    }
    table[static_cast<std::size_t>(i)] = crc;
  }
  return table;
}

constexpr auto kCrcTable = make_crc_table();

constexpr std::uint8_t kDirCw = 0x01;
constexpr std::uint8_t kDirCcw = 0x02;

}  // namespace

std::string_view to_string(MsgType type) {
  switch (type) {
    case MsgType::StepBatch:
      return "STEP_BATCH";
    case MsgType::Ping:
      return "PING";
    case MsgType::Ack:
      return "ACK";
  }
  return "?";
}

bool is_known_msg_type(std::uint8_t byte) { return byte >= 0x01 && byte <= 0x03; }

std::uint8_t crc8(std::span<const std::uint8_t> data) {
  std::uint8_t crc = 0x00;
  for (std::uint8_t b : data) crc = kCrcTable[crc ^ b];
  return crc;
}

std::vector<std::uint8_t> encode(const SerialMessage& msg) {
  if (msg.payload.size() > kMaxFramePayload) {
    throw ValidationError("serial payload of " + std::to_string(msg.payload.size()) +
                          " bytes exceeds 32");
  }
  std::vector<std::uint8_t> out;
  out.reserve(msg.payload.size() + kFrameOverhead);
  out.push_back(kFrameSync);
  out.push_back(static_cast<std::uint8_t>(msg.type));
  out.push_back(static_cast<std::uint8_t>(msg.payload.size()));
  out.insert(out.end(), msg.payload.begin(), msg.payload.end());
  out.push_back(crc8(std::span(out).subspan(1)));
  return out;
}

SerialMessage make_step_batch(const StepBatch& batch) {
  return {MsgType::StepBatch,
          {batch.direction == Direction::Cw ? kDirCw : kDirCcw,
           static_cast<std::uint8_t>(batch.count & 0xFF),
           static_cast<std::uint8_t>(batch.count >> 8)}};
}

std::optional<StepBatch> parse_step_batch(const SerialMessage& msg) {
  if (msg.type != MsgType::StepBatch || msg.payload.size() != 3) return std::nullopt;
  const std::uint8_t dir = msg.payload[0];
  if (dir != kDirCw && dir != kDirCcw) return std::nullopt;
  return StepBatch{dir == kDirCw ? Direction::Cw : Direction::Ccw,
                   static_cast<std::uint16_t>(msg.payload[1] | (msg.payload[2] << 8))};
}

std::string_view to_string(DecodeError err) {
  switch (err) {
    case DecodeError::CrcMismatch:
      return "CRC_MISMATCH";
    case DecodeError::Truncated:
      return "TRUNCATED";
    case DecodeError::UnknownType:
      return "UNKNOWN_TYPE";
    case DecodeError::BadLength:
      return "BAD_LENGTH";
  }
  return "?";
}

void LinkStats::count(DecodeError err) {
  switch (err) {
    case DecodeError::CrcMismatch:
      ++crc_mismatch;
      break;
    case DecodeError::Truncated:
      ++truncated;
      break;
    case DecodeError::UnknownType:
      ++unknown_type;
      break;
    case DecodeError::BadLength:
      ++bad_length;
      break;
  }
}

void FrameDecoder::drop(std::size_t n) {
  head_ += n;
  // Compact once the consumed prefix dominates.
  if (head_ > 4096 && head_ * 2 > buf_.size()) {
    buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(head_));
    head_ = 0;
  }
}

FrameDecoder::Step FrameDecoder::try_frame(std::vector<SerialMessage>& out) {
  const std::span<const std::uint8_t> avail(buf_.data() + head_, buf_.size() - head_);
  if (avail.size() < 3) return Step::NeedMore;
  const std::uint8_t len = avail[2];
  if (len > kMaxFramePayload) {
    stats_.count(DecodeError::BadLength);
    ++stats_.bytes_discarded;
    drop(1);
    return Step::Consumed;
  }
  const std::size_t total = len + kFrameOverhead;
  if (avail.size() < total) return Step::NeedMore;

  const std::uint8_t expected = crc8(avail.subspan(1, 2 + len));
  if (expected != avail[total - 1]) {
    stats_.count(DecodeError::CrcMismatch);
    ++stats_.bytes_discarded;
    drop(1);
    return Step::Consumed;
  }
  if (!is_known_msg_type(avail[1])) {
    stats_.count(DecodeError::UnknownType);
    ++stats_.bytes_discarded;
    drop(1);
    return Step::Consumed;
  }
  SerialMessage msg{static_cast<MsgType>(avail[1]),
                    std::vector<std::uint8_t>(avail.begin() + 3, avail.begin() + 3 + len)};
  out.push_back(std::move(msg));
  ++stats_.frames_ok;
  drop(total);
  return Step::Consumed;
}

std::vector<SerialMessage> FrameDecoder::feed(std::span<const std::uint8_t> bytes) {
  buf_.insert(buf_.end(), bytes.begin(), bytes.end());
  std::vector<SerialMessage> out;
  while (head_ < buf_.size()) {
    if (buf_[head_] != kFrameSync) {
      ++stats_.bytes_discarded;
      drop(1);
      continue;
    }
    if (try_frame(out) == Step::NeedMore) break;
  }
  return out;
}

std::vector<SerialMessage> FrameDecoder::finish() {
  std::vector<SerialMessage> out;
  bool counted = false;
  while (head_ < buf_.size()) {
    if (buf_[head_] != kFrameSync) {
      ++stats_.bytes_discarded;
      drop(1);
      continue;
    }
    if (try_frame(out) == Step::NeedMore) {
      if (!counted) {
        stats_.count(DecodeError::Truncated);
        counted = true;
      }
      ++stats_.bytes_discarded;
      drop(1);
    }
  }
  buf_.clear();
  head_ = 0;
  return out;
}

DecodeResult decode(std::span<const std::uint8_t> bytes) {
  FrameDecoder dec;
  DecodeResult result;
  result.messages = dec.feed(bytes);
  for (auto& m : dec.finish()) result.messages.push_back(std::move(m));
  result.stats = dec.stats();
  return result;
}

void LinkModel::validate() const {
  if (latency_ms < 0) throw ValidationError("latency_ms must be >= 0");
  if (jitter_ms < 0) throw ValidationError("jitter_ms must be >= 0");
  if (!(drop_probability >= 0.0 && drop_probability <= 1.0)) {
    throw ValidationError("drop_probability must be in [0, 1]");
  }
}

Channel::Channel(LinkModel model) : model_(model), rng_(model.seed) { model_.validate(); }

double Channel::next_unit() {
  // 53 high bits -> [0, 1); std::uniform_real_distribution is not portable.
  return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

std::optional<Millis> Channel::transmit(Millis t) {
  ++sent_;
  const double drop_draw = next_unit();
  const double jitter_draw = next_unit();
  if (drop_draw < model_.drop_probability) {
    ++dropped_;
    return std::nullopt;
  }
  const auto jitter = static_cast<Millis>(
      std::floor(jitter_draw * static_cast<double>(model_.jitter_ms + 1)));
  Millis at = t + model_.latency_ms + std::min(jitter, model_.jitter_ms);
  if (!model_.allow_reorder) at = std::max(at, last_delivery_);
  last_delivery_ = std::max(last_delivery_, at);
  return at;
}

Delivery Channel::transmit(std::vector<std::uint8_t> frame, Millis t) {
  auto at = transmit(t);
  return {std::move(frame), at};
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0F]);
  }
  return out;
}

std::vector<std::uint8_t> from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw ValidationError("odd-length hex string");
  auto nibble = [&](char c) -> std::uint8_t {
    if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
    if (c >= 'A' && c <= 'F') return static_cast<std::uint8_t>(c - 'A' + 10);
    throw ValidationError("bad hex digit in '" + std::string(hex) + "'");
  };
  std::vector<std::uint8_t> out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    out.push_back(static_cast<std::uint8_t>((nibble(hex[i]) << 4) | nibble(hex[i + 1])));
  }
  return out;
}

}  // namespace clook

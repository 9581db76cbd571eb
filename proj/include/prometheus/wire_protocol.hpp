// Copyright 2026 The Prometheus Teleoperation Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace prometheus::wire {

// Frame: 0xAA | type | len | payload[len] | crc16 (big-endian, over type|len|payload).
// Multi-byte payload integers are little-endian.
inline constexpr std::uint8_t kSync = 0xAA;
inline constexpr std::size_t kMaxPayload = 64;
inline constexpr std::size_t kHeaderSize = 3;
inline constexpr std::size_t kCrcSize = 2;
inline constexpr std::size_t kMaxFrameSize = kHeaderSize + kMaxPayload + kCrcSize;

enum class MsgType : std::uint8_t {
  ForceReport = 0x01,
  TorqueCommand = 0x02,
  EncoderReport = 0x03,
  HostTelemetry = 0x04,
};

struct ForceReport {
  std::int32_t raw_mV = 0;
  std::uint16_t seq = 0;
  bool operator==(const ForceReport&) const = default;
};

struct TorqueCommand {
  std::int32_t torque_mNm = 0;
  bool operator==(const TorqueCommand&) const = default;
};

struct EncoderReport {
  std::int32_t pos_ticks = 0;
  std::uint16_t seq = 0;
  bool operator==(const EncoderReport&) const = default;
};

struct HostTelemetry {
  std::uint16_t force_norm_milli = 0;  // 0..1000
  std::int32_t encoder_ticks = 0;
  std::uint16_t seq = 0;
  bool operator==(const HostTelemetry&) const = default;
};

using MessageBody = std::variant<ForceReport, TorqueCommand, EncoderReport, HostTelemetry>;

MsgType type_of(const MessageBody& body);

/// CRC-16/CCITT-FALSE.
std::uint16_t crc16(std::span<const std::uint8_t> data);

/// Frames an arbitrary payload. Throws PayloadTooLarge past 64 bytes.
std::vector<std::uint8_t> encode_frame(std::uint8_t type, std::span<const std::uint8_t> payload);

/// Throws OutOfRange for a telemetry force above 1000.
std::vector<std::uint8_t> encode(const MessageBody& body);

enum class ParseErrc { BadCrc, BadLength, UnknownType, BadPayload };

std::string_view to_string(ParseErrc e);

struct ParseError {
  ParseErrc kind;
  std::uint64_t offset;  // stream offset of the offending sync byte
  bool operator==(const ParseError&) const = default;
};

struct FeedResult {
  std::vector<MessageBody> bodies;
  std::vector<ParseError> errors;
};

/// Incremental resynchronizing parser for one byte stream. Output does not depend
/// on how the stream is chunked; buffered state never exceeds one maximal frame.
class FrameParser {
 public:
  FeedResult feed(std::span<const std::uint8_t> chunk);
  void feed(std::span<const std::uint8_t> chunk, FeedResult& out);

  std::size_t buffered() const { return buffer_.size(); }

 private:
  std::vector<std::uint8_t> buffer_;
  std::uint64_t base_offset_ = 0;  // stream offset of buffer_[0]
};

}  // namespace prometheus::wire

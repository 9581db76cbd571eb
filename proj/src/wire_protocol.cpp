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

#include "prometheus/wire_protocol.hpp"

#include <algorithm>
#include <array>
#include <string>

#include "prometheus/error.hpp"

namespace prometheus::wire {

namespace {

constexpr std::array<std::uint16_t, 256> make_crc_table() {
  std::array<std::uint16_t, 256> table{};
  for (unsigned i = 0; i < 256; ++i) {
    std::uint16_t crc = static_cast<std::uint16_t>(i << 8);
    for (int b = 0; b < 8; ++b) {
      crc = static_cast<std::uint16_t>((crc & 0x8000) ? (crc << 1) ^ 0x1021 : crc << 1);
    }
    table[i] = crc;
  }
  return table;
}

constexpr auto kCrcTable = make_crc_table();

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_i32(std::vector<std::uint8_t>& out, std::int32_t v) {
  const auto u = static_cast<std::uint32_t>(v);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
}

std::uint16_t get_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::int32_t get_i32(const std::uint8_t* p) {
  const std::uint32_t u = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                          (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
  return static_cast<std::int32_t>(u);
}

std::size_t expected_payload(std::uint8_t type) {
  switch (static_cast<MsgType>(type)) {
    case MsgType::ForceReport: return 6;
    case MsgType::TorqueCommand: return 4;
    case MsgType::EncoderReport: return 6;
    case MsgType::HostTelemetry: return 8;
  }
  return 0;
}

}  // namespace

MsgType type_of(const MessageBody& body) {
  struct {
    MsgType operator()(const ForceReport&) const { return MsgType::ForceReport; }
    MsgType operator()(const TorqueCommand&) const { return MsgType::TorqueCommand; }
    MsgType operator()(const EncoderReport&) const { return MsgType::EncoderReport; }
    MsgType operator()(const HostTelemetry&) const { return MsgType::HostTelemetry; }
  } visitor;
  return std::visit(visitor, body);
}

std::uint16_t crc16(std::span<const std::uint8_t> data) {
  std::uint16_t crc = 0xFFFF;
  for (std::uint8_t b : data) {
    crc = static_cast<std::uint16_t>((crc << 8) ^ kCrcTable[((crc >> 8) ^ b) & 0xFF]);
  }
  return crc;
}

std::vector<std::uint8_t> encode_frame(std::uint8_t type, std::span<const std::uint8_t> payload) {
  if (payload.size() > kMaxPayload) {
    throw Error(Errc::PayloadTooLarge, std::to_string(payload.size()) + " bytes exceeds 64");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + payload.size() + kCrcSize);
  out.push_back(kSync);
  out.push_back(type);
  out.push_back(static_cast<std::uint8_t>(payload.size()));
  out.insert(out.end(), payload.begin(), payload.end());
  const std::uint16_t crc = crc16(std::span(out).subspan(1));
  out.push_back(static_cast<std::uint8_t>(crc >> 8));
  out.push_back(static_cast<std::uint8_t>(crc & 0xFF));
  return out;
}

std::vector<std::uint8_t> encode(const MessageBody& body) {
  std::vector<std::uint8_t> payload;
  if (const auto* m = std::get_if<ForceReport>(&body)) {
    put_i32(payload, m->raw_mV);
    put_u16(payload, m->seq);
  } else if (const auto* m = std::get_if<TorqueCommand>(&body)) {
    put_i32(payload, m->torque_mNm);
  } else if (const auto* m = std::get_if<EncoderReport>(&body)) {
    put_i32(payload, m->pos_ticks);
    put_u16(payload, m->seq);
  } else if (const auto* m = std::get_if<HostTelemetry>(&body)) {
    if (m->force_norm_milli > 1000) throw Error(Errc::OutOfRange, "force_norm_milli above 1000");
    put_u16(payload, m->force_norm_milli);
    put_i32(payload, m->encoder_ticks);
    put_u16(payload, m->seq);
  }
  return encode_frame(static_cast<std::uint8_t>(type_of(body)), payload);
}

std::string_view to_string(ParseErrc e) {
  switch (e) {
    case ParseErrc::BadCrc: return "BadCrc";
    case ParseErrc::BadLength: return "BadLength";
    case ParseErrc::UnknownType: return "UnknownType";
    case ParseErrc::BadPayload: return "BadPayload";
  }
  return "Unknown";
}

FeedResult FrameParser::feed(std::span<const std::uint8_t> chunk) {
  FeedResult out;
  feed(chunk, out);
  return out;
}

void FrameParser::feed(std::span<const std::uint8_t> chunk, FeedResult& out) {
  buffer_.insert(buffer_.end(), chunk.begin(), chunk.end());
  std::size_t pos = 0;
  const std::size_t n = buffer_.size();

  while (pos < n) {
    if (buffer_[pos] != kSync) {
      const auto next = std::find(buffer_.begin() + static_cast<std::ptrdiff_t>(pos), buffer_.end(), kSync);
      pos = static_cast<std::size_t>(next - buffer_.begin());
      continue;
    }
    const std::uint64_t offset = base_offset_ + pos;
    if (n - pos < kHeaderSize) break;
    const std::uint8_t type = buffer_[pos + 1];
    const std::size_t len = buffer_[pos + 2];
    if (len > kMaxPayload) {
      out.errors.push_back({ParseErrc::BadLength, offset});
      ++pos;
      continue;
    }
    const std::size_t frame_size = kHeaderSize + len + kCrcSize;
    if (n - pos < frame_size) break;

    const std::uint8_t* frame = buffer_.data() + pos;
    const std::uint16_t wire_crc = static_cast<std::uint16_t>((frame[frame_size - 2] << 8) | frame[frame_size - 1]);
    if (crc16(std::span(frame + 1, 2 + len)) != wire_crc) {
      // Rescan from the byte after this sync; a real frame may start inside.
      out.errors.push_back({ParseErrc::BadCrc, offset});
      ++pos;
      continue;
    }
    pos += frame_size;

    const std::size_t want = expected_payload(type);
    if (want == 0) {
      out.errors.push_back({ParseErrc::UnknownType, offset});
      continue;
    }
    if (len != want) {
      out.errors.push_back({ParseErrc::BadLength, offset});
      continue;
    }
    const std::uint8_t* p = frame + kHeaderSize;
    switch (static_cast<MsgType>(type)) {
      case MsgType::ForceReport:
        out.bodies.emplace_back(ForceReport{get_i32(p), get_u16(p + 4)});
        break;
      case MsgType::TorqueCommand:
        out.bodies.emplace_back(TorqueCommand{get_i32(p)});
        break;
      case MsgType::EncoderReport:
        out.bodies.emplace_back(EncoderReport{get_i32(p), get_u16(p + 4)});
        break;
      case MsgType::HostTelemetry: {
        const std::uint16_t force = get_u16(p);
        if (force > 1000) {
          out.errors.push_back({ParseErrc::BadPayload, offset});
          break;
        }
        out.bodies.emplace_back(HostTelemetry{force, get_i32(p + 2), get_u16(p + 6)});
        break;
      }
    }
  }

  buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(std::min(pos, n)));
  base_offset_ += std::min(pos, n);
}

}  // namespace prometheus::wire

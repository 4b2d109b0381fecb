// Copyright 2026 The PSFC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Frame layout (all integers little-endian):
//
//   query:  "PSFQ" | seq u32 | function u16 | L u32 | L x element u64
//   answer: "PSFA" | seq u32 |                L u32 | L x element u64
//
// `seq` is a per-connection counter starting at 0. Element canonicity is not
// checked here; servers reject non-canonical inputs at ingress.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <optional>
#include <span>
#include <vector>

#include "psfc/error.hpp"
#include "psfc/field.hpp"

namespace psfc {

enum class MessageKind : std::uint8_t { kQuery, kAnswer };

struct WireMessage {
  MessageKind kind = MessageKind::kQuery;
  std::uint32_t seq = 0;
  std::uint16_t function = 0;  // queries only
  FieldVector payload;

  friend bool operator==(const WireMessage&, const WireMessage&) = default;
};

inline constexpr std::array<std::uint8_t, 4> kQueryMagic = {'P', 'S', 'F', 'Q'};
inline constexpr std::array<std::uint8_t, 4> kAnswerMagic = {'P', 'S', 'F', 'A'};
inline constexpr std::size_t kQueryHeaderSize = 4 + 4 + 2 + 4;
inline constexpr std::size_t kAnswerHeaderSize = 4 + 4 + 4;
// Refuse absurd dimensions before allocating.
inline constexpr std::uint32_t kMaxWireDim = 1u << 20;

namespace detail {

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
}

template <typename T>
T get_le(std::span<const std::uint8_t> in, std::size_t offset) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<T>(static_cast<T>(in[offset + i]) << (8 * i));
  }
  return v;
}

inline std::optional<MessageKind> magic_kind(std::span<const std::uint8_t> in) {
  if (in.size() < 4) return std::nullopt;
  if (std::memcmp(in.data(), kQueryMagic.data(), 4) == 0) return MessageKind::kQuery;
  if (std::memcmp(in.data(), kAnswerMagic.data(), 4) == 0) return MessageKind::kAnswer;
  throw Error(ErrorCode::kMalformedFrame, "bad magic");
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_message(const WireMessage& m) {
  std::vector<std::uint8_t> out;
  const bool query = m.kind == MessageKind::kQuery;
  out.reserve((query ? kQueryHeaderSize : kAnswerHeaderSize) + 8 * m.payload.size());
  const auto& magic = query ? kQueryMagic : kAnswerMagic;
  out.insert(out.end(), magic.begin(), magic.end());
  detail::put_le<std::uint32_t>(out, m.seq);
  if (query) detail::put_le<std::uint16_t>(out, m.function);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.payload.size()));
  for (auto x : m.payload) detail::put_le<std::uint64_t>(out, x.value);
  return out;
}

/// Total length of the frame starting at `prefix`, or nullopt if the header is
/// not complete yet. Throws MalformedFrame on bad magic or oversize L.
inline std::optional<std::size_t> frame_length(std::span<const std::uint8_t> prefix) {
  auto kind = detail::magic_kind(prefix);
  if (!kind) return std::nullopt;
  const std::size_t header =
      *kind == MessageKind::kQuery ? kQueryHeaderSize : kAnswerHeaderSize;
  if (prefix.size() < header) return std::nullopt;
  const auto dim = detail::get_le<std::uint32_t>(prefix, header - 4);
  if (dim > kMaxWireDim) throw Error(ErrorCode::kMalformedFrame, "dimension too large");
  return header + 8 * static_cast<std::size_t>(dim);
}

/// Decodes exactly one complete frame; truncation or trailing bytes are
/// MalformedFrame.
inline WireMessage decode_message(std::span<const std::uint8_t> bytes) {
  auto len = frame_length(bytes);
  if (!len) throw Error(ErrorCode::kMalformedFrame, "truncated header");
  if (bytes.size() != *len) {
    throw Error(ErrorCode::kMalformedFrame,
                bytes.size() < *len ? "truncated payload" : "trailing bytes");
  }
  WireMessage m;
  m.kind = *detail::magic_kind(bytes);
  m.seq = detail::get_le<std::uint32_t>(bytes, 4);
  std::size_t offset = 8;
  if (m.kind == MessageKind::kQuery) {
    m.function = detail::get_le<std::uint16_t>(bytes, offset);
    offset += 2;
  }
  const auto dim = detail::get_le<std::uint32_t>(bytes, offset);
  offset += 4;
  m.payload.resize(dim);
  for (auto& x : m.payload) {
    x.value = detail::get_le<std::uint64_t>(bytes, offset);
    offset += 8;
  }
  return m;
}

}  // namespace psfc

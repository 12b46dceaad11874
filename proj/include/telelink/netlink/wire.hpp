// Binary wire framing. Every frame is:
//
//   offset  size  field
//   0       2     magic 0xAE 0x01
//   2       1     msg_type
//   3       4     seq          (u32, little endian)
//   7       8     timestamp_ns (u64, little endian)
//   15      4     payload_len  (u32, little endian)
//   19      n     payload
//   19+n    4     CRC-32 over bytes [0, 19+n), little endian
//
// All doubles on the wire are IEEE-754 binary64, little endian. Quaternions
// are serialized (w, x, y, z); vectors [linear; angular].
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "telelink/netlink/messages.hpp"

namespace telelink {

inline constexpr std::uint8_t kMagic0 = 0xAE;
inline constexpr std::uint8_t kMagic1 = 0x01;
inline constexpr std::size_t kHeaderSize = 19;
inline constexpr std::size_t kFrameOverhead = 23;  // header + CRC

/// CRC-32 (IEEE 802.3, reflected polynomial 0xEDB88320, init and final xor
/// 0xFFFFFFFF). crc32_ieee("123456789") == 0xCBF43926.
std::uint32_t crc32_ieee(std::span<const std::uint8_t> data);

/// Serializes a message into one frame. Throws std::invalid_argument if the
/// message violates its invariants (non-finite values, bad sizes).
std::vector<std::uint8_t> encode(const Message& msg, std::uint32_t seq,
                                 std::uint64_t timestamp_ns);

enum class DecodeStatus : std::uint8_t {
    ok,
    bad_magic,
    truncated,
    length_mismatch,  // buffer longer than the declared frame
    crc_mismatch,
    unknown_type,
    malformed_payload,
};

const char* to_string(DecodeStatus s);

struct DecodedFrame {
    Message message;
    std::uint32_t seq = 0;
    std::uint64_t timestamp_ns = 0;
};

struct DecodeResult {
    DecodeStatus status = DecodeStatus::ok;
    std::size_t error_offset = 0;  // byte offset of the first problem
    std::optional<DecodedFrame> frame;

    bool ok() const { return status == DecodeStatus::ok; }
};

/// Parses exactly one frame occupying the whole buffer. Never throws on
/// malformed input; returns a categorized error instead. CRC is verified
/// before the message type is interpreted.
DecodeResult decode(std::span<const std::uint8_t> bytes);

/// Wire msg_type byte for a message variant (1-based, 0 is never used).
std::uint8_t msg_type_of(const Message& msg);

}  // namespace telelink

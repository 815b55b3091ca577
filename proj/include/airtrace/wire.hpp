#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "airtrace/channel.hpp"

namespace airtrace {

struct WireError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ChecksumError : WireError {
    using WireError::WireError;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr std::uint16_t kWireVersion = 1;

// Binary frame layout (little-endian):
//   magic "CSIF", u16 version, u16 rx_id, u64 timestamp_us,
//   u32 M, u32 K, M*K * (f32 I, f32 Q), u32 CRC32 over everything before.
std::vector<std::uint8_t> encode_frame(const CsiFrame& frame);
CsiFrame decode_frame(const std::uint8_t* data, std::size_t size);

std::size_t encoded_frame_size(int num_antennas, int num_subcarriers);

// Frame files are plain concatenations of encoded frames.
void write_frames(const std::string& path, const std::vector<CsiFrame>& frames);
std::vector<CsiFrame> read_frames(const std::string& path);

std::uint32_t crc32(const std::uint8_t* data, std::size_t size);

} // namespace airtrace

#include "airtrace/wire.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <fstream>

namespace airtrace {

namespace {

constexpr std::array<char, 4> kMagic = {'C', 'S', 'I', 'F'};

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(v & 0xff);
    out.push_back((v >> 8) & 0xff);
}
void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xff);
}
void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back((v >> (8 * i)) & 0xff);
}
void put_f32(std::vector<std::uint8_t>& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

std::uint16_t get_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
std::uint32_t get_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
std::uint64_t get_u64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}
float get_f32(const std::uint8_t* p) {
    std::uint32_t bits = get_u32(p);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

constexpr std::size_t kHeaderSize = 4 + 2 + 2 + 8 + 4 + 4;

} // namespace

std::uint32_t crc32(const std::uint8_t* data, std::size_t size) {
    static const auto table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    std::uint32_t crc = 0xFFFFFFFFu;
    for (std::size_t i = 0; i < size; ++i)
        crc = table[(crc ^ data[i]) & 0xff] ^ (crc >> 8);
    return crc ^ 0xFFFFFFFFu;
}

std::size_t encoded_frame_size(int m, int k) {
    return kHeaderSize + static_cast<std::size_t>(m) * k * 8 + 4;
}

std::vector<std::uint8_t> encode_frame(const CsiFrame& frame) {
    std::vector<std::uint8_t> out;
    out.reserve(encoded_frame_size(frame.num_antennas, frame.num_subcarriers));
    for (char c : kMagic) out.push_back(static_cast<std::uint8_t>(c));
    put_u16(out, kWireVersion);
    put_u16(out, static_cast<std::uint16_t>(frame.rx_id));
    put_u64(out, static_cast<std::uint64_t>(std::llround(frame.t * 1e6)));
    put_u32(out, static_cast<std::uint32_t>(frame.num_antennas));
    put_u32(out, static_cast<std::uint32_t>(frame.num_subcarriers));
    for (const auto& v : frame.csi) {
        put_f32(out, static_cast<float>(v.real()));
        put_f32(out, static_cast<float>(v.imag()));
    }
    put_u32(out, crc32(out.data(), out.size()));
    return out;
}

CsiFrame decode_frame(const std::uint8_t* data, std::size_t size) {
    if (size < kHeaderSize + 4) throw WireError("frame too short");
    if (std::memcmp(data, kMagic.data(), 4) != 0) throw WireError("bad magic");
    std::uint16_t version = get_u16(data + 4);
    if (version != kWireVersion) throw WireError("unsupported version");
    CsiFrame frame;
    frame.rx_id = static_cast<Link>(get_u16(data + 6));
    frame.t = static_cast<double>(get_u64(data + 8)) * 1e-6;
    frame.num_antennas = static_cast<int>(get_u32(data + 16));
    frame.num_subcarriers = static_cast<int>(get_u32(data + 20));
    std::size_t expect = encoded_frame_size(frame.num_antennas, frame.num_subcarriers);
    if (size != expect) throw WireError("frame length mismatch");
    std::uint32_t stored = get_u32(data + size - 4);
    if (stored != crc32(data, size - 4)) throw ChecksumError("CRC mismatch");
    std::size_t n = static_cast<std::size_t>(frame.num_antennas) * frame.num_subcarriers;
    frame.csi.resize(n);
    const std::uint8_t* p = data + kHeaderSize;
    for (std::size_t i = 0; i < n; ++i, p += 8)
        frame.csi[i] = cplx{get_f32(p), get_f32(p + 4)};
    return frame;
}

void write_frames(const std::string& path, const std::vector<CsiFrame>& frames) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    for (const auto& f : frames) {
        auto bytes = encode_frame(f);
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
    }
    if (!out) throw IoError("write failed: " + path);
}

std::vector<CsiFrame> read_frames(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    std::vector<CsiFrame> frames;
    std::size_t off = 0;
    while (off + kHeaderSize + 4 <= bytes.size()) {
        std::uint32_t m = get_u32(bytes.data() + off + 16);
        std::uint32_t k = get_u32(bytes.data() + off + 20);
        std::size_t len = encoded_frame_size(static_cast<int>(m), static_cast<int>(k));
        if (off + len > bytes.size()) throw WireError("truncated frame file");
        frames.push_back(decode_frame(bytes.data() + off, len));
        off += len;
    }
    if (off != bytes.size()) throw WireError("trailing bytes in frame file");
    return frames;
}

} // namespace airtrace

#include "airtrace/udp.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstring>
#include <thread>

namespace airtrace {

namespace {

struct SocketGuard {
    int fd;
    explicit SocketGuard(int f) : fd(f) {}
    ~SocketGuard() {
        if (fd >= 0) ::close(fd);
    }
    SocketGuard(const SocketGuard&) = delete;
    SocketGuard& operator=(const SocketGuard&) = delete;
};

std::pair<std::int64_t, int> frame_key(const CsiFrame& f) {
    return {std::llround(f.t * 1e6), static_cast<int>(f.rx_id)};
}

} // namespace

std::vector<CsiFrame> ReorderBuffer::push(CsiFrame frame, StreamStats& stats) {
    auto key = frame_key(frame);
    double t = frame.t;
    if (t < emitted_up_to_) {
        ++stats.late_drops;
        return {};
    }
    if (!pending_.emplace(key, std::move(frame)).second) {
        ++stats.duplicates;
        return {};
    }

    double newest = pending_.rbegin()->second.t;
    // shed oldest entries when the buffered span exceeds the cap
    while (!pending_.empty() && newest - pending_.begin()->second.t > max_buffer_s_) {
        pending_.erase(pending_.begin());
        ++stats.backpressure_drops;
    }

    std::vector<CsiFrame> released;
    while (!pending_.empty() && newest - pending_.begin()->second.t >= window_s_) {
        released.push_back(std::move(pending_.begin()->second));
        emitted_up_to_ = released.back().t;
        pending_.erase(pending_.begin());
    }
    return released;
}

std::vector<CsiFrame> ReorderBuffer::flush() {
    std::vector<CsiFrame> released;
    released.reserve(pending_.size());
    for (auto& [key, frame] : pending_) {
        released.push_back(std::move(frame));
        emitted_up_to_ = released.back().t;
    }
    pending_.clear();
    return released;
}

StreamStats stream_frames(const std::vector<CsiFrame>& frames,
                          const std::string& host, int port, double pace_s) {
    int fd = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (fd < 0) throw IoError("socket() failed");
    SocketGuard guard(fd);

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
        throw IoError("bad host address: " + host);

    StreamStats stats;
    for (const auto& frame : frames) {
        auto bytes = encode_frame(frame);
        ssize_t n = ::sendto(fd, bytes.data(), bytes.size(), 0,
                             reinterpret_cast<const sockaddr*>(&addr), sizeof(addr));
        if (n != static_cast<ssize_t>(bytes.size())) throw IoError("sendto() failed");
        ++stats.sent;
        if (pace_s > 0.0)
            std::this_thread::sleep_for(std::chrono::duration<double>(pace_s));
    }
    return stats;
}

std::vector<CsiFrame> ingest_frames(int port, double silence_timeout_s,
                                    std::size_t max_frames, StreamStats* stats_out) {
    int fd = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (fd < 0) throw IoError("socket() failed");
    SocketGuard guard(fd);

    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    // bursty senders overrun the default receive buffer long before the
    // poll loop drains it; ask for enough to absorb a few thousand frames
    int rcvbuf = 8 * 1024 * 1024;
    ::setsockopt(fd, SOL_SOCKET, SO_RCVBUF, &rcvbuf, sizeof(rcvbuf));

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::bind(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0)
        throw IoError("bind() failed on port " + std::to_string(port));

    StreamStats stats;
    ReorderBuffer buffer;
    std::vector<CsiFrame> frames;
    std::vector<std::uint8_t> datagram(65536);

    int timeout_ms = std::max(1, static_cast<int>(std::lround(silence_timeout_s * 1000.0)));
    while (frames.size() < max_frames) {
        pollfd pfd{fd, POLLIN, 0};
        int ready = ::poll(&pfd, 1, timeout_ms);
        if (ready < 0) throw IoError("poll() failed");
        if (ready == 0) {
            if (stats.received == 0)
                throw StreamTimeoutError("no datagrams received within timeout");
            break; // silence after a stream: treat as end of stream
        }
        ssize_t n = ::recvfrom(fd, datagram.data(), datagram.size(), 0, nullptr, nullptr);
        if (n < 0) throw IoError("recvfrom() failed");
        try {
            CsiFrame frame = decode_frame(datagram.data(), static_cast<std::size_t>(n));
            ++stats.received;
            for (auto& released : buffer.push(std::move(frame), stats))
                frames.push_back(std::move(released));
        } catch (const ChecksumError&) {
            ++stats.checksum_failures;
        } catch (const WireError&) {
            ++stats.checksum_failures;
        }
    }
    for (auto& released : buffer.flush())
        if (frames.size() < max_frames) frames.push_back(std::move(released));

    if (stats_out) *stats_out = stats;
    return frames;
}

} // namespace airtrace

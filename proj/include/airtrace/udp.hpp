#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <vector>

#include "airtrace/wire.hpp"

namespace airtrace {

struct StreamTimeoutError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StreamStats {
    std::size_t sent = 0;
    std::size_t received = 0;
    std::size_t checksum_failures = 0;
    std::size_t duplicates = 0;
    std::size_t late_drops = 0;
    std::size_t backpressure_drops = 0;
};

// Reorders frames by timestamp within a window, drops duplicates, and
// sheds the oldest entries when the buffered span exceeds the cap.
class ReorderBuffer {
public:
    explicit ReorderBuffer(double window_s = 0.1, double max_buffer_s = 2.0)
        : window_s_(window_s), max_buffer_s_(max_buffer_s) {}

    // Returns frames released by this insertion, in timestamp order.
    std::vector<CsiFrame> push(CsiFrame frame, StreamStats& stats);
    std::vector<CsiFrame> flush();

private:
    double window_s_;
    double max_buffer_s_;
    double emitted_up_to_ = -1e300;
    std::map<std::pair<std::int64_t, int>, CsiFrame> pending_; // (us, rx) -> frame
};

// One datagram per encoded frame. pace_s > 0 sleeps between datagrams.
StreamStats stream_frames(const std::vector<CsiFrame>& frames,
                          const std::string& host, int port, double pace_s = 0.0);

// Binds the port and collects frames until `silence_timeout_s` passes with
// no datagram (or `max_frames` arrive). Throws StreamTimeout if nothing
// ever arrives. Corrupt datagrams are counted and dropped.
std::vector<CsiFrame> ingest_frames(int port, double silence_timeout_s,
                                    std::size_t max_frames, StreamStats* stats = nullptr);

} // namespace airtrace

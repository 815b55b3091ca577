#pragma once

#include <optional>
#include <set>
#include <vector>

#include "airtrace/denoise.hpp"

namespace airtrace {

struct CalibrationMissingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MotionSegment {
    double start_t = 0.0;
    double end_t = 0.0;
    std::set<Link> rx_support;
};

struct MotionDetectorConfig {
    double window_s = 0.1;
    double hop_s = 0.05;
    double threshold_mult = 10.0;  // "ten times of Std of the static periods"
    double merge_gap_s = 0.2;      // segments closer than this are merged
    double calibration_prefix_s = 1.0;
};

// Per-window standard deviation of the I component of a fused series.
// Window std scales linearly with the series, so comparing against a
// baseline calibrated on the same stream is scale invariant.
std::vector<double> window_stds(const FusedSeries& series, double window_s, double hop_s,
                                std::vector<double>* window_starts = nullptr);

// Baseline: median window std over the known-static prefix.
double calibrate_static_std(const FusedSeries& series, const MotionDetectorConfig& cfg);

// Detects motion segments on both links, merged by union: a segment is
// emitted when either link sees window std > mult * static_std.
std::vector<MotionSegment> detect_motion(
    const std::vector<FusedSeries>& series_per_link,
    const std::vector<double>& static_std_per_link,
    const MotionDetectorConfig& cfg = {});

// Convenience: calibrates baselines from the prefix, then detects.
std::vector<MotionSegment> detect_motion(
    const std::vector<FusedSeries>& series_per_link,
    const MotionDetectorConfig& cfg = {});

} // namespace airtrace

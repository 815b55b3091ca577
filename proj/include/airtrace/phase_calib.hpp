#pragma once

#include <optional>
#include <vector>

#include "airtrace/denoise.hpp"

namespace airtrace {

struct PhaseCalibError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr double kWrapJumpThreshold = 1.5 * M_PI;

// Unwrapped calibrated phase over one motion segment.
struct PhaseSequence {
    std::vector<double> t;
    std::vector<double> phase; // rad, signed; counterclockwise positive
    Link rx_id = Link::Rx1;
    bool aliasing_suspected = false; // median |increment| > pi/2
    bool low_confidence = false;     // some sub-segment spans < 2*pi
};

enum class RotationSign { Clockwise, CounterClockwise };

struct RotationSubSegment {
    std::size_t begin = 0; // [begin, end) sample indexes into the segment
    std::size_t end = 0;
    RotationSign sign = RotationSign::CounterClockwise;
};

// One full revolution of the origin-translated trace plus the two
// partial arcs at the ends, with per-circle sample means.
struct CircleDecomposition {
    struct Range {
        std::size_t begin = 0;
        std::size_t end = 0; // [begin, end)
    };
    std::vector<Range> circles;
    Range leading_arc;
    Range trailing_arc;
    std::vector<cplx> centers; // per-circle sample means
};

// Partitions a motion segment where the smoothed rotation direction
// reverses persistently (>= persistence_s). A segment with no reversal
// is returned whole.
std::vector<RotationSubSegment> split_by_rotation(const FusedSeries& segment,
                                                  double smoothing_s = 0.05,
                                                  double persistence_s = 0.1);

// Wrap-event decomposition of an origin-translated trace: adjacent-sample
// phase jumps beyond 1.5*pi bound full circles.
CircleDecomposition decompose_circles(const std::vector<cplx>& translated);

// Removes slowly drifting static offsets: interpolates between adjacent
// circle centers (anchored at circle midpoints) and subtracts per sample;
// the arcs are calibrated by the first/last center.
std::vector<cplx> eliminate_static(const CircleDecomposition& decomp,
                                   const std::vector<cplx>& translated);

// Unwraps wrapped phase: jumps beyond 1.5*pi are adjusted by +-2*pi.
std::vector<double> unwrap(const std::vector<double>& wrapped);

struct CalibrationOptions {
    bool eliminate_static_offsets = true;  // full circle-center calibration
    bool split_rotation_segments = true;
    double smoothing_s = 0.05;
    double persistence_s = 0.1;
    // moving-average span used to detrend the trace before the first
    // circle detection; drift larger than the rotation radius otherwise
    // hides the winding entirely
    double bootstrap_s = 0.3;
    // known static component of the series (e.g. measured over a static
    // prefix right before the segment); the segment mean is biased by the
    // rotating term and by amplitude variation along the stroke
    std::optional<cplx> static_offset;
};

struct CalibratedSegment {
    PhaseSequence phase;
    cplx static_offset;             // segment mean removed before calibration
    std::vector<cplx> calibrated;   // trace after calibration, for export
    std::vector<RotationSubSegment> sub_segments;
};

// Full segment calibration: mean translation, optional rotation-direction
// splitting, per-sub-segment circle-center elimination, continuous unwrap.
CalibratedSegment calibrate_segment(const FusedSeries& segment,
                                    const CalibrationOptions& opts = {});

} // namespace airtrace

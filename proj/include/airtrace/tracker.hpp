#pragma once

#include <optional>
#include <vector>

#include "airtrace/geometry.hpp"
#include "airtrace/phase_calib.hpp"

namespace airtrace {

struct TrackerError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct OutOfRegionError : TrackerError {
    using TrackerError::TrackerError;
};
struct EmptyTraceError : TrackerError {
    using TrackerError::TrackerError;
};

struct TrackState {
    double p = 0.0; // current RX1-link reflection path length (m)
    double q = 0.0; // current RX2-link reflection path length (m)
    Point2 position;
    double t = 0.0;
    bool flagged = false; // solver fell back to least squares this step
};

// The antenna-pair ratio carries an AoA-dependent inter-antenna phase on
// top of the propagation phase; with the static offset and the tracked
// position both known, that term is predictable and subtracted from the
// measured increments. Disable to run the plain phase-to-length update.
struct SteeringCorrection {
    bool enabled = true;
    cplx static_offset_rx1{0.0, 0.0}; // segment-mean ratio offset per link
    cplx static_offset_rx2{0.0, 0.0};
};

struct TrackerOptions {
    SteeringCorrection correction;
    bool strict_region = true; // init rejects points outside the margins
};

TrackState init_state(Point2 initial_position, const Scene& scene,
                      bool strict_region = true);

// p <- p - (dphase1 / 2*pi) * lambda (counterclockwise positive = path
// shortening), same for q; position re-solved with the previous point as
// warm start. On NoIntersection the state clamps to the least-squares
// nearest feasible point and the sample is flagged.
TrackState step(const TrackState& state, double dphase1, double dphase2,
                const Scene& scene, const TrackerOptions& opts = {});

// Runs a whole motion segment: one step per sample from the two phase
// sequences (lengths must match).
Trajectory track_segment(Point2 initial_position, const Scene& scene,
                         const PhaseSequence& phase_rx1,
                         const PhaseSequence& phase_rx2,
                         const TrackerOptions& opts = {});

// Savitzky-Golay smoothing: per-coordinate least-squares polynomial fit
// over a sliding window, edges handled by shrinking symmetrically.
Trajectory smooth(const Trajectory& trajectory, int window = 11, int order = 3);

// Mean point-wise Euclidean distance, truth linearly interpolated onto
// the estimate's timestamps.
double trace_error(const Trajectory& estimate, const Trajectory& truth);

} // namespace airtrace

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "airtrace/aoa.hpp"
#include "airtrace/config.hpp"
#include "airtrace/motion.hpp"
#include "airtrace/phase_calib.hpp"
#include "airtrace/tracker.hpp"

namespace airtrace {

struct PipelineError : std::runtime_error {
    PipelineError(const std::string& stage, const std::string& what)
        : std::runtime_error("[" + stage + "] " + what), stage(stage) {}
    std::string stage;
};

struct SegmentReport {
    MotionSegment segment;
    Point2 initial_position;
    Trajectory estimate;     // final (smoothed when enabled)
    Trajectory raw_estimate; // before smoothing
    PhaseSequence phase_rx1;
    PhaseSequence phase_rx2;
    double mean_error = 0.0; // vs ground truth, when truth is available
    bool aliasing_suspected = false;
    bool low_confidence = false;
};

struct RunReport {
    Trajectory ground_truth;
    std::vector<SegmentReport> segments;
    double mean_error = 0.0; // sample-weighted mean over segments
    std::size_t total_samples = 0;
};

struct SweepPoint {
    double rate = 0.0;
    double mean_error = 0.0;
    bool aliasing_suspected = false;
};

struct SweepReport {
    std::vector<SweepPoint> points;
};

// Core pipeline on already-available frame streams: ratio, fusion, motion
// detection (unless segments are supplied), per-segment calibration,
// initial position, tracking, smoothing, scoring vs `truth` when present.
RunReport process_frames(const ExperimentConfig& config,
                         const std::vector<CsiFrame>& frames_rx1,
                         const std::vector<CsiFrame>& frames_rx2,
                         const std::optional<Trajectory>& truth,
                         const std::vector<MotionSegment>* segments = nullptr);

// Simulate per the config, run the pipeline, optionally write the report
// (traces, phases, metrics) under config.output_dir.
RunReport run_experiment(const ExperimentConfig& config, bool write_outputs = true);

// Simulates once at the config rate, then re-runs the pipeline on frame
// streams decimated to each target rate, reusing the full-rate motion
// segmentation (decimated streams are too sparse to re-segment reliably).
SweepReport sweep_rates(const ExperimentConfig& config,
                        const std::vector<double>& rates = {300, 200, 100, 50, 20, 10});

std::vector<CsiFrame> decimate_frames(const std::vector<CsiFrame>& frames, int step);

// Delimited-text exports: header row, one row per sample, fixed formatting.
void export_trace(const std::string& path, const Trajectory& trace);
Trajectory import_trace(const std::string& path);
void export_spectrum(const std::string& path, const AoaEstimate& estimate);
void export_phases(const std::string& path, const PhaseSequence& rx1,
                   const PhaseSequence& rx2);

// Writes ground truth, per-segment estimates and phase dumps, and a
// metrics summary under `dir`; creates the directory if needed.
void write_report(const RunReport& report, const ExperimentConfig& config,
                  const std::string& dir);

std::string metrics_json(const RunReport& report);

} // namespace airtrace

#include "airtrace/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "airtrace/wire.hpp"

namespace airtrace {

namespace {

FusedSeries fuse(const RatioSeries& series, bool pca) {
    return pca ? pca_fuse(series) : mean_fuse(series);
}

// Indexes of samples whose timestamp falls inside the segment.
std::pair<std::size_t, std::size_t> segment_range(const std::vector<double>& t,
                                                  const MotionSegment& seg) {
    auto lo = std::lower_bound(t.begin(), t.end(), seg.start_t - 1e-9);
    auto hi = std::upper_bound(t.begin(), t.end(), seg.end_t + 1e-9);
    return {static_cast<std::size_t>(lo - t.begin()),
            static_cast<std::size_t>(hi - t.begin())};
}

PhaseSequence zero_phase(const std::vector<double>& t, Link link) {
    PhaseSequence seq;
    seq.t = t;
    seq.phase.assign(t.size(), 0.0);
    seq.rx_id = link;
    return seq;
}

// Keep only frames whose timestamps exist on both links (UDP loss can
// drop the two links independently; tracking needs aligned samples).
void align_streams(std::vector<CsiFrame>& a, std::vector<CsiFrame>& b) {
    auto key = [](const CsiFrame& f) { return std::llround(f.t * 1e6); };
    std::map<long long, bool> in_a, in_b;
    for (const auto& f : a) in_a[key(f)] = true;
    for (const auto& f : b) in_b[key(f)] = true;
    auto keep = [&](std::vector<CsiFrame>& v, std::map<long long, bool>& other) {
        std::vector<CsiFrame> out;
        out.reserve(v.size());
        for (auto& f : v)
            if (other.count(key(f))) out.push_back(std::move(f));
        v = std::move(out);
    };
    keep(a, in_b);
    keep(b, in_a);
}

Point2 music_initial_position(const ExperimentConfig& cfg,
                              const std::vector<CsiFrame>& frames_rx1,
                              const std::vector<CsiFrame>& frames_rx2,
                              const MotionSegment& seg) {
    // shrink the window for segments shorter than the preferred 0.3 s so a
    // brief motion fragment still gets an estimate (>= 10 frames enforced)
    const double window_s = std::min(0.3, seg.end_t - seg.start_t);
    const double hop_s = 0.1;
    std::string last_error = "segment too short for an estimation window";
    for (double w0 = seg.start_t; w0 + window_s <= seg.end_t + 1e-9; w0 += hop_s) {
        std::vector<CsiFrame> w1, w2;
        for (const auto& f : frames_rx1)
            if (f.t >= w0 - 1e-9 && f.t <= w0 + window_s + 1e-9) w1.push_back(f);
        for (const auto& f : frames_rx2)
            if (f.t >= w0 - 1e-9 && f.t <= w0 + window_s + 1e-9) w2.push_back(f);
        if (w1.size() < 10 || w2.size() < 10) continue;
        try {
            return initial_position(w1, w2, cfg.scene);
        } catch (const AoaError& e) {
            last_error = e.what();
        } catch (const GeometryError& e) {
            last_error = e.what();
        }
    }
    throw PipelineError("initial_position", last_error);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << text;
    if (!out) throw IoError("write failed: " + path);
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

} // namespace

RunReport process_frames(const ExperimentConfig& cfg,
                         const std::vector<CsiFrame>& frames_rx1_in,
                         const std::vector<CsiFrame>& frames_rx2_in,
                         const std::optional<Trajectory>& truth,
                         const std::vector<MotionSegment>* segments_in) {
    std::vector<CsiFrame> frames_rx1 = frames_rx1_in;
    std::vector<CsiFrame> frames_rx2 = frames_rx2_in;
    align_streams(frames_rx1, frames_rx2);
    if (frames_rx1.size() < 4)
        throw PipelineError("ingest", "too few aligned frames");

    RatioSeries ratio1, ratio2;
    try {
        ratio1 = complex_ratio(frames_rx1);
        ratio2 = complex_ratio(frames_rx2);
    } catch (const DenoiseError& e) {
        throw PipelineError("complex_ratio", e.what());
    }

    std::vector<MotionSegment> segments;
    FusedSeries fused1, fused2;
    try {
        fused1 = fuse(ratio1, cfg.pipeline.pca);
        fused2 = fuse(ratio2, cfg.pipeline.pca);
        fused1.rx_id = Link::Rx1;
        fused2.rx_id = Link::Rx2;
    } catch (const DenoiseError& e) {
        throw PipelineError("fusion", e.what());
    }
    if (segments_in) {
        segments = *segments_in;
    } else {
        try {
            segments = detect_motion({fused1, fused2});
        } catch (const std::runtime_error& e) {
            throw PipelineError("motion_detection", e.what());
        }
    }

    RunReport report;
    if (truth) report.ground_truth = *truth;

    CalibrationOptions calib_opts;
    calib_opts.eliminate_static_offsets = cfg.pipeline.sce;
    calib_opts.split_rotation_segments = cfg.pipeline.sce;

    for (const auto& seg : segments) {
        SegmentReport sr;
        sr.segment = seg;

        auto [b1, e1] = segment_range(ratio1.t, seg);
        auto [b2, e2] = segment_range(ratio2.t, seg);
        if (e1 - b1 < 2 || e2 - b2 < 2 || e1 - b1 != e2 - b2)
            throw PipelineError("calibration", "segment too short or misaligned");

        cplx offset1{0.0, 0.0}, offset2{0.0, 0.0};
        try {
            if (seg.rx_support.count(Link::Rx1)) {
                auto calib = calibrate_segment(fuse(slice(ratio1, b1, e1), cfg.pipeline.pca),
                                               calib_opts);
                sr.phase_rx1 = calib.phase;
                offset1 = calib.static_offset;
            } else {
                sr.phase_rx1 = zero_phase(std::vector<double>(ratio1.t.begin() + b1,
                                                              ratio1.t.begin() + e1),
                                          Link::Rx1);
            }
            if (seg.rx_support.count(Link::Rx2)) {
                auto calib = calibrate_segment(fuse(slice(ratio2, b2, e2), cfg.pipeline.pca),
                                               calib_opts);
                sr.phase_rx2 = calib.phase;
                offset2 = calib.static_offset;
            } else {
                sr.phase_rx2 = zero_phase(std::vector<double>(ratio2.t.begin() + b2,
                                                              ratio2.t.begin() + e2),
                                          Link::Rx2);
            }
        } catch (const std::runtime_error& e) {
            throw PipelineError("calibration", e.what());
        }
        sr.phase_rx1.rx_id = Link::Rx1;
        sr.phase_rx2.rx_id = Link::Rx2;
        sr.aliasing_suspected =
            sr.phase_rx1.aliasing_suspected || sr.phase_rx2.aliasing_suspected;
        sr.low_confidence = sr.phase_rx1.low_confidence || sr.phase_rx2.low_confidence;

        if (cfg.pipeline.init_position == "music") {
            // a brief fragment can defeat the estimator entirely; drop it
            // and keep the run alive as long as some segment succeeds
            try {
                sr.initial_position =
                    music_initial_position(cfg, frames_rx1, frames_rx2, seg);
            } catch (const PipelineError&) {
                if (&seg == &segments.back() && report.segments.empty()) throw;
                continue;
            }
        } else {
            if (!truth)
                throw PipelineError("initial_position",
                                    "truth init requested but no ground truth available");
            sr.initial_position = truth->at(seg.start_t);
        }
        sr.initial_position = sr.initial_position + cfg.pipeline.init_bias;

        TrackerOptions topts;
        topts.correction.enabled = true;
        topts.correction.static_offset_rx1 = offset1;
        topts.correction.static_offset_rx2 = offset2;
        try {
            sr.raw_estimate = track_segment(sr.initial_position, cfg.scene,
                                            sr.phase_rx1, sr.phase_rx2, topts);
        } catch (const std::runtime_error& e) {
            throw PipelineError("tracking", e.what());
        }
        sr.estimate = cfg.pipeline.smoothing
                          ? smooth(sr.raw_estimate, cfg.pipeline.smoothing_window,
                                   cfg.pipeline.smoothing_order)
                          : sr.raw_estimate;
        if (truth) sr.mean_error = trace_error(sr.estimate, *truth);

        report.total_samples += sr.estimate.points.size();
        report.segments.push_back(std::move(sr));
    }

    double acc = 0.0;
    for (const auto& sr : report.segments)
        acc += sr.mean_error * static_cast<double>(sr.estimate.points.size());
    report.mean_error =
        report.total_samples ? acc / static_cast<double>(report.total_samples) : 0.0;
    return report;
}

RunReport run_experiment(const ExperimentConfig& cfg, bool write_outputs) {
    Trajectory truth = build_trajectory(cfg.trajectory);
    truth.validate(cfg.scene.max_hand_speed);
    double t_end = truth.end_time() + cfg.trajectory.post_static_s;

    DriftScript drift;
    std::size_t n_reflectors = cfg.scene.static_reflectors.size();
    if (cfg.drift.enabled && n_reflectors > 0) {
        double interval = cfg.drift.interval_s > 0.0
                              ? cfg.drift.interval_s
                              : t_end / std::max(1, cfg.drift.num_keys);
        drift = DriftScript::random(t_end, n_reflectors, cfg.drift.depth, interval,
                                    cfg.seed ^ 0x9e3779b97f4a7c15ull);
    }

    ErrorModel model = cfg.error_model_enabled ? cfg.error_model : ErrorModel::none();
    SimulatedRun run = simulate_run(cfg.scene, truth, cfg.sample_rate, model, cfg.seed,
                                    0.0, t_end, drift, cfg.dynamic_path,
                                    cfg.num_subcarriers);

    RunReport report = process_frames(cfg, run.rx1, run.rx2, truth);
    if (write_outputs) write_report(report, cfg, cfg.output_dir);
    return report;
}

std::vector<CsiFrame> decimate_frames(const std::vector<CsiFrame>& frames, int step) {
    if (step < 1) throw ConfigError("decimation step must be >= 1");
    std::vector<CsiFrame> out;
    out.reserve(frames.size() / step + 1);
    for (std::size_t i = 0; i < frames.size(); i += static_cast<std::size_t>(step))
        out.push_back(frames[i]);
    return out;
}

SweepReport sweep_rates(const ExperimentConfig& cfg, const std::vector<double>& rates) {
    Trajectory truth = build_trajectory(cfg.trajectory);
    truth.validate(cfg.scene.max_hand_speed);
    double t_end = truth.end_time() + cfg.trajectory.post_static_s;

    DriftScript drift;
    std::size_t n_reflectors = cfg.scene.static_reflectors.size();
    if (cfg.drift.enabled && n_reflectors > 0) {
        double interval = cfg.drift.interval_s > 0.0
                              ? cfg.drift.interval_s
                              : t_end / std::max(1, cfg.drift.num_keys);
        drift = DriftScript::random(t_end, n_reflectors, cfg.drift.depth, interval,
                                    cfg.seed ^ 0x9e3779b97f4a7c15ull);
    }
    ErrorModel model = cfg.error_model_enabled ? cfg.error_model : ErrorModel::none();
    SimulatedRun run = simulate_run(cfg.scene, truth, cfg.sample_rate, model, cfg.seed,
                                    0.0, t_end, drift, cfg.dynamic_path,
                                    cfg.num_subcarriers);

    // segment once at the full rate, reuse for every decimated stream
    RunReport full = process_frames(cfg, run.rx1, run.rx2, truth);
    std::vector<MotionSegment> segments;
    for (const auto& sr : full.segments) segments.push_back(sr.segment);

    SweepReport sweep;
    for (double rate : rates) {
        int step = std::max(1, static_cast<int>(std::lround(cfg.sample_rate / rate)));
        RunReport r = process_frames(cfg, decimate_frames(run.rx1, step),
                                     decimate_frames(run.rx2, step), truth, &segments);
        SweepPoint pt;
        pt.rate = cfg.sample_rate / step;
        pt.mean_error = r.mean_error;
        for (const auto& sr : r.segments)
            pt.aliasing_suspected = pt.aliasing_suspected || sr.aliasing_suspected;
        sweep.points.push_back(pt);
    }
    return sweep;
}

void export_trace(const std::string& path, const Trajectory& trace) {
    std::ostringstream out;
    out << "t,x,y\n";
    for (const auto& p : trace.points)
        out << fmt(p.t) << ',' << fmt(p.x) << ',' << fmt(p.y) << '\n';
    write_text(path, out.str());
}

Trajectory import_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "t,x,y")
        throw IoError("bad trace header in " + path);
    Trajectory trace;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        HandPoint p;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &p.t, &p.x, &p.y) != 3)
            throw IoError("bad trace row in " + path);
        trace.points.push_back(p);
    }
    return trace;
}

void export_spectrum(const std::string& path, const AoaEstimate& estimate) {
    std::ostringstream out;
    out << "angle_deg,power\n";
    for (std::size_t i = 0; i < estimate.grid_deg.size(); ++i)
        out << fmt(estimate.grid_deg[i]) << ',' << fmt(estimate.spectrum[i]) << '\n';
    write_text(path, out.str());
}

void export_phases(const std::string& path, const PhaseSequence& rx1,
                   const PhaseSequence& rx2) {
    if (rx1.t.size() != rx2.t.size())
        throw IoError("phase sequences must be aligned for export");
    std::ostringstream out;
    out << "t,phase_rx1,phase_rx2\n";
    for (std::size_t i = 0; i < rx1.t.size(); ++i)
        out << fmt(rx1.t[i]) << ',' << fmt(rx1.phase[i]) << ',' << fmt(rx2.phase[i])
            << '\n';
    write_text(path, out.str());
}

std::string metrics_json(const RunReport& report) {
    nlohmann::json j;
    j["mean_error_m"] = report.mean_error;
    j["total_samples"] = report.total_samples;
    j["num_segments"] = report.segments.size();
    j["segments"] = nlohmann::json::array();
    for (const auto& sr : report.segments) {
        nlohmann::json s;
        s["start_t"] = sr.segment.start_t;
        s["end_t"] = sr.segment.end_t;
        s["initial_position"] = {sr.initial_position.x, sr.initial_position.y};
        s["mean_error_m"] = sr.mean_error;
        s["samples"] = sr.estimate.points.size();
        s["aliasing_suspected"] = sr.aliasing_suspected;
        s["low_confidence"] = sr.low_confidence;
        j["segments"].push_back(std::move(s));
    }
    return j.dump(2) + "\n";
}

void write_report(const RunReport& report, const ExperimentConfig& cfg,
                  const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory: " + dir);

    save_config(cfg, dir + "/config.json");
    if (!report.ground_truth.empty())
        export_trace(dir + "/ground_truth.csv", report.ground_truth);
    for (std::size_t i = 0; i < report.segments.size(); ++i) {
        const auto& sr = report.segments[i];
        std::string tag = "segment" + std::to_string(i);
        export_trace(dir + "/" + tag + "_estimate.csv", sr.estimate);
        export_trace(dir + "/" + tag + "_raw_estimate.csv", sr.raw_estimate);
        export_phases(dir + "/" + tag + "_phases.csv", sr.phase_rx1, sr.phase_rx2);
    }
    write_text(dir + "/metrics.json", metrics_json(report));
}

} // namespace airtrace

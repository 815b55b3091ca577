#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "airtrace/experiment.hpp"
#include "airtrace/udp.hpp"
#include "airtrace/wire.hpp"

using namespace airtrace;

namespace {

ExperimentConfig load(const std::string& config_path, std::uint64_t* seed_override,
                      std::string* output_override) {
    ExperimentConfig cfg = load_config(config_path);
    if (seed_override) cfg.seed = *seed_override;
    if (output_override && !output_override->empty()) cfg.output_dir = *output_override;
    return cfg;
}

SimulatedRun simulate_from_config(const ExperimentConfig& cfg, Trajectory* truth_out) {
    Trajectory truth = build_trajectory(cfg.trajectory);
    truth.validate(cfg.scene.max_hand_speed);
    double t_end = truth.end_time() + cfg.trajectory.post_static_s;

    DriftScript drift;
    if (cfg.drift.enabled && !cfg.scene.static_reflectors.empty()) {
        double interval = cfg.drift.interval_s > 0.0
                              ? cfg.drift.interval_s
                              : t_end / std::max(1, cfg.drift.num_keys);
        drift = DriftScript::random(t_end, cfg.scene.static_reflectors.size(),
                                    cfg.drift.depth, interval,
                                    cfg.seed ^ 0x9e3779b97f4a7c15ull);
    }
    ErrorModel model = cfg.error_model_enabled ? cfg.error_model : ErrorModel::none();
    if (truth_out) *truth_out = truth;
    return simulate_run(cfg.scene, truth, cfg.sample_rate, model, cfg.seed, 0.0, t_end,
                        drift, cfg.dynamic_path, cfg.num_subcarriers);
}

void print_report(const RunReport& report) {
    std::printf("segments: %zu, samples: %zu, mean error: %.4f cm\n",
                report.segments.size(), report.total_samples,
                report.mean_error * 100.0);
    for (std::size_t i = 0; i < report.segments.size(); ++i) {
        const auto& s = report.segments[i];
        std::printf("  segment %zu: [%.2f, %.2f] s  init (%.3f, %.3f)  error %.4f cm%s%s\n",
                    i, s.segment.start_t, s.segment.end_t, s.initial_position.x,
                    s.initial_position.y, s.mean_error * 100.0,
                    s.aliasing_suspected ? "  [aliasing suspected]" : "",
                    s.low_confidence ? "  [low confidence]" : "");
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"passive WiFi-CSI gesture tracking: simulate, recover, score"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_dir;
    std::uint64_t seed = 0;
    bool seed_given = false;

    auto add_common = [&](CLI::App* sub, bool need_config = true) {
        auto* opt = sub->add_option("-c,--config", config_path, "config file (JSON)");
        if (need_config) opt->required();
        sub->add_option("-o,--output", output_dir, "output directory override");
        sub->add_option("-s,--seed", seed, "seed override")
            ->each([&](const std::string&) { seed_given = true; });
    };

    // simulate: write frame files for both receivers plus the ground truth
    auto* sim = app.add_subcommand("simulate", "simulate a run, write frame files");
    add_common(sim);

    // track: run the recovery pipeline on previously written frame files
    auto* track = app.add_subcommand("track", "track from frame files");
    add_common(track);
    std::string frames1_path, frames2_path;
    track->add_option("--rx1", frames1_path, "receiver 1 frame file")->required();
    track->add_option("--rx2", frames2_path, "receiver 2 frame file")->required();

    // run: simulate + track + score in one pass
    auto* run = app.add_subcommand("run", "closed loop: simulate, track, score");
    add_common(run);

    auto* sweep = app.add_subcommand("sweep", "sampling-rate sweep by decimation");
    add_common(sweep);

    auto* stream = app.add_subcommand("stream", "send a frame file over UDP");
    std::string host = "127.0.0.1";
    int port = 9000;
    double pace = 0.0;
    std::string stream_file;
    stream->add_option("file", stream_file, "frame file to send")->required();
    stream->add_option("--host", host, "destination host");
    stream->add_option("--port", port, "destination port");
    stream->add_option("--pace", pace, "seconds between datagrams");

    auto* serve = app.add_subcommand("serve", "receive frames over UDP, then track");
    add_common(serve);
    serve->add_option("--port", port, "listen port");
    double silence = 2.0;
    std::size_t max_frames = 1u << 20;
    serve->add_option("--silence", silence, "end-of-stream silence timeout (s)");
    serve->add_option("--max-frames", max_frames, "stop after this many frames");

    CLI11_PARSE(app, argc, argv);

    try {
        std::uint64_t* seed_ptr = seed_given ? &seed : nullptr;
        if (sim->parsed()) {
            ExperimentConfig cfg = load(config_path, seed_ptr, &output_dir);
            Trajectory truth;
            SimulatedRun simulated = simulate_from_config(cfg, &truth);
            std::filesystem::create_directories(cfg.output_dir);
            write_frames(cfg.output_dir + "/rx1.frames", simulated.rx1);
            write_frames(cfg.output_dir + "/rx2.frames", simulated.rx2);
            export_trace(cfg.output_dir + "/ground_truth.csv", truth);
            std::printf("wrote %zu + %zu frames to %s\n", simulated.rx1.size(),
                        simulated.rx2.size(), cfg.output_dir.c_str());
        } else if (track->parsed()) {
            ExperimentConfig cfg = load(config_path, seed_ptr, &output_dir);
            Trajectory truth = build_trajectory(cfg.trajectory);
            RunReport report = process_frames(cfg, read_frames(frames1_path),
                                              read_frames(frames2_path), truth);
            write_report(report, cfg, cfg.output_dir);
            print_report(report);
        } else if (run->parsed()) {
            ExperimentConfig cfg = load(config_path, seed_ptr, &output_dir);
            RunReport report = run_experiment(cfg);
            print_report(report);
        } else if (sweep->parsed()) {
            ExperimentConfig cfg = load(config_path, seed_ptr, &output_dir);
            SweepReport report = sweep_rates(cfg);
            std::printf("rate_hz,mean_error_cm,aliasing_suspected\n");
            for (const auto& pt : report.points)
                std::printf("%.0f,%.4f,%d\n", pt.rate, pt.mean_error * 100.0,
                            pt.aliasing_suspected ? 1 : 0);
        } else if (stream->parsed()) {
            StreamStats stats = stream_frames(read_frames(stream_file), host, port, pace);
            std::printf("sent %zu datagrams to %s:%d\n", stats.sent, host.c_str(), port);
        } else if (serve->parsed()) {
            ExperimentConfig cfg = load(config_path, seed_ptr, &output_dir);
            StreamStats stats;
            std::vector<CsiFrame> frames = ingest_frames(port, silence, max_frames, &stats);
            std::printf("received %zu frames (%zu checksum failures, %zu duplicates)\n",
                        stats.received, stats.checksum_failures, stats.duplicates);
            std::vector<CsiFrame> rx1, rx2;
            for (auto& f : frames)
                (f.rx_id == Link::Rx1 ? rx1 : rx2).push_back(std::move(f));
            Trajectory truth = build_trajectory(cfg.trajectory);
            RunReport report = process_frames(cfg, rx1, rx2, truth);
            write_report(report, cfg, cfg.output_dir);
            print_report(report);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

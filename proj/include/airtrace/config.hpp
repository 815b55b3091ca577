#pragma once

#include <optional>
#include <string>
#include <vector>

#include "airtrace/channel.hpp"
#include "airtrace/geometry.hpp"

namespace airtrace {

inline constexpr int kConfigSchemaVersion = 1;

// Scripted stroke primitive. `line` uses start/end; `arc` uses center,
// radius and the two angles; `polyline` and `letter` use waypoints (for
// `letter` they come from the built-in glyph table, placed at origin and
// scaled). All strokes run at constant `speed`.
struct TrajectorySpec {
    std::string type = "line"; // line | arc | polyline | letter
    Point2 start{0.3, 0.3};
    Point2 end{0.6, 0.6};
    Point2 center{0.6, 0.6};
    double radius = 0.2;
    double start_angle_deg = 0.0;
    double end_angle_deg = 180.0;
    std::vector<Point2> waypoints;
    std::string letter = "M";
    Point2 origin{0.4, 0.4};
    double scale = 0.25;
    double speed = 0.25;        // m/s along the stroke
    double pre_static_s = 1.5;  // hold at the first point (calibration)
    double post_static_s = 0.5; // hold at the last point
};

struct DriftSpec {
    bool enabled = false;
    int num_keys = 4;        // scale changes over the run
    double depth = 0.3;      // max relative amplitude change
    double interval_s = 0.0; // 0 = spread keys evenly over the run
};

struct PipelineSpec {
    bool sce = true;
    bool smoothing = true;
    bool pca = true;
    std::string init_position = "truth"; // truth | music
    Point2 init_bias{0.0, 0.0};          // added to the initial position
    int smoothing_window = 11;
    int smoothing_order = 3;
};

struct ExperimentConfig {
    int schema_version = kConfigSchemaVersion;
    std::uint64_t seed = 0;
    bool seed_set = false;
    double sample_rate = 300.0;
    int num_subcarriers = kDefaultSubcarriers;
    std::string output_dir = "out";
    Scene scene;
    TrajectorySpec trajectory;
    ErrorModel error_model;
    bool error_model_enabled = true;
    DriftSpec drift;
    DynamicPath dynamic_path;
    PipelineSpec pipeline;
};

ExperimentConfig default_config();

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& config);
void save_config(const ExperimentConfig& config, const std::string& path);

// Waypoints for the built-in letter glyphs in a unit box (x right, y up).
std::vector<Point2> letter_waypoints(const std::string& letter);

// Resolves a TrajectorySpec into a timestamped ground-truth path. Motion starts
// at t = pre_static_s; holds are represented by repeated endpoint keys.
Trajectory build_trajectory(const TrajectorySpec& spec);

} // namespace airtrace

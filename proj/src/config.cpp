#include "airtrace/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "airtrace/wire.hpp"

namespace airtrace {

using nlohmann::json;

namespace {

Point2 point_from(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 2)
        throw ConfigError(std::string(what) + " must be a [x, y] pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

json point_to(Point2 p) { return json::array({p.x, p.y}); }

template <typename T>
void read_if(const json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

// Glyph strokes in a unit box, drawn as one continuous polyline.
const std::map<std::string, std::vector<Point2>>& glyph_table() {
    static const std::map<std::string, std::vector<Point2>> table = {
        {"L", {{0.0, 1.0}, {0.0, 0.0}, {0.8, 0.0}}},
        {"M", {{0.0, 0.0}, {0.0, 1.0}, {0.5, 0.4}, {1.0, 1.0}, {1.0, 0.0}}},
        {"N", {{0.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}, {1.0, 1.0}}},
        {"V", {{0.0, 1.0}, {0.5, 0.0}, {1.0, 1.0}}},
        {"W", {{0.0, 1.0}, {0.25, 0.0}, {0.5, 0.7}, {0.75, 0.0}, {1.0, 1.0}}},
        {"Z", {{0.0, 1.0}, {1.0, 1.0}, {0.0, 0.0}, {1.0, 0.0}}},
    };
    return table;
}

} // namespace

std::vector<Point2> letter_waypoints(const std::string& letter) {
    auto it = glyph_table().find(letter);
    if (it == glyph_table().end())
        throw ConfigError("unknown letter glyph: " + letter);
    return it->second;
}

ExperimentConfig default_config() {
    ExperimentConfig cfg;
    cfg.scene = make_scene(1.5, 1.5, 5.32e9, 3);
    cfg.scene.static_reflectors = {{{1.2, 1.4}, 0.3}, {{0.2, 1.3}, 0.15}};
    return cfg;
}

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }

    ExperimentConfig cfg = default_config();
    read_if(j, "schema_version", cfg.schema_version);
    if (cfg.schema_version != kConfigSchemaVersion)
        throw ConfigError("unsupported schema_version");
    if (!j.contains("seed")) throw ConfigError("seed is mandatory");
    cfg.seed = j["seed"].get<std::uint64_t>();
    cfg.seed_set = true;
    read_if(j, "sample_rate", cfg.sample_rate);
    if (cfg.sample_rate <= 0.0) throw ConfigError("sample_rate must be positive");
    read_if(j, "num_subcarriers", cfg.num_subcarriers);
    read_if(j, "output_dir", cfg.output_dir);

    if (auto it = j.find("scene"); it != j.end()) {
        const json& s = *it;
        double l1 = s.value("l1", 1.5), l2 = s.value("l2", 1.5);
        double carrier = s.value("carrier_freq", 5.32e9);
        int antennas = s.value("num_antennas", 3);
        double spacing = s.value("antenna_spacing", 0.0);
        cfg.scene = make_scene(l1, l2, carrier, antennas, spacing);
        read_if(s, "los_amplitude", cfg.scene.los_amplitude);
        read_if(s, "max_hand_speed", cfg.scene.max_hand_speed);
        read_if(s, "region_margin", cfg.scene.region_margin);
        cfg.scene.static_reflectors.clear();
        if (auto rit = s.find("static_reflectors"); rit != s.end()) {
            for (const auto& r : *rit) {
                StaticReflector ref;
                ref.position = point_from(r.at("position"), "reflector position");
                ref.amplitude = r.value("amplitude", 0.2);
                cfg.scene.static_reflectors.push_back(ref);
            }
        } else {
            cfg.scene.static_reflectors = default_config().scene.static_reflectors;
        }
    }

    if (auto it = j.find("trajectory"); it != j.end()) {
        const json& t = *it;
        TrajectorySpec& spec = cfg.trajectory;
        read_if(t, "type", spec.type);
        if (t.contains("start")) spec.start = point_from(t["start"], "start");
        if (t.contains("end")) spec.end = point_from(t["end"], "end");
        if (t.contains("center")) spec.center = point_from(t["center"], "center");
        read_if(t, "radius", spec.radius);
        read_if(t, "start_angle_deg", spec.start_angle_deg);
        read_if(t, "end_angle_deg", spec.end_angle_deg);
        if (t.contains("waypoints")) {
            spec.waypoints.clear();
            for (const auto& w : t["waypoints"])
                spec.waypoints.push_back(point_from(w, "waypoint"));
        }
        read_if(t, "letter", spec.letter);
        if (t.contains("origin")) spec.origin = point_from(t["origin"], "origin");
        read_if(t, "scale", spec.scale);
        read_if(t, "speed", spec.speed);
        read_if(t, "pre_static_s", spec.pre_static_s);
        read_if(t, "post_static_s", spec.post_static_s);
        if (spec.speed <= 0.0) throw ConfigError("trajectory speed must be positive");
    }

    if (auto it = j.find("error_model"); it != j.end()) {
        const json& e = *it;
        read_if(e, "enabled", cfg.error_model_enabled);
        read_if(e, "sfo_slope", cfg.error_model.sfo_slope);
        read_if(e, "pbd_slope_range", cfg.error_model.pbd_slope_range);
        read_if(e, "pll_offset_range", cfg.error_model.pll_offset_range);
        read_if(e, "cfo_walk_std", cfg.error_model.cfo_walk_std);
        read_if(e, "agc_impulse_prob", cfg.error_model.agc_impulse_prob);
        read_if(e, "agc_impulse_lo", cfg.error_model.agc_impulse_lo);
        read_if(e, "agc_impulse_hi", cfg.error_model.agc_impulse_hi);
        read_if(e, "awgn_sigma", cfg.error_model.awgn_sigma);
    }

    if (auto it = j.find("drift"); it != j.end()) {
        const json& d = *it;
        read_if(d, "enabled", cfg.drift.enabled);
        read_if(d, "num_keys", cfg.drift.num_keys);
        read_if(d, "depth", cfg.drift.depth);
        read_if(d, "interval_s", cfg.drift.interval_s);
    }

    if (auto it = j.find("dynamic_path"); it != j.end()) {
        const json& d = *it;
        read_if(d, "amplitude_at_reference", cfg.dynamic_path.amplitude_at_reference);
        read_if(d, "reference_length", cfg.dynamic_path.reference_length);
    }

    if (auto it = j.find("pipeline"); it != j.end()) {
        const json& p = *it;
        read_if(p, "sce", cfg.pipeline.sce);
        read_if(p, "smoothing", cfg.pipeline.smoothing);
        read_if(p, "pca", cfg.pipeline.pca);
        read_if(p, "init_position", cfg.pipeline.init_position);
        if (p.contains("init_bias"))
            cfg.pipeline.init_bias = point_from(p["init_bias"], "init_bias");
        read_if(p, "smoothing_window", cfg.pipeline.smoothing_window);
        read_if(p, "smoothing_order", cfg.pipeline.smoothing_order);
        if (cfg.pipeline.init_position != "truth" && cfg.pipeline.init_position != "music")
            throw ConfigError("init_position must be 'truth' or 'music'");
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
    json j;
    j["schema_version"] = cfg.schema_version;
    j["seed"] = cfg.seed;
    j["sample_rate"] = cfg.sample_rate;
    j["num_subcarriers"] = cfg.num_subcarriers;
    j["output_dir"] = cfg.output_dir;

    json s;
    s["l1"] = cfg.scene.l1;
    s["l2"] = cfg.scene.l2;
    s["carrier_freq"] = cfg.scene.carrier_freq;
    s["num_antennas"] = cfg.scene.num_antennas;
    s["antenna_spacing"] = cfg.scene.antenna_spacing;
    s["los_amplitude"] = cfg.scene.los_amplitude;
    s["max_hand_speed"] = cfg.scene.max_hand_speed;
    s["region_margin"] = cfg.scene.region_margin;
    s["static_reflectors"] = json::array();
    for (const auto& r : cfg.scene.static_reflectors)
        s["static_reflectors"].push_back(
            {{"position", point_to(r.position)}, {"amplitude", r.amplitude}});
    j["scene"] = std::move(s);

    const TrajectorySpec& spec = cfg.trajectory;
    json t;
    t["type"] = spec.type;
    t["speed"] = spec.speed;
    t["pre_static_s"] = spec.pre_static_s;
    t["post_static_s"] = spec.post_static_s;
    if (spec.type == "line") {
        t["start"] = point_to(spec.start);
        t["end"] = point_to(spec.end);
    } else if (spec.type == "arc") {
        t["center"] = point_to(spec.center);
        t["radius"] = spec.radius;
        t["start_angle_deg"] = spec.start_angle_deg;
        t["end_angle_deg"] = spec.end_angle_deg;
    } else if (spec.type == "polyline") {
        t["waypoints"] = json::array();
        for (const auto& w : spec.waypoints) t["waypoints"].push_back(point_to(w));
    } else if (spec.type == "letter") {
        t["letter"] = spec.letter;
        t["origin"] = point_to(spec.origin);
        t["scale"] = spec.scale;
    }
    j["trajectory"] = std::move(t);

    j["error_model"] = {{"enabled", cfg.error_model_enabled},
                        {"sfo_slope", cfg.error_model.sfo_slope},
                        {"pbd_slope_range", cfg.error_model.pbd_slope_range},
                        {"pll_offset_range", cfg.error_model.pll_offset_range},
                        {"cfo_walk_std", cfg.error_model.cfo_walk_std},
                        {"agc_impulse_prob", cfg.error_model.agc_impulse_prob},
                        {"agc_impulse_lo", cfg.error_model.agc_impulse_lo},
                        {"agc_impulse_hi", cfg.error_model.agc_impulse_hi},
                        {"awgn_sigma", cfg.error_model.awgn_sigma}};
    j["drift"] = {{"enabled", cfg.drift.enabled},
                  {"num_keys", cfg.drift.num_keys},
                  {"depth", cfg.drift.depth},
                  {"interval_s", cfg.drift.interval_s}};
    j["dynamic_path"] = {{"amplitude_at_reference", cfg.dynamic_path.amplitude_at_reference},
                         {"reference_length", cfg.dynamic_path.reference_length}};
    j["pipeline"] = {{"sce", cfg.pipeline.sce},
                     {"smoothing", cfg.pipeline.smoothing},
                     {"pca", cfg.pipeline.pca},
                     {"init_position", cfg.pipeline.init_position},
                     {"init_bias", point_to(cfg.pipeline.init_bias)},
                     {"smoothing_window", cfg.pipeline.smoothing_window},
                     {"smoothing_order", cfg.pipeline.smoothing_order}};
    return j.dump(2) + "\n";
}

void save_config(const ExperimentConfig& config, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << serialize_config(config);
    if (!out) throw IoError("write failed: " + path);
}

Trajectory build_trajectory(const TrajectorySpec& spec) {
    std::vector<Point2> pts;
    if (spec.type == "line") {
        pts = {spec.start, spec.end};
    } else if (spec.type == "arc") {
        double a0 = spec.start_angle_deg * M_PI / 180.0;
        double a1 = spec.end_angle_deg * M_PI / 180.0;
        int steps = std::max(2, static_cast<int>(std::ceil(std::abs(a1 - a0) / 0.02)));
        for (int i = 0; i <= steps; ++i) {
            double a = a0 + (a1 - a0) * i / steps;
            pts.push_back({spec.center.x + spec.radius * std::cos(a),
                           spec.center.y + spec.radius * std::sin(a)});
        }
    } else if (spec.type == "polyline") {
        pts = spec.waypoints;
    } else if (spec.type == "letter") {
        for (Point2 w : letter_waypoints(spec.letter))
            pts.push_back({spec.origin.x + spec.scale * w.x,
                           spec.origin.y + spec.scale * w.y});
    } else {
        throw ConfigError("unknown trajectory type: " + spec.type);
    }
    if (pts.size() < 2) throw ConfigError("trajectory needs at least two waypoints");

    Trajectory traj;
    double t = spec.pre_static_s;
    traj.points.push_back({t, pts[0].x, pts[0].y});
    for (std::size_t i = 1; i < pts.size(); ++i) {
        double seg = dist(pts[i - 1], pts[i]);
        if (seg <= 0.0) continue;
        t += seg / spec.speed;
        traj.points.push_back({t, pts[i].x, pts[i].y});
    }
    if (traj.points.size() < 2) throw ConfigError("trajectory has zero length");
    return traj;
}

} // namespace airtrace

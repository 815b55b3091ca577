#include "airtrace/channel.hpp"

#include <algorithm>
#include <cmath>

namespace airtrace {

std::vector<double> subcarrier_index_grid(int count) {
    if (count < 2) throw ConfigError("need at least two subcarriers");
    std::vector<double> grid(count);
    for (int i = 0; i < count; ++i)
        grid[i] = -28.0 + 56.0 * i / (count - 1);
    return grid;
}

PathSet scene_paths(const Scene& scene, Link link, std::optional<DynamicPath> dynamic) {
    PathSet ps;
    ps.static_paths.push_back({scene.los_amplitude, scene.los(link), 0.0});
    for (const auto& r : scene.static_reflectors) {
        ps.static_paths.push_back({r.amplitude,
                                   path_length(scene, r.position, link),
                                   arrival_angle(scene, r.position, link)});
    }
    ps.dynamic_path = dynamic;
    return ps;
}

CsiFrame ideal_csi(const Scene& scene, const PathSet& paths,
                   std::optional<Point2> hand, double t, Link link,
                   const std::vector<double>& grid,
                   const std::vector<double>& static_amp_scale) {
    const int m = scene.num_antennas;
    const int k = static_cast<int>(grid.size());
    CsiFrame frame;
    frame.t = t;
    frame.rx_id = link;
    frame.num_antennas = m;
    frame.num_subcarriers = k;
    frame.csi.assign(static_cast<std::size_t>(m) * k, cplx{0.0, 0.0});

    auto add_path = [&](double amp, double length, double aoa) {
        double sin_aoa = std::sin(aoa);
        for (int a = 0; a < m; ++a) {
            double extra = a * scene.antenna_spacing * sin_aoa;
            for (int s = 0; s < k; ++s) {
                double fk = scene.carrier_freq + grid[s] * 312.5e3;
                double lambda_k = kSpeedOfLight / fk;
                double phase = -2.0 * M_PI * (length + extra) / lambda_k;
                frame.at(a, s) += amp * cplx{std::cos(phase), std::sin(phase)};
            }
        }
    };

    for (std::size_t i = 0; i < paths.static_paths.size(); ++i) {
        const auto& sp = paths.static_paths[i];
        double scale = 1.0;
        // LoS (index 0) never drifts; reflector i-1 follows the script
        if (i > 0 && i - 1 < static_amp_scale.size()) scale = static_amp_scale[i - 1];
        add_path(sp.amplitude * scale, sp.length, sp.aoa);
    }

    if (hand && paths.dynamic_path) {
        const auto& dp = *paths.dynamic_path;
        double length = path_length(scene, *hand, link);
        double amp = dp.amplitude_at_reference * dp.reference_length / length;
        add_path(amp, length, arrival_angle(scene, *hand, link));
    }
    return frame;
}

CsiFrame ErrorInjector::inject(const CsiFrame& frame, const std::vector<double>& grid) {
    CsiFrame out = frame;
    double pbd = model_.pbd_slope_range > 0.0
                     ? rng_.uniform(-model_.pbd_slope_range, model_.pbd_slope_range)
                     : 0.0;
    double pll = model_.pll_offset_range > 0.0
                     ? rng_.uniform(-model_.pll_offset_range, model_.pll_offset_range)
                     : 0.0;
    if (model_.cfo_walk_std > 0.0) cfo_ += rng_.normal(model_.cfo_walk_std);

    double agc = 1.0;
    if (model_.agc_impulse_prob > 0.0 && rng_.uniform() < model_.agc_impulse_prob)
        agc = rng_.uniform(model_.agc_impulse_lo, model_.agc_impulse_hi);

    for (int s = 0; s < frame.num_subcarriers; ++s) {
        double phase = grid[s] * (model_.sfo_slope + pbd) + pll + cfo_;
        cplx rot = agc * cplx{std::cos(phase), std::sin(phase)};
        for (int a = 0; a < frame.num_antennas; ++a) out.at(a, s) *= rot;
    }
    if (model_.awgn_sigma > 0.0) {
        for (auto& v : out.csi)
            v += cplx{rng_.normal(model_.awgn_sigma), rng_.normal(model_.awgn_sigma)};
    }
    return out;
}

std::vector<double> DriftScript::at(double t, std::size_t n) const {
    std::vector<double> out(n, 1.0);
    if (keys.empty()) return out;
    if (t <= keys.front().t) {
        for (std::size_t i = 0; i < n && i < keys.front().scales.size(); ++i)
            out[i] = keys.front().scales[i];
        return out;
    }
    if (t >= keys.back().t) {
        for (std::size_t i = 0; i < n && i < keys.back().scales.size(); ++i)
            out[i] = keys.back().scales[i];
        return out;
    }
    auto it = std::lower_bound(keys.begin(), keys.end(), t,
                               [](const Key& k, double v) { return k.t < v; });
    const Key& b = *it;
    const Key& a = *(it - 1);
    double w = (t - a.t) / (b.t - a.t);
    for (std::size_t i = 0; i < n; ++i) {
        double va = i < a.scales.size() ? a.scales[i] : 1.0;
        double vb = i < b.scales.size() ? b.scales[i] : 1.0;
        out[i] = va + w * (vb - va);
    }
    return out;
}

DriftScript DriftScript::random(double duration, std::size_t n_reflectors,
                                double depth, double interval, std::uint64_t seed) {
    DriftScript script;
    Rng rng(seed);
    for (double t = 0.0; t <= duration + interval; t += interval) {
        DriftScript::Key key;
        key.t = t;
        key.scales.resize(n_reflectors);
        for (auto& s : key.scales) s = rng.uniform(1.0 - depth, 1.0 + depth);
        script.keys.push_back(std::move(key));
    }
    return script;
}

SimulatedRun simulate_run(const Scene& scene, const Trajectory& trajectory,
                          double sample_rate, const ErrorModel& model,
                          std::uint64_t seed, double t_begin, double t_end,
                          const DriftScript& drift, const DynamicPath& dynamic,
                          int num_subcarriers) {
    if (sample_rate <= 0.0) throw ConfigError("sample rate must be positive");
    if (t_end <= t_begin) throw ConfigError("empty simulation interval");

    SimulatedRun run;
    run.subcarrier_grid = subcarrier_index_grid(num_subcarriers);
    PathSet p1 = scene_paths(scene, Link::Rx1, dynamic);
    PathSet p2 = scene_paths(scene, Link::Rx2, dynamic);
    ErrorInjector inj1(model, seed * 2654435761ULL + 1);
    ErrorInjector inj2(model, seed * 2654435761ULL + 2);
    const std::size_t n_ref = scene.static_reflectors.size();

    double dt = 1.0 / sample_rate;
    std::size_t n = static_cast<std::size_t>(std::floor((t_end - t_begin) / dt + 0.5));
    run.rx1.reserve(n);
    run.rx2.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double t = t_begin + i * dt;
        std::optional<Point2> hand;
        if (!trajectory.empty()) hand = trajectory.at(t);
        std::vector<double> scales;
        if (!drift.empty()) scales = drift.at(t, n_ref);
        CsiFrame f1 = ideal_csi(scene, p1, hand, t, Link::Rx1, run.subcarrier_grid, scales);
        CsiFrame f2 = ideal_csi(scene, p2, hand, t, Link::Rx2, run.subcarrier_grid, scales);
        if (!model.is_none()) {
            f1 = inj1.inject(f1, run.subcarrier_grid);
            f2 = inj2.inject(f2, run.subcarrier_grid);
        }
        run.rx1.push_back(std::move(f1));
        run.rx2.push_back(std::move(f2));
    }
    return run;
}

} // namespace airtrace

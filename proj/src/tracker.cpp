#include "airtrace/tracker.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "airtrace/channel.hpp"

namespace airtrace {

TrackState init_state(Point2 initial_position, const Scene& scene, bool strict_region) {
    if (strict_region && !scene.in_tracking_region(initial_position))
        throw OutOfRegionError("initial position outside the tracking region");
    TrackState s;
    s.position = initial_position;
    s.p = path_length(scene, initial_position, Link::Rx1);
    s.q = path_length(scene, initial_position, Link::Rx2);
    return s;
}

namespace {

// inter-antenna steering term carried by the antenna-pair ratio
cplx ratio_steering_factor(const Scene& scene, Point2 pos, Link link, cplx offset) {
    double theta = arrival_angle(scene, pos, link);
    double phi = -2.0 * M_PI * scene.antenna_spacing * std::sin(theta) / scene.wavelength;
    return cplx{1.0, 0.0} - offset * cplx{std::cos(phi), std::sin(phi)};
}

Point2 solve_or_clamp(double p, double q, const Scene& scene, Point2 guess, bool* flagged) {
    try {
        return solve_position(p, q, scene, guess);
    } catch (const GeometryError&) {
        *flagged = true;
        return solve_position_least_squares(p, q, scene, guess);
    }
}

} // namespace

TrackState step(const TrackState& state, double dphase1, double dphase2,
                const Scene& scene, const TrackerOptions& opts) {
    const double lambda = scene.wavelength;
    TrackState next = state;
    next.flagged = false;

    double p = state.p - dphase1 / (2.0 * M_PI) * lambda;
    double q = state.q - dphase2 / (2.0 * M_PI) * lambda;
    Point2 pos = solve_or_clamp(p, q, scene, state.position, &next.flagged);

    if (opts.correction.enabled) {
        cplx c1_old = ratio_steering_factor(scene, state.position, Link::Rx1,
                                            opts.correction.static_offset_rx1);
        cplx c2_old = ratio_steering_factor(scene, state.position, Link::Rx2,
                                            opts.correction.static_offset_rx2);
        cplx c1_new = ratio_steering_factor(scene, pos, Link::Rx1,
                                            opts.correction.static_offset_rx1);
        cplx c2_new = ratio_steering_factor(scene, pos, Link::Rx2,
                                            opts.correction.static_offset_rx2);
        double dc1 = 0.0, dc2 = 0.0;
        if (std::abs(c1_old) > 0.05 && std::abs(c1_new) > 0.05)
            dc1 = std::arg(c1_new * std::conj(c1_old));
        if (std::abs(c2_old) > 0.05 && std::abs(c2_new) > 0.05)
            dc2 = std::arg(c2_new * std::conj(c2_old));
        p = state.p - (dphase1 - dc1) / (2.0 * M_PI) * lambda;
        q = state.q - (dphase2 - dc2) / (2.0 * M_PI) * lambda;
        pos = solve_or_clamp(p, q, scene, state.position, &next.flagged);
    }

    next.p = p;
    next.q = q;
    next.position = pos;
    return next;
}

Trajectory track_segment(Point2 initial_position, const Scene& scene,
                         const PhaseSequence& phase_rx1,
                         const PhaseSequence& phase_rx2,
                         const TrackerOptions& opts) {
    if (phase_rx1.phase.size() != phase_rx2.phase.size() || phase_rx1.phase.empty())
        throw TrackerError("phase sequences must be non-empty and aligned");

    TrackState state = init_state(initial_position, scene, opts.strict_region);
    state.t = phase_rx1.t.front();

    Trajectory traj;
    traj.points.push_back({state.t, state.position.x, state.position.y});
    for (std::size_t i = 1; i < phase_rx1.phase.size(); ++i) {
        double d1 = phase_rx1.phase[i] - phase_rx1.phase[i - 1];
        double d2 = phase_rx2.phase[i] - phase_rx2.phase[i - 1];
        state = step(state, d1, d2, scene, opts);
        state.t = phase_rx1.t[i];
        traj.points.push_back({state.t, state.position.x, state.position.y});
    }
    return traj;
}

Trajectory smooth(const Trajectory& trajectory, int window, int order) {
    if (window < 1 || window % 2 == 0) throw ConfigError("window must be odd and positive");
    if (order < 0 || order >= window) throw ConfigError("order must be < window");
    const int n = static_cast<int>(trajectory.points.size());
    if (n == 0 || window == 1) return trajectory;

    Trajectory out = trajectory;
    for (int i = 0; i < n; ++i) {
        int half = std::min({window / 2, i, n - 1 - i});
        int w = 2 * half + 1;
        int p = std::min(order, w - 1);
        if (w == 1) continue;
        Eigen::MatrixXd a(w, p + 1);
        Eigen::VectorXd bx(w), by(w);
        double tc = trajectory.points[i].t;
        for (int j = 0; j < w; ++j) {
            double dt = trajectory.points[i - half + j].t - tc;
            double pw = 1.0;
            for (int c = 0; c <= p; ++c) {
                a(j, c) = pw;
                pw *= dt;
            }
            bx(j) = trajectory.points[i - half + j].x;
            by(j) = trajectory.points[i - half + j].y;
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
        out.points[i].x = qr.solve(bx)(0);
        out.points[i].y = qr.solve(by)(0);
    }
    return out;
}

double trace_error(const Trajectory& estimate, const Trajectory& truth) {
    if (estimate.empty() || truth.empty()) throw EmptyTraceError("empty trace");
    for (std::size_t i = 1; i < estimate.points.size(); ++i)
        if (estimate.points[i].t <= estimate.points[i - 1].t)
            throw TrackerError("estimate timestamps must strictly increase");
    for (std::size_t i = 1; i < truth.points.size(); ++i)
        if (truth.points[i].t <= truth.points[i - 1].t)
            throw TrackerError("truth timestamps must strictly increase");

    double total = 0.0;
    for (const auto& pt : estimate.points)
        total += dist(pt.position(), truth.at(pt.t));
    return total / static_cast<double>(estimate.points.size());
}

} // namespace airtrace

#include "airtrace/aoa.hpp"

#include <algorithm>
#include <cmath>

namespace airtrace {

SteeringContext SteeringContext::from_scene(const Scene& scene) {
    SteeringContext ctx;
    ctx.num_antennas = scene.num_antennas;
    ctx.spacing = scene.antenna_spacing;
    ctx.wavelength = scene.wavelength;
    return ctx;
}

std::vector<double> SteeringContext::grid_degrees() const {
    std::vector<double> grid;
    for (double a = grid_start_deg; a <= grid_stop_deg + 1e-9; a += grid_step_deg)
        grid.push_back(a);
    return grid;
}

Eigen::VectorXcd steering_vector(const SteeringContext& ctx, double theta_rad) {
    Eigen::VectorXcd a(ctx.num_antennas);
    double phi = -2.0 * M_PI * ctx.spacing * std::sin(theta_rad) / ctx.wavelength;
    for (int m = 0; m < ctx.num_antennas; ++m)
        a(m) = cplx{std::cos(m * phi), std::sin(m * phi)};
    return a;
}

Eigen::MatrixXcd correlation_matrix(const std::vector<CsiFrame>& window, int subcarrier) {
    if (window.empty()) throw InsufficientPacketsError("empty window");
    const int m = window.front().num_antennas;
    if (static_cast<int>(window.size()) < m)
        throw InsufficientPacketsError("fewer snapshots than antennas");
    int sc = subcarrier >= 0 ? subcarrier : window.front().num_subcarriers / 2;
    Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(m, m);
    Eigen::VectorXcd x(m);
    for (const auto& frame : window) {
        for (int a = 0; a < m; ++a) x(a) = frame.at(a, sc);
        r += x * x.adjoint();
    }
    return r / static_cast<double>(window.size());
}

Eigen::MatrixXcd correlation_matrix(const Eigen::MatrixXcd& snapshots) {
    if (snapshots.cols() < snapshots.rows())
        throw InsufficientPacketsError("fewer snapshots than antennas");
    return (snapshots * snapshots.adjoint()) / static_cast<double>(snapshots.cols());
}

int mdl_source_count(const std::vector<double>& eig_desc, int n_snapshots) {
    const int m = static_cast<int>(eig_desc.size());
    double trace = 0.0;
    for (double z : eig_desc) trace += std::max(z, 0.0);
    double floor = std::max(trace, 1e-300) * 1e-14;

    double best = 0.0;
    int best_w = 0;
    for (int w = 0; w < m; ++w) {
        double log_gm = 0.0, am = 0.0;
        int tail = m - w;
        for (int i = w; i < m; ++i) {
            double z = std::max(eig_desc[i], floor);
            log_gm += std::log(z);
            am += z;
        }
        log_gm /= tail;
        am /= tail;
        double ratio = log_gm - std::log(am); // log(GM/AM) <= 0
        double score = 0.5 * w * (2.0 * m - w) * std::log(static_cast<double>(n_snapshots)) -
                       n_snapshots * tail * ratio;
        if (w == 0 || score < best) {
            best = score;
            best_w = w;
        }
    }
    return best_w;
}

namespace {

struct Peak {
    std::size_t index;
    double height;
    double prominence_db;
};

std::vector<Peak> find_peaks(const std::vector<double>& spec) {
    std::vector<Peak> peaks;
    const std::size_t n = spec.size();
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(spec[i] > spec[i - 1] && spec[i] > spec[i + 1])) continue;
        // walk to the flanking minima
        std::size_t l = i;
        while (l > 0 && spec[l - 1] < spec[l]) --l;
        std::size_t r = i;
        while (r + 1 < n && spec[r + 1] < spec[r]) ++r;
        double base = std::max(spec[l], spec[r]);
        double prom = 10.0 * std::log10(spec[i] / std::max(base, 1e-300));
        peaks.push_back({i, spec[i], prom});
    }
    return peaks;
}

} // namespace

AoaEstimate music_spectrum(const Eigen::MatrixXcd& corr, int num_sources,
                           const SteeringContext& ctx) {
    const int m = static_cast<int>(corr.rows());
    if (num_sources < 1 || num_sources >= m)
        throw AoaError("source count must be in [1, M-1]");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(corr);
    Eigen::MatrixXcd noise = eig.eigenvectors().leftCols(m - num_sources);

    AoaEstimate est;
    est.num_sources = num_sources;
    est.grid_deg = ctx.grid_degrees();
    est.spectrum.resize(est.grid_deg.size());
    for (std::size_t i = 0; i < est.grid_deg.size(); ++i) {
        Eigen::VectorXcd a = steering_vector(ctx, est.grid_deg[i] * M_PI / 180.0);
        double den = (noise.adjoint() * a).squaredNorm();
        est.spectrum[i] = 1.0 / std::max(den, 1e-300);
    }

    std::vector<Peak> peaks = find_peaks(est.spectrum);
    std::vector<Peak> prominent;
    for (const auto& p : peaks)
        if (p.prominence_db >= 3.0) prominent.push_back(p);
    if (static_cast<int>(prominent.size()) < num_sources) prominent = peaks;
    if (static_cast<int>(prominent.size()) < num_sources)
        throw NoPeaksError("fewer pseudospectrum peaks than sources");

    std::sort(prominent.begin(), prominent.end(),
              [](const Peak& a, const Peak& b) { return a.height > b.height; });
    for (int i = 0; i < num_sources; ++i)
        est.angles_deg.push_back(est.grid_deg[prominent[i].index]);
    return est;
}

AoaEstimate estimate_aoa(const std::vector<CsiFrame>& window, const SteeringContext& ctx) {
    Eigen::MatrixXcd r = correlation_matrix(window);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(r);
    std::vector<double> zeta(eig.eigenvalues().data(),
                             eig.eigenvalues().data() + eig.eigenvalues().size());
    std::reverse(zeta.begin(), zeta.end());
    int w = mdl_source_count(zeta, static_cast<int>(window.size()));
    if (w == 0) {
        AoaEstimate est;
        est.num_sources = 0;
        est.rx_id = window.front().rx_id;
        est.grid_deg = ctx.grid_degrees();
        return est;
    }
    AoaEstimate est = music_spectrum(r, w, ctx);
    est.rx_id = window.front().rx_id;
    return est;
}

LabeledAoa label_peaks(const AoaEstimate& est, double los_direction_deg) {
    if (est.angles_deg.size() != 2)
        throw AoaError("expected exactly two peaks (merged static + dynamic)");
    double d0 = std::abs(est.angles_deg[0] - los_direction_deg);
    double d1 = std::abs(est.angles_deg[1] - los_direction_deg);
    LabeledAoa out;
    if (d0 <= d1) {
        out.los_deg = est.angles_deg[0];
        out.dynamic_deg = est.angles_deg[1];
    } else {
        out.los_deg = est.angles_deg[1];
        out.dynamic_deg = est.angles_deg[0];
    }
    out.low_confidence = std::abs(est.angles_deg[0] - est.angles_deg[1]) < 3.0;
    return out;
}

Point2 triangulate(const LabeledAoa& rx1, const LabeledAoa& rx2, const Scene& scene) {
    // Bearings are taken against the analytic LoS direction (broadside, 0
    // degrees in this frame). The measured static peak is only used to
    // label the peaks: coherent summation with the reflectors biases it
    // away from the true LoS angle, so it is a poor reference.
    double b1 = rx1.dynamic_deg * M_PI / 180.0;
    double b2 = rx2.dynamic_deg * M_PI / 180.0;
    double t1 = std::tan(b1);
    double t2 = std::tan(b2);
    double det = 1.0 - t1 * t2;
    if (std::abs(det) < 1e-3)
        throw DegenerateGeometryError("hand on the RX1-RX2 connecting line");
    double y = t1 * (scene.l1 - scene.l2 * t2) / det;
    double x = (scene.l2 - y) * t2;
    if (!(x > 0.0 && y > 0.0))
        throw DegenerateGeometryError("triangulated point outside the first quadrant");
    return {x, y};
}

Point2 initial_position(const std::vector<CsiFrame>& window_rx1,
                        const std::vector<CsiFrame>& window_rx2,
                        const Scene& scene) {
    SteeringContext ctx = SteeringContext::from_scene(scene);
    AoaEstimate e1 = estimate_aoa(window_rx1, ctx);
    AoaEstimate e2 = estimate_aoa(window_rx2, ctx);
    if (e1.angles_deg.size() != 2 || e2.angles_deg.size() != 2)
        throw AoaError("window does not resolve merged-static + dynamic paths");
    return triangulate(label_peaks(e1), label_peaks(e2), scene);
}

} // namespace airtrace

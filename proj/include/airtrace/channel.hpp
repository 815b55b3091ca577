#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "airtrace/geometry.hpp"
#include "airtrace/rng.hpp"

namespace airtrace {

using cplx = std::complex<double>;

inline constexpr int kDefaultSubcarriers = 30;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One timestamped CSI measurement: complex matrix (antenna x subcarrier).
struct CsiFrame {
    double t = 0.0;
    Link rx_id = Link::Rx1;
    int num_antennas = 0;
    int num_subcarriers = 0;
    std::vector<cplx> csi; // row-major, antenna-major

    cplx& at(int antenna, int subcarrier) {
        return csi[static_cast<std::size_t>(antenna) * num_subcarriers + subcarrier];
    }
    cplx at(int antenna, int subcarrier) const {
        return csi[static_cast<std::size_t>(antenna) * num_subcarriers + subcarrier];
    }
};

// Evenly spaced subcarrier indices spanning [-28, 28] of the 20 MHz band
// (802.11n spacing 312.5 kHz). Count configurable; 30 matches what the
// Intel 5300 reports.
std::vector<double> subcarrier_index_grid(int count = kDefaultSubcarriers);

// Hardware error model: per-subcarrier phase slope terms, per-packet
// random offsets, a CFO random walk, common-scale AGC impulses, AWGN.
struct ErrorModel {
    double sfo_slope = 0.01;         // rad per subcarrier index, constant per run
    double pbd_slope_range = 0.05;   // rad per index, ~U(-r, r) per packet
    double pll_offset_range = M_PI;  // rad, ~U(-r, r) per packet
    double cfo_walk_std = 0.1;       // rad, random-walk step per packet
    double agc_impulse_prob = 0.02;
    double agc_impulse_lo = 1.5;
    double agc_impulse_hi = 4.0;
    double awgn_sigma = 0.01;        // std of additive complex noise per entry

    static ErrorModel none() {
        ErrorModel m;
        m.sfo_slope = 0.0;
        m.pbd_slope_range = 0.0;
        m.pll_offset_range = 0.0;
        m.cfo_walk_std = 0.0;
        m.agc_impulse_prob = 0.0;
        m.awgn_sigma = 0.0;
        return m;
    }
    bool is_none() const {
        return sfo_slope == 0.0 && pbd_slope_range == 0.0 && pll_offset_range == 0.0 &&
               cfo_walk_std == 0.0 && agc_impulse_prob == 0.0 && awgn_sigma == 0.0;
    }
};

struct StaticPath {
    double amplitude = 0.0;
    double length = 0.0;  // m
    double aoa = 0.0;     // rad, at this receiver
};

struct DynamicPath {
    double amplitude_at_reference = 0.05;
    double reference_length = 1.5; // m; amplitude scales as ref/current
};

// Per-receiver path inventory. Exactly one dynamic path when the hand
// is present; static amplitudes constant unless a drift script scales them.
struct PathSet {
    std::vector<StaticPath> static_paths; // LoS first
    std::optional<DynamicPath> dynamic_path;
};

// Static paths (LoS + reflectors) for one receiver of the scene.
PathSet scene_paths(const Scene& scene, Link link,
                    std::optional<DynamicPath> dynamic = std::nullopt);

// Error-free CSI frame: coherent sum over paths of
// amp * exp(-j*2*pi*(length + m*d*sin(aoa)) / lambda_k).
CsiFrame ideal_csi(const Scene& scene, const PathSet& paths,
                   std::optional<Point2> hand, double t, Link link,
                   const std::vector<double>& subcarrier_grid,
                   const std::vector<double>& static_amp_scale = {});

// Per-packet error state threaded through a stream so consecutive frames
// share the CFO walk. Phase terms are identical across antennas.
class ErrorInjector {
public:
    ErrorInjector(ErrorModel model, std::uint64_t seed)
        : model_(model), rng_(seed) {}

    CsiFrame inject(const CsiFrame& frame, const std::vector<double>& subcarrier_grid);

private:
    ErrorModel model_;
    Rng rng_;
    double cfo_ = 0.0;
};

// Piecewise-linear amplitude scaling of the static reflectors over time,
// emulating blockage and erratic motion of other body parts.
struct DriftScript {
    struct Key {
        double t;
        std::vector<double> scales; // one per static reflector
    };
    std::vector<Key> keys;

    bool empty() const { return keys.empty(); }
    std::vector<double> at(double t, std::size_t n_reflectors) const;

    // Random keyframes every `interval` seconds with scales in
    // [1-depth, 1+depth], deterministic in the seed.
    static DriftScript random(double duration, std::size_t n_reflectors,
                              double depth, double interval, std::uint64_t seed);
};

struct SimulatedRun {
    std::vector<CsiFrame> rx1;
    std::vector<CsiFrame> rx2;
    std::vector<double> subcarrier_grid;
};

// Uniform-rate frame streams for both receivers. Hand position is the
// clamped interpolation of the trajectory; deterministic given the seed.
SimulatedRun simulate_run(const Scene& scene, const Trajectory& trajectory,
                          double sample_rate, const ErrorModel& model,
                          std::uint64_t seed,
                          double t_begin, double t_end,
                          const DriftScript& drift = {},
                          const DynamicPath& dynamic = {},
                          int num_subcarriers = kDefaultSubcarriers);

} // namespace airtrace

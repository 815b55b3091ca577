#pragma once

#include <Eigen/Dense>
#include <vector>

#include "airtrace/channel.hpp"

namespace airtrace {

struct AoaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InsufficientPacketsError : AoaError {
    using AoaError::AoaError;
};
struct NoPeaksError : AoaError {
    using AoaError::AoaError;
};
struct DegenerateGeometryError : AoaError {
    using AoaError::AoaError;
};

// Uniform-linear-array parameters plus the pseudospectrum angle grid.
struct SteeringContext {
    int num_antennas = 3;
    double spacing = 0.0;     // m
    double wavelength = 0.0;  // m
    double grid_start_deg = -90.0;
    double grid_stop_deg = 90.0;
    double grid_step_deg = 0.5;

    static SteeringContext from_scene(const Scene& scene);
    std::vector<double> grid_degrees() const;
};

// a_m(theta) = exp(-j*2*pi*m*d*sin(theta)/lambda)
Eigen::VectorXcd steering_vector(const SteeringContext& ctx, double theta_rad);

struct AoaEstimate {
    std::vector<double> angles_deg;  // peak angles, descending spectrum height
    std::vector<double> spectrum;    // pseudospectrum over the grid
    std::vector<double> grid_deg;
    int num_sources = 0;
    Link rx_id = Link::Rx1;
};

// Sample covariance over a window of frames; one snapshot per packet per
// antenna, taken at the center subcarrier (narrowband steering stays exact).
Eigen::MatrixXcd correlation_matrix(const std::vector<CsiFrame>& window,
                                    int subcarrier = -1);

// Covariance of explicit snapshots (columns = snapshots), for planted models.
Eigen::MatrixXcd correlation_matrix(const Eigen::MatrixXcd& snapshots);

// argmin over w in [0, M-1] of
//   0.5*w*(2M-w)*log(N) - N*(M-w)*log(GM/AM of trailing eigenvalues)
int mdl_source_count(const std::vector<double>& eigenvalues_desc, int n_snapshots);

// Noise-subspace pseudospectrum and its `num_sources` strongest peaks.
AoaEstimate music_spectrum(const Eigen::MatrixXcd& corr, int num_sources,
                           const SteeringContext& ctx);

// Full chain on a frame window: covariance, MDL count, spectrum.
AoaEstimate estimate_aoa(const std::vector<CsiFrame>& window, const SteeringContext& ctx);

// Splits a two-peak estimate into (LoS, dynamic) by proximity to the known
// LoS direction (0 deg in this geometry). Flags low confidence when the
// peaks are within 3 degrees of each other.
struct LabeledAoa {
    double los_deg = 0.0;
    double dynamic_deg = 0.0;
    bool low_confidence = false;
};
LabeledAoa label_peaks(const AoaEstimate& est, double los_direction_deg = 0.0);

// Intersects the two hand-bearing rays. Throws DegenerateGeometry when the
// hand lies on the RX1-RX2 connecting line (parallel/undetermined rays).
Point2 triangulate(const LabeledAoa& rx1, const LabeledAoa& rx2, const Scene& scene);

// MUSIC + MDL + triangulation on synchronized frame windows of both links.
Point2 initial_position(const std::vector<CsiFrame>& window_rx1,
                        const std::vector<CsiFrame>& window_rx2,
                        const Scene& scene);

} // namespace airtrace

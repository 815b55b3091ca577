#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace airtrace {

inline constexpr double kSpeedOfLight = 2.998e8; // m/s

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
double norm(Point2 a);
double dist(Point2 a, Point2 b);

enum class Link : int { Rx1 = 0, Rx2 = 1 };

struct GeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateError : GeometryError {
    using GeometryError::GeometryError;
};
struct NoIntersectionError : GeometryError {
    using GeometryError::GeometryError;
};

struct StaticReflector {
    Point2 position;
    double amplitude = 0.2;
};

// Two-receiver coordinate frame: TX at the origin, RX1 at (L1, 0),
// RX2 at (0, L2). Each RX carries a uniform linear array whose broadside
// points at the TX, so the LoS arrives at angle 0 by construction.
struct Scene {
    double l1 = 1.5;
    double l2 = 1.5;
    double carrier_freq = 5.32e9;   // Hz
    double wavelength = 0.0;        // m, c / carrier_freq
    double antenna_spacing = 0.0;   // m, wavelength / 2 by default
    int num_antennas = 3;
    double los_amplitude = 1.0;
    std::vector<StaticReflector> static_reflectors;
    double max_hand_speed = 0.5;    // m/s, validation only
    double region_margin = 0.05;    // m, tracking region inset per axis

    Point2 tx_position() const { return {0.0, 0.0}; }
    Point2 rx_position(Link link) const {
        return link == Link::Rx1 ? Point2{l1, 0.0} : Point2{0.0, l2};
    }
    double los(Link link) const { return link == Link::Rx1 ? l1 : l2; }

    bool in_tracking_region(Point2 p) const;
};

// Validates invariants and fills derived fields (wavelength, spacing).
Scene make_scene(double l1, double l2, double carrier_freq, int num_antennas,
                 double antenna_spacing = 0.0);

struct HandPoint {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    Point2 position() const { return {x, y}; }
};

struct Trajectory {
    std::vector<HandPoint> points;

    bool empty() const { return points.empty(); }
    double start_time() const { return points.front().t; }
    double end_time() const { return points.back().t; }

    // Piecewise-linear interpolation, clamped outside the time span.
    Point2 at(double t) const;

    // Strictly increasing timestamps; consecutive speeds <= max_speed.
    void validate(double max_speed) const;
};

// |TX -> hand| + |hand -> RX_link|
double path_length(const Scene& scene, Point2 hand, Link link);

// Total reflection path length is >= LoS; the gradient of path_length
// with respect to the hand position (used by the solver).
Point2 path_length_gradient(const Scene& scene, Point2 hand, Link link);

// Arrival angle of a signal from `source` at the given receiver array,
// measured from broadside (LoS direction), in radians. Positive toward
// the interior of the first quadrant.
double arrival_angle(const Scene& scene, Point2 source, Link link);

// Intersects the two reflection ellipses (foci TX/RX1 sum p, TX/RX2 sum q)
// in the open first quadrant. Damped Newton from `guess`, bisection along
// the first ellipse as fallback. Residual < 1e-9 m on success.
Point2 solve_position(double p, double q, const Scene& scene, Point2 guess);

// Least-squares variant used when the ellipses fail to intersect: returns
// the first-quadrant point minimizing the squared residuals of both
// ellipse equations. Never throws NoIntersection.
Point2 solve_position_least_squares(double p, double q, const Scene& scene,
                                    Point2 guess);

// Perpendicular offset from the LoS midpoint to the n-th Fresnel-zone
// boundary: 2*sqrt((los/2)^2 + y^2) - los = n*wavelength/2.
double fresnel_boundary_point(int n, double los, double wavelength);

} // namespace airtrace

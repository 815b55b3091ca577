#include "airtrace/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace airtrace {

double norm(Point2 a) { return std::hypot(a.x, a.y); }
double dist(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

bool Scene::in_tracking_region(Point2 p) const {
    double m = region_margin;
    double lmax = std::max(l1, l2);
    return p.x >= m && p.y >= m && p.x <= lmax - m && p.y <= lmax - m;
}

Scene make_scene(double l1, double l2, double carrier_freq, int num_antennas,
                 double antenna_spacing) {
    if (l1 <= 0.0 || l2 <= 0.0) throw GeometryError("LoS lengths must be positive");
    if (num_antennas < 2) throw GeometryError("need at least two antennas");
    if (carrier_freq <= 0.0) throw GeometryError("carrier frequency must be positive");
    Scene s;
    s.l1 = l1;
    s.l2 = l2;
    s.carrier_freq = carrier_freq;
    s.wavelength = kSpeedOfLight / carrier_freq;
    s.antenna_spacing = antenna_spacing > 0.0 ? antenna_spacing : s.wavelength / 2.0;
    s.num_antennas = num_antennas;
    return s;
}

Point2 Trajectory::at(double t) const {
    if (points.empty()) throw GeometryError("empty trajectory");
    if (t <= points.front().t) return points.front().position();
    if (t >= points.back().t) return points.back().position();
    auto it = std::lower_bound(points.begin(), points.end(), t,
                               [](const HandPoint& h, double v) { return h.t < v; });
    const HandPoint& b = *it;
    const HandPoint& a = *(it - 1);
    double w = (t - a.t) / (b.t - a.t);
    return {a.x + w * (b.x - a.x), a.y + w * (b.y - a.y)};
}

void Trajectory::validate(double max_speed) const {
    for (std::size_t i = 1; i < points.size(); ++i) {
        const auto& a = points[i - 1];
        const auto& b = points[i];
        if (b.t <= a.t) throw GeometryError("trajectory timestamps must strictly increase");
        double v = dist(a.position(), b.position()) / (b.t - a.t);
        if (v > max_speed * (1.0 + 1e-9))
            throw GeometryError("trajectory exceeds maximum hand speed");
    }
}

double path_length(const Scene& scene, Point2 hand, Link link) {
    return norm(hand) + dist(hand, scene.rx_position(link));
}

Point2 path_length_gradient(const Scene& scene, Point2 hand, Link link) {
    double r0 = norm(hand);
    Point2 rx = scene.rx_position(link);
    double r1 = dist(hand, rx);
    Point2 g{0.0, 0.0};
    if (r0 > 1e-12) g = g + (1.0 / r0) * hand;
    if (r1 > 1e-12) g = g + (1.0 / r1) * (hand - rx);
    return g;
}

double arrival_angle(const Scene& scene, Point2 source, Link link) {
    Point2 rx = scene.rx_position(link);
    Point2 w = source - rx;
    double n = norm(w);
    if (n < 1e-12) return 0.0;
    // array axis: RX1 along +y, RX2 along +x (broadside at the TX)
    double along = (link == Link::Rx1) ? w.y / n : w.x / n;
    along = std::clamp(along, -1.0, 1.0);
    return std::asin(along);
}

namespace {

struct Residual {
    double f1, f2;
};

Residual ellipse_residual(double p, double q, const Scene& scene, Point2 h) {
    return {path_length(scene, h, Link::Rx1) - p,
            path_length(scene, h, Link::Rx2) - q};
}

double sq(double v) { return v * v; }

// Point on the (TX, RX1, sum p) ellipse at parameter t in (0, pi); y > 0.
Point2 ellipse1_point(double p, double l1, double t) {
    double a = p / 2.0;
    double b = std::sqrt(std::max(a * a - sq(l1 / 2.0), 0.0));
    return {l1 / 2.0 + a * std::cos(t), b * std::sin(t)};
}

} // namespace

Point2 solve_position(double p, double q, const Scene& scene, Point2 guess) {
    if (p <= scene.l1 || q <= scene.l2)
        throw DegenerateError("path length does not exceed LoS");

    auto newton = [&](Point2 h, double tol, int iters, bool* ok) -> Point2 {
        *ok = false;
        for (int it = 0; it < iters; ++it) {
            Residual r = ellipse_residual(p, q, scene, h);
            double cost = sq(r.f1) + sq(r.f2);
            if (cost < tol * tol) {
                *ok = true;
                return h;
            }
            Point2 g1 = path_length_gradient(scene, h, Link::Rx1);
            Point2 g2 = path_length_gradient(scene, h, Link::Rx2);
            double det = g1.x * g2.y - g1.y * g2.x;
            if (std::abs(det) < 1e-14) break;
            double dx = (-r.f1 * g2.y + r.f2 * g1.y) / det;
            double dy = (-g1.x * r.f2 + g2.x * r.f1) / det;
            // backtracking damping
            double step = 1.0;
            Point2 next = h;
            for (int ls = 0; ls < 20; ++ls) {
                next = {h.x + step * dx, h.y + step * dy};
                if (next.x > 1e-9 && next.y > 1e-9) {
                    Residual rn = ellipse_residual(p, q, scene, next);
                    if (sq(rn.f1) + sq(rn.f2) < cost) break;
                }
                step *= 0.5;
            }
            h = next;
        }
        Residual r = ellipse_residual(p, q, scene, h);
        *ok = sq(r.f1) + sq(r.f2) < tol * tol;
        return h;
    };

    bool ok = false;
    Point2 h = newton(guess, 1e-9, 40, &ok);
    if (ok && h.x > 0.0 && h.y > 0.0) return h;

    // Fallback: scan the first ellipse for sign changes of the second
    // ellipse residual, bisect each bracket, keep the root nearest guess.
    const int n_scan = 400;
    auto g = [&](double t) {
        Point2 pt = ellipse1_point(p, scene.l1, t);
        return path_length(scene, pt, Link::Rx2) - q;
    };
    double best_d = 1e300;
    Point2 best{0, 0};
    bool found = false;
    double prev_t = 1e-6, prev_g = g(prev_t);
    for (int i = 1; i <= n_scan; ++i) {
        double t = 1e-6 + (M_PI - 2e-6) * i / n_scan;
        double gt = g(t);
        if ((prev_g < 0.0) != (gt < 0.0)) {
            double lo = prev_t, hi = t, glo = prev_g;
            for (int b = 0; b < 80; ++b) {
                double mid = 0.5 * (lo + hi);
                double gm = g(mid);
                if ((glo < 0.0) != (gm < 0.0)) hi = mid;
                else { lo = mid; glo = gm; }
            }
            Point2 root = ellipse1_point(p, scene.l1, 0.5 * (lo + hi));
            if (root.x > 0.0 && root.y > 0.0) {
                bool rok = false;
                root = newton(root, 1e-9, 20, &rok);
                if (rok) {
                    double d = dist(root, guess);
                    if (d < best_d) { best_d = d; best = root; found = true; }
                }
            }
        }
        prev_t = t;
        prev_g = gt;
    }
    if (!found) throw NoIntersectionError("ellipses do not intersect in the first quadrant");
    return best;
}

Point2 solve_position_least_squares(double p, double q, const Scene& scene,
                                    Point2 guess) {
    Point2 h = guess;
    if (h.x <= 1e-6) h.x = 1e-3;
    if (h.y <= 1e-6) h.y = 1e-3;
    double lambda = 1e-6;
    for (int it = 0; it < 60; ++it) {
        Residual r = ellipse_residual(p, q, scene, h);
        double cost = sq(r.f1) + sq(r.f2);
        Point2 g1 = path_length_gradient(scene, h, Link::Rx1);
        Point2 g2 = path_length_gradient(scene, h, Link::Rx2);
        // normal equations for the 2x2 Gauss-Newton step, damped
        double a11 = g1.x * g1.x + g2.x * g2.x + lambda;
        double a12 = g1.x * g1.y + g2.x * g2.y;
        double a22 = g1.y * g1.y + g2.y * g2.y + lambda;
        double b1 = -(g1.x * r.f1 + g2.x * r.f2);
        double b2 = -(g1.y * r.f1 + g2.y * r.f2);
        double det = a11 * a22 - a12 * a12;
        if (std::abs(det) < 1e-16) break;
        double dx = (b1 * a22 - b2 * a12) / det;
        double dy = (a11 * b2 - a12 * b1) / det;
        Point2 next{std::max(h.x + dx, 1e-6), std::max(h.y + dy, 1e-6)};
        Residual rn = ellipse_residual(p, q, scene, next);
        if (sq(rn.f1) + sq(rn.f2) < cost) {
            h = next;
            lambda = std::max(lambda * 0.5, 1e-9);
            if (sq(rn.f1) + sq(rn.f2) < 1e-20) break;
        } else {
            lambda *= 10.0;
            if (lambda > 1e6) break;
        }
    }
    return h;
}

double fresnel_boundary_point(int n, double los, double wavelength) {
    if (n < 1) throw GeometryError("Fresnel zone index must be >= 1");
    if (los <= 0.0) throw GeometryError("LoS must be positive");
    double total = (los + n * wavelength / 2.0) / 2.0;
    return std::sqrt(total * total - sq(los / 2.0));
}

} // namespace airtrace

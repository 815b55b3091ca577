#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "airtrace/phase_calib.hpp"
#include "airtrace/rng.hpp"

using namespace airtrace;

namespace {

constexpr double kRate = 300.0;

FusedSeries make_series(const std::vector<cplx>& z) {
    FusedSeries s;
    s.values = z;
    s.t.resize(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) s.t[i] = i / kRate;
    return s;
}

// trace = center(t) + radius * e^{j*phase(t)}
struct Synth {
    std::vector<cplx> trace;
    std::vector<double> phase;   // generating phase
    std::vector<cplx> center;    // generating center
};

Synth spiral(int n, double inc_per_sample, double radius, cplx center0,
             cplx drift_per_sample, double noise = 0.0, std::uint64_t seed = 1) {
    Synth s;
    Rng rng(seed);
    for (int i = 0; i < n; ++i) {
        double ph = 0.3 + inc_per_sample * i;
        cplx c = center0 + static_cast<double>(i) * drift_per_sample;
        cplx v = c + radius * std::polar(1.0, ph);
        if (noise > 0.0) v += cplx{rng.normal(noise), rng.normal(noise)};
        s.trace.push_back(v);
        s.phase.push_back(ph);
        s.center.push_back(c);
    }
    return s;
}

std::vector<cplx> translated_by_mean(const std::vector<cplx>& z, cplx* mean_out = nullptr) {
    cplx mean{0.0, 0.0};
    for (const auto& v : z) mean += v;
    mean /= static_cast<double>(z.size());
    std::vector<cplx> out;
    out.reserve(z.size());
    for (const auto& v : z) out.push_back(v - mean);
    if (mean_out) *mean_out = mean;
    return out;
}

double phase_rms(const std::vector<double>& got, const std::vector<double>& truth) {
    REQUIRE(got.size() == truth.size());
    // both sequences are relative; align at the first sample
    double off = got[0] - truth[0];
    double acc = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        double d = got[i] - truth[i] - off;
        acc += d * d;
    }
    return std::sqrt(acc / got.size());
}

std::vector<double> arg_of(const std::vector<cplx>& z) {
    std::vector<double> a;
    a.reserve(z.size());
    for (const auto& v : z) a.push_back(std::arg(v));
    return a;
}

} // namespace

TEST_CASE("pure receding motion is one clockwise sub-segment") {
    Synth s = spiral(600, -0.12, 0.04, {1.0, -0.5}, {0.0, 0.0});
    std::vector<RotationSubSegment> subs = split_by_rotation(make_series(s.trace));
    REQUIRE(subs.size() == 1);
    CHECK(subs[0].sign == RotationSign::Clockwise);
    CHECK(subs[0].begin == 0);
    CHECK(subs[0].end == s.trace.size());
}

TEST_CASE("approach then recede splits into (ccw, cw)") {
    std::vector<cplx> z;
    double ph = 0.0;
    cplx off{1.0, -0.5};
    for (int i = 0; i < 450; ++i) {
        ph += 0.12;
        z.push_back(off + 0.04 * std::polar(1.0, ph));
    }
    for (int i = 0; i < 450; ++i) {
        ph -= 0.12;
        z.push_back(off + 0.04 * std::polar(1.0, ph));
    }
    std::vector<RotationSubSegment> subs = split_by_rotation(make_series(z));
    REQUIRE(subs.size() == 2);
    CHECK(subs[0].sign == RotationSign::CounterClockwise);
    CHECK(subs[1].sign == RotationSign::Clockwise);
    // the flip is near the middle
    CHECK(std::abs(static_cast<double>(subs[0].end) - 450.0) < 60.0);
}

TEST_CASE("a brief 0.03 s jitter reversal does not split the segment") {
    std::vector<cplx> z;
    double ph = 0.0;
    cplx off{1.0, -0.5};
    for (int i = 0; i < 900; ++i) {
        ph += (i >= 440 && i < 450) ? -0.12 : 0.12; // 10-sample reversal
        z.push_back(off + 0.04 * std::polar(1.0, ph));
    }
    std::vector<RotationSubSegment> subs = split_by_rotation(make_series(z));
    CHECK(subs.size() == 1);
}

TEST_CASE("three exact turns decompose into three circles centered at the origin") {
    // the k-th circle closes when the cumulative phase crosses 2*pi*k, so
    // the trace must include the closing sample of the last turn
    const int per_turn = 360;
    std::vector<cplx> z;
    for (int i = 0; i <= 3 * per_turn; ++i)
        z.push_back(std::polar(1.0, 0.1 + 2.0 * M_PI * i / per_turn));
    CircleDecomposition d = decompose_circles(z);
    REQUIRE(d.circles.size() == 3);
    // each circle carries one duplicated closing sample, biasing its mean
    // by at most radius / samples_per_circle
    for (const auto& c : d.centers) CHECK(std::abs(c) < 1.5 / per_turn);
    // the pieces partition the trace
    std::size_t covered = (d.leading_arc.end - d.leading_arc.begin) +
                          (d.trailing_arc.end - d.trailing_arc.begin);
    for (const auto& r : d.circles) covered += r.end - r.begin;
    CHECK(covered == z.size());
}

TEST_CASE("translated circle: mean subtraction recovers near-zero centers") {
    const int per_turn = 300;
    const double radius = 0.7;
    std::vector<cplx> z;
    for (int i = 0; i <= 2 * per_turn; ++i)
        z.push_back(cplx{3.0, -2.0} + radius * std::polar(1.0, 0.2 + 2.0 * M_PI * i / per_turn));
    std::vector<cplx> tr = translated_by_mean(z);
    CircleDecomposition d = decompose_circles(tr);
    REQUIRE(d.circles.size() == 2);
    double bound = radius / std::sqrt(static_cast<double>(per_turn));
    for (const auto& c : d.centers) CHECK(std::abs(c) < bound);
}

TEST_CASE("motion spanning less than two pi yields zero circles") {
    std::vector<cplx> z;
    for (int i = 0; i < 200; ++i)
        z.push_back(std::polar(1.0, 0.005 * i)); // one radian total
    CircleDecomposition d = decompose_circles(z);
    CHECK(d.circles.empty());
}

TEST_CASE("drifting spiral: circle centers reproduce the drift line within 10%") {
    const int per_turn = 314; // 0.02 rad per sample
    const int turns = 5;
    const double radius = 0.05;
    const double drift_per_rev = 0.3 * radius;
    cplx drift_step = cplx{drift_per_rev / per_turn, 0.4 * drift_per_rev / per_turn};
    Synth s = spiral(turns * per_turn, 2.0 * M_PI / per_turn, radius, {1.0, -0.5},
                     drift_step);
    cplx mean;
    std::vector<cplx> tr = translated_by_mean(s.trace, &mean);
    CircleDecomposition d = decompose_circles(tr);
    REQUIRE(d.circles.size() >= 4);
    double total_drift = std::abs(drift_step) * s.trace.size();
    for (std::size_t k = 0; k < d.circles.size(); ++k) {
        std::size_t mid = (d.circles[k].begin + d.circles[k].end) / 2;
        cplx recovered = d.centers[k] + mean;
        CHECK(std::abs(recovered - s.center[mid]) < 0.10 * total_drift);
    }
}

TEST_CASE("concentric input passes through eliminate_static almost unchanged") {
    const int per_turn = 300;
    const double radius = 0.05;
    std::vector<cplx> z;
    for (int i = 0; i < 3 * per_turn; ++i)
        z.push_back(radius * std::polar(1.0, 0.15 + 2.0 * M_PI * i / per_turn));
    CircleDecomposition d = decompose_circles(z);
    std::vector<cplx> out = eliminate_static(d, z);
    REQUIRE(out.size() == z.size());
    // the only change is the discretization bias of the circle centers
    // (one duplicated closing sample per circle)
    for (std::size_t i = 0; i < z.size(); ++i)
        CHECK(std::abs(out[i] - z[i]) < 2.0 * radius / per_turn);
}

TEST_CASE("spiral elimination restores the generating phase; skipping it does not") {
    const int per_turn = 314;
    const double radius = 0.05;
    cplx drift_step{0.3 * radius / per_turn, 0.12 * radius / per_turn};
    Synth s = spiral(5 * per_turn, 2.0 * M_PI / per_turn, radius, {1.0, -0.5},
                     drift_step);
    std::vector<cplx> tr = translated_by_mean(s.trace);
    CircleDecomposition d = decompose_circles(tr);
    std::vector<cplx> cal = eliminate_static(d, tr);

    double rms_with = phase_rms(unwrap(arg_of(cal)), s.phase);
    double rms_without = phase_rms(unwrap(arg_of(tr)), s.phase);
    CHECK(rms_with <= 0.15);
    CHECK(rms_without > 0.5);
}

TEST_CASE("unwrap: monotone small increments pass through unchanged") {
    std::vector<double> w;
    for (int i = 0; i < 20; ++i) w.push_back(0.1 * i);
    std::vector<double> u = unwrap(w);
    for (int i = 0; i < 20; ++i) CHECK(u[i] == doctest::Approx(0.1 * i).epsilon(1e-12));
}

TEST_CASE("unwrap recovers k revolutions from repeatedly wrapping phase") {
    const int n = 500;
    std::vector<double> truth, wrapped;
    for (int i = 0; i < n; ++i) {
        double ph = 0.12 * i; // ~9.5 revolutions
        truth.push_back(ph);
        wrapped.push_back(std::arg(std::polar(1.0, ph)));
    }
    std::vector<double> u = unwrap(wrapped);
    for (int i = 0; i < n; ++i)
        CHECK(u[i] - u[0] == doctest::Approx(truth[i] - truth[0]).epsilon(1e-9));
    CHECK(u.back() - u.front() == doctest::Approx(0.12 * (n - 1)).epsilon(1e-9));
}

TEST_CASE("unwrap after wrap is the identity for increments below pi") {
    Rng rng(21);
    std::vector<double> truth{0.4};
    for (int i = 0; i < 400; ++i)
        truth.push_back(truth.back() + rng.uniform(-3.0, 3.0));
    std::vector<double> wrapped;
    for (double ph : truth) wrapped.push_back(std::arg(std::polar(1.0, ph)));
    std::vector<double> u = unwrap(wrapped);
    for (std::size_t i = 0; i < truth.size(); ++i)
        CHECK(u[i] - u[0] == doctest::Approx(truth[i] - truth[0]).epsilon(1e-9));
}

TEST_CASE("calibrate_segment: drifting statics within the rate bound stay under 0.2 rad RMS") {
    // drift rate <= 0.5 x dynamic amplitude per second
    const double radius = 0.05;
    const double drift_rate = 0.5 * radius; // per second
    cplx drift_step = cplx{drift_rate / kRate, 0.3 * drift_rate / kRate};
    Synth s = spiral(900, 0.11, radius, {1.0, -0.5}, drift_step, 0.001, 5);
    FusedSeries series = make_series(s.trace);

    CalibratedSegment cal = calibrate_segment(series);
    CHECK(phase_rms(cal.phase.phase, s.phase) <= 0.2);

    CalibrationOptions off;
    off.eliminate_static_offsets = false;
    off.split_rotation_segments = false;
    CalibratedSegment raw = calibrate_segment(series, off);
    CHECK(phase_rms(raw.phase.phase, s.phase) > 0.2);
}

TEST_CASE("calibrate_segment is invariant to a constant complex offset") {
    Synth s = spiral(900, 0.11, 0.05, {1.0, -0.5}, {2e-5, 1e-5}, 0.001, 6);
    FusedSeries base = make_series(s.trace);
    FusedSeries shifted = base;
    for (auto& v : shifted.values) v += cplx{5.0, -3.0};

    CalibratedSegment a = calibrate_segment(base);
    CalibratedSegment b = calibrate_segment(shifted);
    REQUIRE(a.phase.phase.size() == b.phase.phase.size());
    for (std::size_t i = 0; i < a.phase.phase.size(); ++i)
        CHECK(std::abs(a.phase.phase[i] - b.phase.phase[i]) < 1e-6);
    CHECK(std::abs((b.static_offset - a.static_offset) - cplx{5.0, -3.0}) < 1e-9);
}

TEST_CASE("calibrated phase has no jump above 1.5 pi, including across joins") {
    // approach then recede with a drifting offset: exercises the splitter
    std::vector<cplx> z;
    double ph = 0.0;
    for (int i = 0; i < 900; ++i) {
        ph += (i < 450) ? 0.11 : -0.11;
        cplx c{1.0 + 2e-5 * i, -0.5 + 1e-5 * i};
        z.push_back(c + 0.05 * std::polar(1.0, ph));
    }
    CalibratedSegment cal = calibrate_segment(make_series(z));
    REQUIRE(cal.phase.phase.size() == z.size());
    for (std::size_t i = 1; i < cal.phase.phase.size(); ++i)
        CHECK(std::abs(cal.phase.phase[i] - cal.phase.phase[i - 1]) <= kWrapJumpThreshold);
    CHECK(cal.sub_segments.size() == 2);
}

TEST_CASE("aliasing guard fires when increments exceed pi/2 per sample") {
    Synth fast = spiral(300, 2.0, 0.05, {1.0, -0.5}, {0.0, 0.0});
    CalibratedSegment cal = calibrate_segment(make_series(fast.trace));
    CHECK(cal.phase.aliasing_suspected);

    Synth slow = spiral(900, 0.11, 0.05, {1.0, -0.5}, {0.0, 0.0});
    CalibratedSegment ok = calibrate_segment(make_series(slow.trace));
    CHECK(!ok.phase.aliasing_suspected);
}

TEST_CASE("segments spanning less than two pi are flagged low confidence") {
    Synth arc = spiral(300, 0.004, 0.05, {1.0, -0.5}, {0.0, 0.0}); // 1.2 rad total
    CalibratedSegment cal = calibrate_segment(make_series(arc.trace));
    CHECK(cal.phase.low_confidence);

    Synth full = spiral(900, 0.11, 0.05, {1.0, -0.5}, {0.0, 0.0});
    CHECK(!calibrate_segment(make_series(full.trace)).phase.low_confidence);
}

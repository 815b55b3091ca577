#include "airtrace/phase_calib.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace airtrace {

namespace {

double median_dt(const std::vector<double>& t) {
    if (t.size() < 2) return 0.0;
    std::vector<double> dts(t.size() - 1);
    for (std::size_t i = 1; i < t.size(); ++i) dts[i - 1] = t[i] - t[i - 1];
    std::nth_element(dts.begin(), dts.begin() + dts.size() / 2, dts.end());
    return dts[dts.size() / 2];
}

std::vector<cplx> translated_trace(const FusedSeries& segment, cplx* mean_out) {
    cplx mean = std::accumulate(segment.values.begin(), segment.values.end(), cplx{0, 0});
    mean /= static_cast<double>(segment.size());
    if (mean_out) *mean_out = mean;
    std::vector<cplx> z(segment.size());
    for (std::size_t i = 0; i < segment.size(); ++i) z[i] = segment.values[i] - mean;
    return z;
}

std::vector<double> angular_increments(const std::vector<cplx>& z) {
    std::vector<double> inc(z.size() > 1 ? z.size() - 1 : 0);
    for (std::size_t i = 0; i + 1 < z.size(); ++i)
        inc[i] = std::arg(z[i + 1] * std::conj(z[i]));
    return inc;
}

std::vector<cplx> moving_average(const std::vector<cplx>& z, std::size_t window) {
    std::vector<cplx> out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        std::size_t lo = i >= window / 2 ? i - window / 2 : 0;
        std::size_t hi = std::min(z.size(), lo + window);
        cplx s{0.0, 0.0};
        for (std::size_t j = lo; j < hi; ++j) s += z[j];
        out[i] = s / static_cast<double>(hi - lo);
    }
    return out;
}

// Replaces the decomposition's centers with the sample means of `trace`
// over the same circle ranges (used when boundaries were detected on a
// detrended copy but the correction must come from the raw trace).
// Chord-length-weighted mean over one circle range. A plain sample mean is
// biased toward the slow side when the angular speed varies along the
// circle; arc-length weighting converges to the true center instead.
cplx circle_center(const std::vector<cplx>& trace, std::size_t begin, std::size_t end) {
    cplx sum{0.0, 0.0};
    double wsum = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
        double w = 0.0;
        if (i > begin) w += std::abs(trace[i] - trace[i - 1]);
        if (i + 1 < end) w += std::abs(trace[i + 1] - trace[i]);
        sum += w * trace[i];
        wsum += w;
    }
    if (wsum <= 0.0) {
        for (std::size_t i = begin; i < end; ++i) sum += trace[i];
        return sum / static_cast<double>(end - begin);
    }
    return sum / wsum;
}

void recenter(CircleDecomposition& d, const std::vector<cplx>& trace) {
    d.centers.clear();
    for (const auto& c : d.circles)
        d.centers.push_back(circle_center(trace, c.begin, c.end));
}

} // namespace

std::vector<RotationSubSegment> split_by_rotation(const FusedSeries& segment,
                                                  double smoothing_s,
                                                  double persistence_s) {
    std::vector<RotationSubSegment> out;
    if (segment.size() < 3) {
        out.push_back({0, segment.size(), RotationSign::CounterClockwise});
        return out;
    }
    std::vector<cplx> z = translated_trace(segment, nullptr);
    std::vector<double> inc = angular_increments(z);

    double dt = median_dt(segment.t);
    std::size_t smooth_n = dt > 0.0 ? std::max<std::size_t>(1, std::llround(smoothing_s / dt)) : 1;
    std::size_t persist_n = dt > 0.0 ? std::max<std::size_t>(1, std::llround(persistence_s / dt)) : 1;

    // centered moving average of the angular increments
    std::vector<double> smooth(inc.size());
    for (std::size_t i = 0; i < inc.size(); ++i) {
        std::size_t lo = i >= smooth_n / 2 ? i - smooth_n / 2 : 0;
        std::size_t hi = std::min(inc.size(), lo + smooth_n);
        double s = 0.0;
        for (std::size_t j = lo; j < hi; ++j) s += inc[j];
        smooth[i] = s / static_cast<double>(hi - lo);
    }

    // runs of constant sign; runs shorter than the persistence window are
    // absorbed into the preceding run
    struct Run {
        std::size_t begin, end;
        int sign;
    };
    std::vector<Run> runs;
    for (std::size_t i = 0; i < smooth.size(); ++i) {
        int s = smooth[i] >= 0.0 ? 1 : -1;
        if (!runs.empty() && runs.back().sign == s) {
            runs.back().end = i + 1;
        } else {
            runs.push_back({i, i + 1, s});
        }
    }
    std::vector<Run> merged;
    for (const auto& r : runs) {
        bool persistent = (r.end - r.begin) >= persist_n;
        if (merged.empty()) {
            merged.push_back(r);
        } else if (!persistent || merged.back().sign == r.sign) {
            merged.back().end = r.end;
        } else {
            merged.push_back(r);
        }
    }
    // a leading jitter run shorter than the persistence window joins its successor
    while (merged.size() > 1 &&
           (merged.front().end - merged.front().begin) < persist_n) {
        merged[1].begin = merged[0].begin;
        merged.erase(merged.begin());
    }

    for (std::size_t i = 0; i < merged.size(); ++i) {
        RotationSubSegment seg;
        seg.begin = merged[i].begin == 0 ? 0 : merged[i].begin + 1;
        seg.end = (i + 1 == merged.size()) ? segment.size() : merged[i].end + 1;
        seg.sign = merged[i].sign > 0 ? RotationSign::CounterClockwise
                                      : RotationSign::Clockwise;
        if (seg.end > seg.begin) out.push_back(seg);
    }
    if (out.empty()) out.push_back({0, segment.size(), RotationSign::CounterClockwise});
    return out;
}

CircleDecomposition decompose_circles(const std::vector<cplx>& translated) {
    CircleDecomposition d;
    const std::size_t n = translated.size();
    d.leading_arc = {0, 0};
    d.trailing_arc = {0, n};
    if (n < 3) return d;

    // cumulative phase relative to the first sample; each full 2*pi span
    // is one circle, the fractional remainder is the trailing arc
    std::vector<double> wrapped(n);
    for (std::size_t i = 0; i < n; ++i) wrapped[i] = std::arg(translated[i]);
    std::vector<double> unw = unwrap(wrapped);

    // absolute thresholds from the starting phase so that sample-step
    // overshoot does not accumulate across circles
    std::size_t start = 0;
    std::size_t count = 1;
    const double base = unw[0];
    for (std::size_t i = 1; i < n; ++i) {
        if (std::abs(unw[i] - base) >= 2.0 * M_PI * count - 1e-9) {
            d.circles.push_back({start, i + 1});
            start = i + 1;
            ++count;
        }
    }
    d.trailing_arc = {start, n};

    for (const auto& c : d.circles)
        d.centers.push_back(circle_center(translated, c.begin, c.end));
    return d;
}

std::vector<cplx> eliminate_static(const CircleDecomposition& decomp,
                                   const std::vector<cplx>& translated) {
    std::vector<cplx> out = translated;
    if (decomp.circles.empty()) return out;

    // anchor each circle's center at its midpoint sample; interpolate
    // between anchors, clamp outside (arcs get the first/last center)
    std::vector<std::size_t> anchor_idx;
    for (const auto& c : decomp.circles) anchor_idx.push_back((c.begin + c.end) / 2);

    std::size_t seg = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        cplx correction;
        if (i <= anchor_idx.front()) {
            correction = decomp.centers.front();
        } else if (i >= anchor_idx.back()) {
            correction = decomp.centers.back();
        } else {
            while (seg + 1 < anchor_idx.size() && anchor_idx[seg + 1] < i) ++seg;
            std::size_t a = anchor_idx[seg], b = anchor_idx[seg + 1];
            double w = static_cast<double>(i - a) / static_cast<double>(b - a);
            correction = decomp.centers[seg] + w * (decomp.centers[seg + 1] - decomp.centers[seg]);
        }
        out[i] -= correction;
    }
    return out;
}

std::vector<double> unwrap(const std::vector<double>& wrapped) {
    std::vector<double> out(wrapped.size());
    if (wrapped.empty()) return out;
    out[0] = wrapped[0];
    for (std::size_t i = 1; i < wrapped.size(); ++i) {
        // reduce each step into (-pi, pi]; this adjusts every jump beyond
        // the 1.5*pi wrap threshold and keeps unwrap(wrap(x)) == x for
        // all step sizes below pi
        double delta = wrapped[i] - wrapped[i - 1];
        delta -= 2.0 * M_PI * std::round(delta / (2.0 * M_PI));
        out[i] = out[i - 1] + delta;
    }
    return out;
}

CalibratedSegment calibrate_segment(const FusedSeries& segment,
                                    const CalibrationOptions& opts_in) {
    if (segment.size() < 2) throw PhaseCalibError("segment too short to calibrate");

    CalibratedSegment result;
    std::vector<cplx> z;
    if (opts_in.static_offset) {
        result.static_offset = *opts_in.static_offset;
        z.resize(segment.size());
        for (std::size_t i = 0; i < segment.size(); ++i)
            z[i] = segment.values[i] - result.static_offset;
    } else {
        z = translated_trace(segment, &result.static_offset);
    }

    // Circle-based calibration needs several samples per revolution; when
    // the sampling is too sparse the moving averages and circle centers
    // operate on aliased geometry and destroy the signal, so fall back to
    // plain unwrapping of the mean-translated trace.
    CalibrationOptions opts = opts_in;
    {
        std::vector<double> incs = angular_increments(z);
        for (double& v : incs) v = std::abs(v);
        if (!incs.empty()) {
            std::nth_element(incs.begin(), incs.begin() + incs.size() / 2, incs.end());
            if (incs[incs.size() / 2] > 2.0 * M_PI / 8.0) {
                opts.eliminate_static_offsets = false;
                opts.split_rotation_segments = false;
            }
        }
    }

    // Detrended copy: reveals the winding even when the drifting offset
    // dominates the rotation radius. Used for boundary/sign detection
    // only; corrections always come from the raw trace.
    std::vector<cplx> boot = z;
    if (opts.eliminate_static_offsets) {
        double dt = median_dt(segment.t);
        std::size_t w_long = dt > 0.0
                                 ? std::max<std::size_t>(3, std::llround(opts.bootstrap_s / dt))
                                 : 3;
        std::size_t w_short = dt > 0.0
                                  ? std::max<std::size_t>(1, std::llround(opts.smoothing_s / dt))
                                  : 1;
        // short average suppresses sample noise (otherwise it fabricates
        // winding where the true rotation is slow), long average removes
        // the drifting offset
        std::vector<cplx> smooth_z = moving_average(z, w_short);
        std::vector<cplx> avg = moving_average(z, w_long);
        for (std::size_t i = 0; i < z.size(); ++i) boot[i] = smooth_z[i] - avg[i];
    }

    if (opts.split_rotation_segments) {
        FusedSeries detrended = segment;
        detrended.values = boot;
        result.sub_segments =
            split_by_rotation(detrended, opts.smoothing_s, opts.persistence_s);
    } else {
        result.sub_segments.push_back({0, segment.size(), RotationSign::CounterClockwise});
    }

    result.phase.t = segment.t;
    result.phase.rx_id = segment.rx_id;
    result.phase.phase.reserve(segment.size());
    result.calibrated.reserve(segment.size());

    double join_offset = 0.0;
    bool first = true;
    for (const auto& sub : result.sub_segments) {
        std::vector<cplx> zs(z.begin() + sub.begin, z.begin() + sub.end);
        std::vector<cplx> cal = zs;
        if (opts.eliminate_static_offsets) {
            double scale = 0.0;
            for (const auto& v : zs) scale = std::max(scale, std::abs(v));
            // First detection: prefer whichever of the raw and detrended
            // traces exposes more full circles, but take the centers from
            // the raw trace. Then re-decompose the centered trace until
            // the residual centers are negligible.
            for (int iter = 0; iter < 8; ++iter) {
                CircleDecomposition decomp = decompose_circles(cal);
                if (iter == 0) {
                    std::vector<cplx> bs(boot.begin() + sub.begin, boot.begin() + sub.end);
                    CircleDecomposition alt = decompose_circles(bs);
                    if (alt.circles.size() > decomp.circles.size()) {
                        decomp = std::move(alt);
                        recenter(decomp, cal);
                    }
                }
                if (decomp.circles.empty()) {
                    if (iter == 0) result.phase.low_confidence = true;
                    break;
                }
                cal = eliminate_static(decomp, cal);
                double worst = 0.0;
                for (const auto& c : decomp.centers) worst = std::max(worst, std::abs(c));
                if (worst < 1e-3 * scale) break;
            }
        }
        std::vector<double> wrapped(cal.size());
        for (std::size_t i = 0; i < cal.size(); ++i) wrapped[i] = std::arg(cal[i]);
        std::vector<double> unw = unwrap(wrapped);
        double shift = first ? 0.0 : join_offset - unw.front();
        for (std::size_t i = 0; i < unw.size(); ++i) {
            result.phase.phase.push_back(unw[i] + shift);
            result.calibrated.push_back(cal[i]);
        }
        join_offset = result.phase.phase.back();
        first = false;
    }

    // aliasing guard: sampling too slow for the motion speed
    std::vector<double> incs;
    incs.reserve(result.phase.phase.size());
    for (std::size_t i = 1; i < result.phase.phase.size(); ++i)
        incs.push_back(std::abs(result.phase.phase[i] - result.phase.phase[i - 1]));
    if (!incs.empty()) {
        std::nth_element(incs.begin(), incs.begin() + incs.size() / 2, incs.end());
        if (incs[incs.size() / 2] > M_PI / 2.0) result.phase.aliasing_suspected = true;
    }
    return result;
}

} // namespace airtrace

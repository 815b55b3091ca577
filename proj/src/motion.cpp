#include "airtrace/motion.hpp"

#include <algorithm>
#include <cmath>

namespace airtrace {

std::vector<double> window_stds(const FusedSeries& series, double window_s, double hop_s,
                                std::vector<double>* window_starts) {
    std::vector<double> stds;
    if (series.size() < 2) return stds;
    double t0 = series.t.front();
    double t_end = series.t.back();
    std::size_t lo = 0;
    for (double ws = t0; ws + window_s <= t_end + 1e-12; ws += hop_s) {
        while (lo < series.size() && series.t[lo] < ws) ++lo;
        std::size_t hi = lo;
        while (hi < series.size() && series.t[hi] <= ws + window_s + 1e-12) ++hi;
        if (hi - lo < 2) continue;
        double mean = 0.0;
        for (std::size_t i = lo; i < hi; ++i) mean += series.values[i].real();
        mean /= static_cast<double>(hi - lo);
        double var = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            double d = series.values[i].real() - mean;
            var += d * d;
        }
        var /= static_cast<double>(hi - lo);
        stds.push_back(std::sqrt(var));
        if (window_starts) window_starts->push_back(ws);
    }
    return stds;
}

double calibrate_static_std(const FusedSeries& series, const MotionDetectorConfig& cfg) {
    if (series.size() < 2 ||
        series.t.back() - series.t.front() < cfg.calibration_prefix_s - 1e-9)
        throw CalibrationMissingError("static calibration prefix too short");
    std::size_t n = 0;
    double prefix_end = series.t.front() + cfg.calibration_prefix_s;
    while (n < series.size() && series.t[n] <= prefix_end) ++n;
    FusedSeries prefix = series.slice(0, n);
    std::vector<double> stds = window_stds(prefix, cfg.window_s, cfg.hop_s);
    if (stds.empty()) throw CalibrationMissingError("no calibration windows");
    std::nth_element(stds.begin(), stds.begin() + stds.size() / 2, stds.end());
    return stds[stds.size() / 2];
}

namespace {

struct Interval {
    double a, b;
    Link link;
};

} // namespace

std::vector<MotionSegment> detect_motion(const std::vector<FusedSeries>& series_per_link,
                                         const std::vector<double>& static_std_per_link,
                                         const MotionDetectorConfig& cfg) {
    if (series_per_link.size() != static_std_per_link.size())
        throw CalibrationMissingError("one baseline per link required");

    std::vector<Interval> moving;
    for (std::size_t li = 0; li < series_per_link.size(); ++li) {
        const auto& series = series_per_link[li];
        std::vector<double> starts;
        std::vector<double> stds = window_stds(series, cfg.window_s, cfg.hop_s, &starts);
        double threshold = cfg.threshold_mult * static_std_per_link[li];
        std::optional<Interval> open;
        for (std::size_t w = 0; w < stds.size(); ++w) {
            bool hot = stds[w] > threshold;
            if (hot) {
                double a = starts[w];
                double b = starts[w] + cfg.window_s;
                if (open && a <= open->b + 1e-12) {
                    open->b = b;
                } else {
                    if (open) moving.push_back(*open);
                    open = Interval{a, b, series.rx_id};
                }
            }
        }
        if (open) moving.push_back(*open);
    }

    std::sort(moving.begin(), moving.end(),
              [](const Interval& x, const Interval& y) { return x.a < y.a; });

    std::vector<MotionSegment> segments;
    for (const auto& iv : moving) {
        if (!segments.empty() && iv.a <= segments.back().end_t + cfg.merge_gap_s) {
            segments.back().end_t = std::max(segments.back().end_t, iv.b);
            segments.back().rx_support.insert(iv.link);
        } else {
            MotionSegment seg;
            seg.start_t = iv.a;
            seg.end_t = iv.b;
            seg.rx_support.insert(iv.link);
            segments.push_back(seg);
        }
    }
    std::erase_if(segments, [&](const MotionSegment& s) {
        return s.end_t - s.start_t < cfg.window_s - 1e-12;
    });
    return segments;
}

std::vector<MotionSegment> detect_motion(const std::vector<FusedSeries>& series_per_link,
                                         const MotionDetectorConfig& cfg) {
    std::vector<double> baselines;
    baselines.reserve(series_per_link.size());
    for (const auto& s : series_per_link)
        baselines.push_back(calibrate_static_std(s, cfg));
    return detect_motion(series_per_link, baselines, cfg);
}

} // namespace airtrace

#include "airtrace/denoise.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace airtrace {

FusedSeries FusedSeries::slice(std::size_t begin, std::size_t end) const {
    FusedSeries out;
    out.rx_id = rx_id;
    out.t.assign(t.begin() + begin, t.begin() + end);
    out.values.assign(values.begin() + begin, values.begin() + end);
    return out;
}

RatioSeries slice(const RatioSeries& series, std::size_t begin, std::size_t end) {
    RatioSeries out;
    out.rx_id = series.rx_id;
    out.t.assign(series.t.begin() + begin, series.t.begin() + end);
    out.values.resize(series.values.size());
    for (std::size_t k = 0; k < series.values.size(); ++k)
        out.values[k].assign(series.values[k].begin() + begin, series.values[k].begin() + end);
    if (!series.flagged.empty())
        out.flagged.assign(series.flagged.begin() + begin, series.flagged.begin() + end);
    return out;
}

RatioSeries complex_ratio(const std::vector<CsiFrame>& frames,
                          int antenna_a, int antenna_b, double eps_scale) {
    if (frames.empty()) throw DenoiseError("empty frame stream");
    const int k = frames.front().num_subcarriers;
    const std::size_t n = frames.size();
    for (const auto& f : frames) {
        if (antenna_a >= f.num_antennas || antenna_b >= f.num_antennas)
            throw DenoiseError("antenna index out of range");
    }

    // median denominator magnitude over the whole stream
    std::vector<double> mags;
    mags.reserve(n * k);
    for (const auto& f : frames)
        for (int s = 0; s < k; ++s) mags.push_back(std::abs(f.at(antenna_b, s)));
    std::nth_element(mags.begin(), mags.begin() + mags.size() / 2, mags.end());
    double eps = eps_scale * mags[mags.size() / 2];

    RatioSeries out;
    out.rx_id = frames.front().rx_id;
    out.t.resize(n);
    out.flagged.assign(n, false);
    out.values.assign(k, std::vector<cplx>(n));
    for (std::size_t i = 0; i < n; ++i) {
        out.t[i] = frames[i].t;
        for (int s = 0; s < k; ++s) {
            cplx den = frames[i].at(antenna_b, s);
            if (std::abs(den) < eps) {
                out.flagged[i] = true;
                out.values[s][i] = cplx{std::nan(""), std::nan("")};
            } else {
                out.values[s][i] = frames[i].at(antenna_a, s) / den;
            }
        }
    }

    // interpolate flagged samples per subcarrier from valid neighbors
    for (int s = 0; s < k; ++s) {
        auto& v = out.values[s];
        for (std::size_t i = 0; i < n; ++i) {
            if (!out.flagged[i]) continue;
            std::size_t lo = i, hi = i;
            while (lo > 0 && out.flagged[lo]) --lo;
            while (hi + 1 < n && out.flagged[hi]) ++hi;
            bool lo_ok = !out.flagged[lo];
            bool hi_ok = !out.flagged[hi];
            if (lo_ok && hi_ok) {
                double w = (out.t[i] - out.t[lo]) / (out.t[hi] - out.t[lo]);
                v[i] = v[lo] + w * (v[hi] - v[lo]);
            } else if (lo_ok) {
                v[i] = v[lo];
            } else if (hi_ok) {
                v[i] = v[hi];
            } else {
                v[i] = cplx{1.0, 0.0};
            }
        }
    }
    return out;
}

namespace {

Eigen::MatrixXcd to_matrix(const RatioSeries& series) {
    const auto n = static_cast<Eigen::Index>(series.size());
    const auto k = static_cast<Eigen::Index>(series.subcarriers());
    Eigen::MatrixXcd x(n, k);
    for (Eigen::Index c = 0; c < k; ++c)
        for (Eigen::Index r = 0; r < n; ++r) x(r, c) = series.values[c][r];
    return x;
}

} // namespace

FusedSeries pca_fuse(const RatioSeries& series) {
    if (series.size() < 2) throw DegenerateInputError("need at least two samples");
    if (series.subcarriers() < 2) throw DegenerateInputError("need at least two subcarriers");

    Eigen::MatrixXcd x = to_matrix(series);
    Eigen::RowVectorXcd mean = x.colwise().mean();
    Eigen::MatrixXcd fluct = x.rowwise() - mean;
    Eigen::MatrixXcd cov = fluct.adjoint() * fluct;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(cov);
    Eigen::VectorXcd w = eig.eigenvectors().col(cov.cols() - 1);

    // phase convention: correlation of the component with the mean
    // subcarrier series is real non-negative
    Eigen::VectorXcd m_series = x.rowwise().mean();
    Eigen::VectorXcd proj = x * w.conjugate();
    cplx corr = (m_series.adjoint() * proj)(0, 0);
    if (std::abs(corr) > 0.0) {
        cplx phase = corr / std::abs(corr);
        w *= phase; // rotates both proj and the reconstruction weight
        proj *= std::conj(phase);
    }

    // rank-1 reconstruction averaged across subcarriers; keeps the static
    // offset in the trace and reproduces rank-1 inputs exactly
    cplx weight = w.mean();
    FusedSeries out;
    out.rx_id = series.rx_id;
    out.t = series.t;
    out.values.resize(series.size());
    for (std::size_t i = 0; i < series.size(); ++i)
        out.values[i] = proj(static_cast<Eigen::Index>(i)) * weight;
    return out;
}

FusedSeries mean_fuse(const RatioSeries& series) {
    if (series.size() < 1 || series.subcarriers() < 1)
        throw DegenerateInputError("empty series");
    FusedSeries out;
    out.rx_id = series.rx_id;
    out.t = series.t;
    out.values.assign(series.size(), cplx{0.0, 0.0});
    for (const auto& col : series.values)
        for (std::size_t i = 0; i < col.size(); ++i) out.values[i] += col[i];
    for (auto& v : out.values) v /= static_cast<double>(series.subcarriers());
    return out;
}

} // namespace airtrace

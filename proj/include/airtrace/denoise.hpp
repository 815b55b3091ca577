#pragma once

#include <vector>

#include "airtrace/channel.hpp"

namespace airtrace {

struct DenoiseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateInputError : DenoiseError {
    using DenoiseError::DenoiseError;
};

// Per-link complex ratio time series: one column per subcarrier before
// PCA fusion, a single column after.
struct RatioSeries {
    std::vector<double> t;
    std::vector<std::vector<cplx>> values; // values[k][n], subcarrier-major
    Link rx_id = Link::Rx1;
    std::vector<bool> flagged; // near-zero-denominator samples (interpolated)

    std::size_t size() const { return t.size(); }
    std::size_t subcarriers() const { return values.size(); }
};

struct FusedSeries {
    std::vector<double> t;
    std::vector<cplx> values;
    Link rx_id = Link::Rx1;

    std::size_t size() const { return t.size(); }
    FusedSeries slice(std::size_t begin, std::size_t end) const;
};

// out[k][n] = csi[a1,k] / csi[a2,k]. Samples whose denominator magnitude
// falls below eps_scale * (stream median magnitude) are flagged and
// linearly interpolated from neighbors.
RatioSeries complex_ratio(const std::vector<CsiFrame>& frames,
                          int antenna_a = 0, int antenna_b = 1,
                          double eps_scale = 1e-6);

// Projects the K-subcarrier series onto the first principal direction of
// the complex covariance across subcarriers and evaluates the rank-1
// reconstruction averaged over subcarriers, so the static offset survives
// and identical subcarriers reproduce exactly.
FusedSeries pca_fuse(const RatioSeries& series);

// Subcarrier average; used when PCA fusion is toggled off.
FusedSeries mean_fuse(const RatioSeries& series);

RatioSeries slice(const RatioSeries& series, std::size_t begin, std::size_t end);

} // namespace airtrace

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace spear {

/// Univariate time series: strictly increasing time offsets and finite values.
struct TimeSeries {
    std::string id;
    std::vector<double> timestamps;
    std::vector<double> values;

    std::size_t length() const { return values.size(); }

    /// Throws DataError if the invariants do not hold (empty, length mismatch,
    /// non-finite value, non-increasing timestamps).
    void validate() const;
};

/// Min/max recorded when a scaling was fit, so later windows (and test data)
/// map through the same affine transform.
struct ScaleParams {
    double min = 0.0;
    double max = 0.0;
};

/// Discrete token sequence for one window, ready for the model.
struct QuantizedWindow {
    std::vector<int> tokens;      // each in [0, n_bins)
    int n_bins = 0;
    std::vector<bool> mask;       // true = real position, false = padding
    ScaleParams scale;
    int label = 0;                // binary window label
    std::string source_id;

    std::size_t real_count() const;
};

/// Min-max scale to [0,1]. Constant series map to all zeros.
std::pair<std::vector<double>, ScaleParams> minmax_scale(const TimeSeries& series);

/// Apply previously fit ScaleParams; out-of-range results clamp to [0,1].
std::vector<double> apply_scale(const std::vector<double>& values, const ScaleParams& scale);

/// q = min(floor(v*N), N-1) over uniform bins. Values are clamped to [0,1]
/// first (train-time ScaleParams applied to test data can fall outside).
std::vector<int> quantize(const std::vector<double>& scaled, int n_bins);

/// Inverse map for inspection: bin center pushed back through the scaling.
double dequantize(int token, int n_bins, const ScaleParams& scale);

/// Fixed-size sliding windows at offsets 0, stride, 2*stride, ... Series
/// shorter than `size` give an empty list. With include_tail, a final
/// end-aligned window is added when the stride pattern does not reach T.
std::vector<TimeSeries> window(const TimeSeries& series, std::size_t size, std::size_t stride,
                               bool include_tail = false);

/// Truncate to the first max_len tokens or pad at the end with token 0; the
/// mask marks real positions.
std::pair<std::vector<int>, std::vector<bool>> fit_to_length(const std::vector<int>& tokens,
                                                             std::size_t max_len);

}  // namespace spear

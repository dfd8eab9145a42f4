#include "spear/series.hpp"

#include <algorithm>
#include <cmath>

#include "spear/errors.hpp"

namespace spear {

void TimeSeries::validate() const {
    if (values.empty()) throw DataError("series '" + id + "': empty");
    if (values.size() != timestamps.size())
        throw DataError("series '" + id + "': values/timestamps length mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i]))
            throw DataError("series '" + id + "': non-finite value at index " + std::to_string(i));
    }
    for (std::size_t i = 1; i < timestamps.size(); ++i) {
        if (!(timestamps[i] > timestamps[i - 1]))
            throw DataError("series '" + id + "': timestamps not strictly increasing at index " +
                            std::to_string(i));
    }
}

std::size_t QuantizedWindow::real_count() const {
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
}

std::pair<std::vector<double>, ScaleParams> minmax_scale(const TimeSeries& series) {
    if (series.values.empty()) throw DataError("minmax_scale: empty series '" + series.id + "'");
    for (std::size_t i = 0; i < series.values.size(); ++i) {
        if (!std::isfinite(series.values[i]))
            throw DataError("minmax_scale: non-finite value at index " + std::to_string(i) +
                            " in series '" + series.id + "'");
    }
    const auto [lo, hi] = std::minmax_element(series.values.begin(), series.values.end());
    ScaleParams params{*lo, *hi};
    std::vector<double> scaled = apply_scale(series.values, params);
    return {std::move(scaled), params};
}

std::vector<double> apply_scale(const std::vector<double>& values, const ScaleParams& scale) {
    std::vector<double> out(values.size());
    const double range = scale.max - scale.min;
    for (std::size_t i = 0; i < values.size(); ++i) {
        double v = range > 0.0 ? (values[i] - scale.min) / range : 0.0;
        out[i] = std::clamp(v, 0.0, 1.0);
    }
    return out;
}

std::vector<int> quantize(const std::vector<double>& scaled, int n_bins) {
    if (n_bins < 2) throw ConfigError("quantize: n_bins must be >= 2, got " + std::to_string(n_bins));
    std::vector<int> tokens(scaled.size());
    for (std::size_t i = 0; i < scaled.size(); ++i) {
        const double v = std::clamp(scaled[i], 0.0, 1.0);
        int q = static_cast<int>(std::floor(v * n_bins));
        tokens[i] = std::min(q, n_bins - 1);
    }
    return tokens;
}

double dequantize(int token, int n_bins, const ScaleParams& scale) {
    if (n_bins < 2) throw ConfigError("dequantize: n_bins must be >= 2");
    if (token < 0 || token >= n_bins)
        throw DataError("dequantize: token " + std::to_string(token) + " outside [0, " +
                        std::to_string(n_bins) + ")");
    return scale.min + (scale.max - scale.min) * (token + 0.5) / n_bins;
}

std::vector<TimeSeries> window(const TimeSeries& series, std::size_t size, std::size_t stride,
                               bool include_tail) {
    if (size < 1) throw ConfigError("window: size must be >= 1");
    if (stride < 1) throw ConfigError("window: stride must be >= 1");
    std::vector<TimeSeries> out;
    const std::size_t total = series.length();
    if (total < size) return out;

    auto slice = [&](std::size_t start) {
        TimeSeries w;
        w.id = series.id + ":" + std::to_string(start);
        w.timestamps.assign(series.timestamps.begin() + start, series.timestamps.begin() + start + size);
        w.values.assign(series.values.begin() + start, series.values.begin() + start + size);
        return w;
    };

    std::size_t last_start = 0;
    for (std::size_t start = 0; start + size <= total; start += stride) {
        out.push_back(slice(start));
        last_start = start;
    }
    if (include_tail && last_start + size < total) out.push_back(slice(total - size));
    return out;
}

std::pair<std::vector<int>, std::vector<bool>> fit_to_length(const std::vector<int>& tokens,
                                                             std::size_t max_len) {
    if (max_len < 1) throw ConfigError("fit_to_length: max_len must be >= 1");
    std::vector<int> out;
    std::vector<bool> mask;
    const std::size_t keep = std::min(tokens.size(), max_len);
    out.assign(tokens.begin(), tokens.begin() + keep);
    mask.assign(keep, true);
    out.resize(max_len, 0);
    mask.resize(max_len, false);
    return {std::move(out), std::move(mask)};
}

}  // namespace spear

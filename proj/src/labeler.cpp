#include "spear/labeler.hpp"

#include <cmath>

#include "spear/errors.hpp"
#include "spear/log.hpp"
#include "spear/stats.hpp"

namespace spear {

const char* to_string(AnomalyKind kind) {
    switch (kind) {
        case AnomalyKind::MonotonicTrend: return "MonotonicTrend";
        case AnomalyKind::SuddenSpike: return "SuddenSpike";
        case AnomalyKind::SuddenShift: return "SuddenShift";
        case AnomalyKind::VolatilityChange: return "VolatilityChange";
        case AnomalyKind::PointRange: return "PointRange";
    }
    return "?";
}

std::optional<AnomalyKind> anomaly_kind_from_string(const std::string& name) {
    for (AnomalyKind k : {AnomalyKind::MonotonicTrend, AnomalyKind::SuddenSpike,
                          AnomalyKind::SuddenShift, AnomalyKind::VolatilityChange,
                          AnomalyKind::PointRange}) {
        if (name == to_string(k)) return k;
    }
    return std::nullopt;
}

bool detect_monotonic_trend(const TimeSeries& series, double slope_threshold, double p_threshold) {
    if (series.length() < 3) {
        log::debug("monotonic_trend not applicable for series '" + series.id + "' (T < 3)");
        return false;
    }
    const stats::RegressionFit fit = stats::linreg_slope_test(series.values);
    return std::fabs(fit.slope) > slope_threshold && fit.p_value < p_threshold;
}

bool detect_sudden_spike(const TimeSeries& series) {
    const std::size_t n = series.length();
    if (n < 3) {
        log::debug("sudden_spike not applicable for series '" + series.id + "' (T < 3)");
        return false;
    }
    std::vector<double> diffs(n - 1);
    for (std::size_t t = 1; t < n; ++t) diffs[t - 1] = std::fabs(series.values[t] - series.values[t - 1]);

    double mean = 0.0;
    for (double d : diffs) mean += d;
    mean /= static_cast<double>(diffs.size());
    double ss = 0.0;
    for (double d : diffs) ss += (d - mean) * (d - mean);
    const double sd = std::sqrt(ss / static_cast<double>(diffs.size() - 1));

    const double threshold = mean + 3.0 * sd;
    for (double d : diffs) {
        if (d > threshold) return true;
    }
    return false;
}

namespace {

template <typename Test>
bool split_scan(const TimeSeries& series, double p_threshold, Test test) {
    const std::size_t n = series.length();
    if (n < 4) return false;
    for (std::size_t k = 2; k + 2 <= n; ++k) {
        const std::vector<double> a(series.values.begin(), series.values.begin() + k);
        const std::vector<double> b(series.values.begin() + k, series.values.end());
        if (test(a, b).p_value < p_threshold) return true;
    }
    return false;
}

}  // namespace

bool detect_sudden_shift(const TimeSeries& series, double p_threshold) {
    if (series.length() < 4) {
        log::debug("sudden_shift not applicable for series '" + series.id + "' (T < 4)");
        return false;
    }
    return split_scan(series, p_threshold, stats::two_sample_t_test);
}

bool detect_volatility_change(const TimeSeries& series, double p_threshold) {
    if (series.length() < 4) {
        log::debug("volatility_change not applicable for series '" + series.id + "' (T < 4)");
        return false;
    }
    return split_scan(series, p_threshold, stats::levene_test);
}

std::vector<std::size_t> detect_point_anomalies(const TimeSeries& series, double low, double high) {
    if (low > high) throw ConfigError("detect_point_anomalies: low > high");
    std::vector<std::size_t> indices;
    for (std::size_t i = 0; i < series.length(); ++i) {
        const double v = series.values[i];
        if (v < low || v > high) indices.push_back(i);
    }
    return indices;
}

AnomalyLabelSet label_series(const TimeSeries& series, const LabelerConfig& config) {
    AnomalyLabelSet labels;
    labels.series_id = series.id;

    const TimeSeries* trend_input = &series;
    TimeSeries scaled_series;
    if (config.slope_on_scaled) {
        scaled_series = series;
        scaled_series.values = minmax_scale(series).first;
        trend_input = &scaled_series;
    }

    if (config.monotonic_trend &&
        detect_monotonic_trend(*trend_input, config.slope_threshold, config.p_threshold))
        labels.kinds.insert(AnomalyKind::MonotonicTrend);
    if (config.sudden_spike && detect_sudden_spike(series))
        labels.kinds.insert(AnomalyKind::SuddenSpike);
    if (config.sudden_shift && detect_sudden_shift(series, config.p_threshold))
        labels.kinds.insert(AnomalyKind::SuddenShift);
    if (config.volatility_change && detect_volatility_change(series, config.p_threshold))
        labels.kinds.insert(AnomalyKind::VolatilityChange);
    if (config.point_range) {
        labels.point_indices = detect_point_anomalies(series, config.point_low, config.point_high);
        if (!labels.point_indices.empty()) labels.kinds.insert(AnomalyKind::PointRange);
    }
    return labels;
}

}  // namespace spear

#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "spear/series.hpp"

namespace spear {

enum class AnomalyKind { MonotonicTrend, SuddenSpike, SuddenShift, VolatilityChange, PointRange };

const char* to_string(AnomalyKind kind);
std::optional<AnomalyKind> anomaly_kind_from_string(const std::string& name);

/// Union of the detectors that fired on one series.
struct AnomalyLabelSet {
    std::string series_id;
    std::set<AnomalyKind> kinds;
    std::vector<std::size_t> point_indices;  // only for PointRange

    bool is_anomalous() const { return !kinds.empty(); }
};

struct LabelerConfig {
    bool monotonic_trend = true;
    bool sudden_spike = true;
    bool sudden_shift = true;
    bool volatility_change = true;
    bool point_range = false;
    double point_low = 0.0;
    double point_high = 0.0;
    double slope_threshold = 0.01;
    bool slope_on_scaled = false;  // apply the slope threshold after min-max scaling
    double p_threshold = 0.05;
};

/// Linear-regression trend test: fires iff |slope| > threshold and p < 0.05
/// (both strict). Series shorter than 3 points are not applicable.
bool detect_monotonic_trend(const TimeSeries& series, double slope_threshold = 0.01,
                            double p_threshold = 0.05);

/// First-difference outlier test: fires iff any |x_t - x_{t-1}| strictly
/// exceeds mean + 3 * sample standard deviation of the differences.
bool detect_sudden_spike(const TimeSeries& series);

/// Split scan (k = 2 .. T-2): fires iff any split's two-sample t-test has
/// p < 0.05. Stops at the first hit.
bool detect_sudden_shift(const TimeSeries& series, double p_threshold = 0.05);

/// Same split scan with Levene's variance-equality test.
bool detect_volatility_change(const TimeSeries& series, double p_threshold = 0.05);

/// Indices with value strictly outside [low, high].
std::vector<std::size_t> detect_point_anomalies(const TimeSeries& series, double low, double high);

/// Runs every enabled detector independently and unions the results.
AnomalyLabelSet label_series(const TimeSeries& series, const LabelerConfig& config);

}  // namespace spear

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "spear/labeler.hpp"
#include "spear/rng.hpp"
#include "spear/series.hpp"

namespace spear {

/// Synthetic corpus settings. The defaults are the reference benchmark:
/// strong enough signals that every detector clears 95% power while a full
/// run stays desk-scale.
struct GenConfig {
    int n_series = 500;
    int series_len = 100;
    double anomaly_fraction = 0.2;
    std::array<double, 5> mix = {0.2, 0.2, 0.2, 0.2, 0.2};  // MonotonicTrend, SuddenSpike,
                                                            // SuddenShift, VolatilityChange,
                                                            // PointRange
    double base_level = 0.0;
    double noise_sigma = 1.0;
    double trend_slope = 0.05;
    double spike_magnitude = 8.0;
    double shift_magnitude = 4.0;
    double volatility_ratio = 5.0;
    double point_low = -5.0;   // declared acceptable range for PointRange
    double point_high = 5.0;
    std::uint64_t seed = 42;

    void validate() const;
};

struct InjectParams {
    double trend_slope = 0.05;
    double spike_magnitude = 8.0;
    double shift_magnitude = 4.0;
    double volatility_ratio = 5.0;
    double point_low = -5.0;
    double point_high = 5.0;
};

struct GeneratedCorpus {
    std::vector<TimeSeries> series;
    std::vector<int> labels;                           // ground-truth, injection-based
    std::vector<std::optional<AnomalyKind>> kinds;     // empty for normal series
};

/// I.i.d. Gaussian noise around a constant base level.
TimeSeries gen_normal(Rng& rng, int length, double base_level, double noise_sigma);

/// Overlay one anomaly of the given kind. Trend adds slope*t; spike adds a
/// jump at one interior index; shift raises the level from a split onward;
/// volatility rescales deviations after a split; point-range pushes one value
/// outside the declared range. Splits are drawn from [T/4, 3T/4) so the
/// injected signal is never vanishingly one-sided.
TimeSeries inject(const TimeSeries& series, AnomalyKind kind, Rng& rng, const InjectParams& params);

/// Full corpus: round(fraction*n) anomalous series with kinds drawn from the
/// mix, the rest pure noise. Per-series RNG streams derive from (seed, index)
/// so generation order does not matter.
GeneratedCorpus gen_dataset(const GenConfig& config);

}  // namespace spear

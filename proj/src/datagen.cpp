#include "spear/datagen.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "spear/errors.hpp"

namespace spear {

void GenConfig::validate() const {
    if (n_series < 1) throw ConfigError("datagen: n_series must be >= 1");
    if (series_len < 4) throw ConfigError("datagen: series_len must be >= 4");
    if (!(anomaly_fraction >= 0.0 && anomaly_fraction <= 1.0))
        throw ConfigError("datagen: anomaly_fraction must be in [0,1]");
    double mix_sum = 0.0;
    for (double w : mix) {
        if (w < 0.0) throw ConfigError("datagen: mix weights must be nonnegative");
        mix_sum += w;
    }
    if (std::fabs(mix_sum - 1.0) > 1e-9) throw ConfigError("datagen: mix weights must sum to 1");
    if (noise_sigma < 0.0) throw ConfigError("datagen: noise_sigma must be >= 0");
    if (point_low > point_high) throw ConfigError("datagen: point_low > point_high");
}

TimeSeries gen_normal(Rng& rng, int length, double base_level, double noise_sigma) {
    if (length < 1) throw ConfigError("gen_normal: length must be >= 1");
    TimeSeries s;
    s.timestamps.resize(length);
    s.values.resize(length);
    for (int t = 0; t < length; ++t) {
        s.timestamps[t] = static_cast<double>(t);
        s.values[t] = base_level + (noise_sigma > 0.0 ? rng.gaussian(0.0, noise_sigma) : 0.0);
    }
    return s;
}

namespace {

std::size_t interior_split(Rng& rng, std::size_t n) {
    const std::size_t lo = std::max<std::size_t>(2, n / 4);
    const std::size_t hi = std::min<std::size_t>(n - 2, 3 * n / 4);
    return lo + rng.uniform_index(hi - lo + 1);
}

}  // namespace

TimeSeries inject(const TimeSeries& series, AnomalyKind kind, Rng& rng, const InjectParams& params) {
    const std::size_t n = series.length();
    if (n < 4) throw DataError("inject: series too short for anomaly injection (T < 4)");

    TimeSeries out = series;
    switch (kind) {
        case AnomalyKind::MonotonicTrend:
            for (std::size_t t = 0; t < n; ++t)
                out.values[t] += params.trend_slope * static_cast<double>(t + 1);
            break;
        case AnomalyKind::SuddenSpike: {
            const std::size_t idx = 1 + rng.uniform_index(n - 2);  // interior index
            out.values[idx] += params.spike_magnitude;
            break;
        }
        case AnomalyKind::SuddenShift: {
            const std::size_t split = interior_split(rng, n);
            for (std::size_t t = split; t < n; ++t) out.values[t] += params.shift_magnitude;
            break;
        }
        case AnomalyKind::VolatilityChange: {
            const std::size_t split = interior_split(rng, n);
            double mean = 0.0;
            for (std::size_t t = split; t < n; ++t) mean += out.values[t];
            mean /= static_cast<double>(n - split);
            for (std::size_t t = split; t < n; ++t)
                out.values[t] = mean + params.volatility_ratio * (out.values[t] - mean);
            break;
        }
        case AnomalyKind::PointRange: {
            const std::size_t idx = rng.uniform_index(n);
            const double margin = 0.5 * (params.point_high - params.point_low) + 1.0;
            out.values[idx] = rng.uniform() < 0.5 ? params.point_low - margin : params.point_high + margin;
            break;
        }
    }
    return out;
}

GeneratedCorpus gen_dataset(const GenConfig& config) {
    config.validate();

    const int n_anomalous =
        static_cast<int>(std::lround(config.anomaly_fraction * config.n_series));
    const InjectParams params{config.trend_slope, config.spike_magnitude, config.shift_magnitude,
                              config.volatility_ratio, config.point_low, config.point_high};
    constexpr std::array<AnomalyKind, 5> all_kinds = {
        AnomalyKind::MonotonicTrend, AnomalyKind::SuddenSpike, AnomalyKind::SuddenShift,
        AnomalyKind::VolatilityChange, AnomalyKind::PointRange};

    GeneratedCorpus corpus;
    corpus.series.reserve(config.n_series);
    corpus.labels.reserve(config.n_series);
    corpus.kinds.reserve(config.n_series);

    for (int i = 0; i < config.n_series; ++i) {
        Rng rng(derive_seed(config.seed, "data", static_cast<std::uint64_t>(i)));
        TimeSeries s = gen_normal(rng, config.series_len, config.base_level, config.noise_sigma);
        s.id = "s" + std::to_string(i);

        const bool anomalous = i < n_anomalous;
        std::optional<AnomalyKind> kind;
        if (anomalous) {
            const double u = rng.uniform();
            double acc = 0.0;
            kind = all_kinds.back();
            for (std::size_t ki = 0; ki < all_kinds.size(); ++ki) {
                acc += config.mix[ki];
                if (u < acc) {
                    kind = all_kinds[ki];
                    break;
                }
            }
            s = inject(s, *kind, rng, params);
        }
        corpus.series.push_back(std::move(s));
        corpus.labels.push_back(anomalous ? 1 : 0);
        corpus.kinds.push_back(kind);
    }
    return corpus;
}

}  // namespace spear

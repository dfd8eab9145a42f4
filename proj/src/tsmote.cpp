#include "spear/tsmote.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spear/errors.hpp"
#include "spear/rng.hpp"

namespace spear {

std::size_t LabeledDataset::count(int label) const {
    std::size_t n = 0;
    for (const Sample& s : samples) {
        if (s.label == label) ++n;
    }
    return n;
}

int LabeledDataset::minority_label() const {
    return count(1) <= count(0) ? 1 : 0;
}

std::size_t LabeledDataset::feature_dim() const {
    return samples.empty() ? 0 : samples.front().features.size();
}

namespace {

void check_uniform_dim(const LabeledDataset& dataset) {
    const std::size_t dim = dataset.feature_dim();
    for (const auto& s : dataset.samples) {
        if (s.features.size() != dim)
            throw DataError("tsmote: feature vectors must all have the same length");
    }
}

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        d += diff * diff;
    }
    return d;
}

}  // namespace

std::vector<std::vector<std::size_t>> k_nearest_minority(const LabeledDataset& dataset, int k) {
    check_uniform_dim(dataset);
    const int minority = dataset.minority_label();
    std::vector<std::size_t> minority_idx;
    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
        if (dataset.samples[i].label == minority) minority_idx.push_back(i);
    }
    if (minority_idx.size() < 2)
        throw DataError("k_nearest_minority: fewer than 2 minority samples; disable resampling");
    if (k < 1 || static_cast<std::size_t>(k) > minority_idx.size() - 1)
        throw ConfigError("k_nearest_minority: k must be in [1, minority_count-1], got " +
                          std::to_string(k));

    std::vector<std::vector<std::size_t>> neighbors(minority_idx.size());
    for (std::size_t qi = 0; qi < minority_idx.size(); ++qi) {
        std::vector<std::pair<double, std::size_t>> dists;
        dists.reserve(minority_idx.size() - 1);
        for (std::size_t oi = 0; oi < minority_idx.size(); ++oi) {
            if (oi == qi) continue;
            dists.emplace_back(squared_distance(dataset.samples[minority_idx[qi]].features,
                                                dataset.samples[minority_idx[oi]].features),
                               minority_idx[oi]);
        }
        std::sort(dists.begin(), dists.end());  // pair ordering: distance, then lower index
        neighbors[qi].reserve(k);
        for (int j = 0; j < k; ++j) neighbors[qi].push_back(dists[j].second);
    }
    return neighbors;
}

std::vector<double> interpolate(const std::vector<double>& x_i, const std::vector<double>& x_nn,
                                double lambda) {
    if (x_i.size() != x_nn.size()) throw DataError("interpolate: length mismatch");
    std::vector<double> out(x_i.size());
    for (std::size_t j = 0; j < x_i.size(); ++j) out[j] = x_i[j] + lambda * (x_nn[j] - x_i[j]);
    return out;
}

LabeledDataset balance(const LabeledDataset& dataset, int k, std::uint64_t seed) {
    check_uniform_dim(dataset);
    const std::size_t n0 = dataset.count(0);
    const std::size_t n1 = dataset.count(1);
    if (n0 == 0 || n1 == 0) throw DataError("balance: both classes must be nonempty");

    LabeledDataset out = dataset;
    if (n0 == n1) return out;

    const int minority = dataset.minority_label();
    const std::size_t minority_count = std::min(n0, n1);
    const std::size_t majority_count = std::max(n0, n1);
    if (minority_count < 2)
        throw DataError("balance: fewer than 2 minority samples; disable resampling");

    const int k_eff = std::min<int>(k, static_cast<int>(minority_count) - 1);
    const auto neighbors = k_nearest_minority(dataset, k_eff);

    std::vector<std::size_t> minority_idx;
    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
        if (dataset.samples[i].label == minority) minority_idx.push_back(i);
    }

    Rng rng(seed);
    for (std::size_t need = majority_count - minority_count; need > 0; --need) {
        const std::size_t base_pos = rng.uniform_index(minority_idx.size());
        const std::size_t base = minority_idx[base_pos];
        const std::size_t nn = neighbors[base_pos][rng.uniform_index(neighbors[base_pos].size())];
        const double lambda = rng.uniform();

        LabeledDataset::Sample syn;
        syn.features = interpolate(dataset.samples[base].features, dataset.samples[nn].features, lambda);
        syn.label = minority;
        syn.synthetic = true;
        syn.parents = std::make_pair(base, nn);
        out.samples.push_back(std::move(syn));
    }
    return out;
}

}  // namespace spear

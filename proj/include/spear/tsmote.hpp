#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace spear {

/// Fixed-length feature vectors with binary labels. Synthetic samples record
/// the dataset indices of the two parents they were interpolated from.
struct LabeledDataset {
    struct Sample {
        std::vector<double> features;
        int label = 0;
        bool synthetic = false;
        std::optional<std::pair<std::size_t, std::size_t>> parents;  // (base, neighbor)
    };

    std::vector<Sample> samples;

    std::size_t count(int label) const;
    int minority_label() const;  // label with the smaller count; ties -> 1
    std::size_t feature_dim() const;
};

/// For each minority sample, the k nearest other minority samples by
/// Euclidean distance; ties broken by lower index. Returned indices refer to
/// positions in the full dataset.
std::vector<std::vector<std::size_t>> k_nearest_minority(const LabeledDataset& dataset, int k);

/// Elementwise x_i + lambda * (x_nn - x_i).
std::vector<double> interpolate(const std::vector<double>& x_i, const std::vector<double>& x_nn,
                                double lambda);

/// Oversample the minority class by interpolating random neighbor pairs until
/// class counts are equal. k is clamped to minority_count-1. Original samples
/// are untouched; synthesis order follows the seeded RNG, so the result is a
/// deterministic function of (dataset order, k, seed).
LabeledDataset balance(const LabeledDataset& dataset, int k, std::uint64_t seed);

}  // namespace spear

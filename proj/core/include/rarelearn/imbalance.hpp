#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "rarelearn/dataset.hpp"

namespace rarelearn {

struct SmoteConfig {
    int k_neighbors = 5;     // must stay below the minority class size
    double over_ratio = 1.0; // synthetic positives per existing positive
    std::uint64_t seed = 0;
    bool standardize = false; // per-feature z-scaling for the neighbor metric
};

enum class RowOrigin : std::uint8_t { Original, Duplicated, Synthetic };

inline constexpr std::size_t no_row = std::numeric_limits<std::size_t>::max();

// Indices refer to rows of the resampler's input dataset. Synthetic rows
// record both interpolation parents so downstream protocols can prove no
// leakage across fold boundaries.
struct RowProvenance {
    RowOrigin origin = RowOrigin::Original;
    std::size_t source = no_row;
    std::size_t neighbor = no_row;
};

struct ResampleOutcome {
    Dataset dataset;
    std::vector<RowProvenance> provenance;
};

// Uniform subsample (without replacement) of the majority class down to the
// minority size. Original feature values are never altered.
ResampleOutcome random_under_sample(const Dataset& ds, std::uint64_t seed);

// Minority augmented by sampling with replacement up to the majority size.
ResampleOutcome random_over_sample(const Dataset& ds, std::uint64_t seed);

// Adds floor(over_ratio * minority size) synthetic positives, each placed
// uniformly on the segment from a minority row to one of its k nearest
// minority neighbors (Euclidean on the encoded matrix). Ordinal and binary
// coordinates are rounded to the nearest valid level afterwards.
ResampleOutcome smote(const Dataset& ds, const SmoteConfig& cfg);

// SMOTE followed by under-sampling the majority to the augmented minority
// size; the result is exactly balanced.
ResampleOutcome hybrid_smote_under(const Dataset& ds, const SmoteConfig& cfg,
                                   std::uint64_t seed);

// Per-instance weights inversely proportional to class frequency,
// normalized so the total weight equals the row count: w_c = N / (2 n_c).
std::vector<double> class_weights(const Dataset& ds);

// seed + r * (neighbor - seed) with ordinal/binary coordinates snapped to
// the nearest valid level. Exposed for direct testing.
std::vector<double> smote_interpolate(std::span<const double> seed_row,
                                      std::span<const double> neighbor_row, double r,
                                      std::span<const FeatureSchema> schema);

} // namespace rarelearn

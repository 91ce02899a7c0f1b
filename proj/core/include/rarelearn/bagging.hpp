#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rarelearn/tree.hpp"

namespace rarelearn {

// Ensemble of unpruned trees fit on bootstrap resamples. base.cp is ignored;
// base.mode == Cost makes every member tree cost-sensitive. Imbalance
// handling by resampling happens upstream: fit never rebalances by itself.
struct BaggingConfig {
    std::size_t trials = 1;
    std::uint64_t seed = 0;
    GrowConfig base{};
    bool use_case_weights = false; // carry ds weights into each tree's impurity
};

struct Ensemble {
    std::vector<Tree> trees;
    BaggingConfig config;
};

// One member's bootstrap draw: n indices sampled with replacement from
// [0, n), taken from the stream derived from (seed, tree_index).
std::vector<std::size_t> bootstrap_indices(std::size_t n, std::uint64_t seed,
                                           std::size_t tree_index);

// For trials == 1 the single tree is grown on the original data, so the
// degenerate grid point coincides with the single-tree baseline. Larger
// trials draw one bootstrap per tree via bootstrap_indices.
Ensemble fit_bagging(const Dataset& ds, const BaggingConfig& cfg);

// Majority vote; exact ties go to Positive.
ClassLabel predict(const Ensemble& ens, std::span<const double> instance);

std::string serialize(const Ensemble& ens);
Ensemble deserialize_ensemble(const std::string& text);

} // namespace rarelearn

#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>

#include "rarelearn/dataset.hpp"
#include "rarelearn/metrics.hpp"

namespace rarelearn {

enum class SplitMode : std::uint8_t { Impurity, Cost };

struct GrowConfig {
    std::size_t min_leaf = 1; // minimum instance count per child
    double cp = 0.0;          // complexity parameter, applied by prune()
    SplitMode mode = SplitMode::Impurity;
    CostMatrix cost{}; // read in Cost mode
};

// Internal nodes test encoded_value[feature] <= threshold (equality goes
// left). Class masses are weight sums of the training rows that reached the
// node; they are kept on internal nodes as well so pruning can collapse any
// subtree without revisiting the data.
struct TreeNode {
    int feature = -1; // < 0 marks a leaf
    double threshold = 0.0;
    double mass_pos = 0.0;
    double mass_neg = 0.0;
    ClassLabel label = ClassLabel::Negative;
    std::unique_ptr<TreeNode> left;
    std::unique_ptr<TreeNode> right;

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::unique_ptr<TreeNode> root;
    GrowConfig config;
    std::size_t n_features = 0;
    std::size_t n_leaves = 0;
};

Tree clone(const Tree& tree);

// 1 - sum_c (m_c / total)^2 for binary class masses; 0 iff pure, 0.5 at
// the balanced maximum. Throws on zero total mass.
double weighted_gini(double mass_pos, double mass_neg);

struct SplitCandidate {
    std::size_t feature = 0;
    double threshold = 0.0;
    double child_impurity = 0.0; // mass-weighted mean child score
};

// Scans every (feature, midpoint-between-distinct-values) candidate and
// returns the impurity minimizer, or nullopt when nothing improves on the
// parent or min_leaf blocks every cut. Ties break toward the lower feature
// index, then the lower threshold.
std::optional<SplitCandidate> best_split(const EncodedMatrix& rows,
                                         std::span<const ClassLabel> labels,
                                         std::span<const double> weights,
                                         const GrowConfig& cfg = {});

// Recursive partitioning until nodes are pure, nothing improves, or min_leaf
// is reached. Empty weights mean unit weights.
Tree grow(const Dataset& ds, std::span<const double> weights, const GrowConfig& cfg);

// Split selection and leaf labels minimize expected misclassification cost
// instead of Gini impurity.
Tree grow_cost_sensitive(const Dataset& ds, const CostMatrix& costs, GrowConfig cfg = {});

// Weakest-link cost-complexity pruning: returns the collapse-subtree
// minimizing risk + cp * n_leaves, where risk is the tree's weighted
// misclassification error (expected cost in Cost mode) normalized by total
// mass. Ties collapse toward fewer leaves.
Tree prune(const Tree& tree, double cp);

ClassLabel predict(const Tree& tree, std::span<const double> instance);

// Line-oriented preorder text: "I <feature> <threshold>" for internal nodes,
// "L <mass_pos> <mass_neg> <label>" for leaves.
std::string serialize(const Tree& tree);
Tree deserialize_tree(const std::string& text);
Tree deserialize_tree(std::istream& in);

} // namespace rarelearn

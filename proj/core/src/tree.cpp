#include "rarelearn/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace rarelearn {

double weighted_gini(double mass_pos, double mass_neg) {
    double total = mass_pos + mass_neg;
    if (!(total > 0.0))
        throw std::domain_error("weighted_gini: zero total mass");
    double pp = mass_pos / total;
    double pn = mass_neg / total;
    return 1.0 - pp * pp - pn * pn;
}

namespace {

// Expected misclassification cost of a node when it predicts the given label.
double label_cost(double mass_pos, double mass_neg, ClassLabel predicted,
                  const CostMatrix& c) {
    if (predicted == ClassLabel::Positive)
        return mass_pos * c.tp + mass_neg * c.fp;
    return mass_pos * c.fn + mass_neg * c.tn;
}

ClassLabel node_label(double mass_pos, double mass_neg, const GrowConfig& cfg) {
    if (cfg.mode == SplitMode::Cost) {
        double as_pos = label_cost(mass_pos, mass_neg, ClassLabel::Positive, cfg.cost);
        double as_neg = label_cost(mass_pos, mass_neg, ClassLabel::Negative, cfg.cost);
        return as_pos < as_neg ? ClassLabel::Positive : ClassLabel::Negative;
    }
    return mass_pos > mass_neg ? ClassLabel::Positive : ClassLabel::Negative;
}

// Node score the split search minimizes: Gini impurity, or expected cost per
// unit mass in Cost mode.
double node_score(double mass_pos, double mass_neg, const GrowConfig& cfg) {
    if (cfg.mode == SplitMode::Cost) {
        double best = std::min(label_cost(mass_pos, mass_neg, ClassLabel::Positive, cfg.cost),
                               label_cost(mass_pos, mass_neg, ClassLabel::Negative, cfg.cost));
        return best / (mass_pos + mass_neg);
    }
    return weighted_gini(mass_pos, mass_neg);
}

// Column-major view with one sorted row-index array per feature. grow()
// maintains the sorted orders across partitions so each node costs O(F * n).
struct SplitScanner {
    std::size_t n_features = 0;
    std::vector<std::vector<double>> col;
    std::span<const ClassLabel> labels;
    std::vector<double> weights;
    std::vector<std::vector<std::size_t>> order;

    std::optional<SplitCandidate> scan(std::size_t lo, std::size_t hi, double mass_pos,
                                       double mass_neg, const GrowConfig& cfg) const {
        const std::size_t n = hi - lo;
        if (n < 2)
            return std::nullopt;
        const double parent_total = mass_pos + mass_neg;
        const double parent_score = node_score(mass_pos, mass_neg, cfg);

        std::optional<SplitCandidate> best;
        double best_score = parent_score;
        for (std::size_t f = 0; f < n_features; ++f) {
            const auto& ord = order[f];
            const auto& values = col[f];
            double left_pos = 0.0, left_neg = 0.0;
            for (std::size_t pos = lo; pos + 1 < hi; ++pos) {
                std::size_t id = ord[pos];
                if (labels[id] == ClassLabel::Positive)
                    left_pos += weights[id];
                else
                    left_neg += weights[id];
                double v = values[id];
                double next = values[ord[pos + 1]];
                if (!(next > v))
                    continue;
                std::size_t left_count = pos - lo + 1;
                if (left_count < cfg.min_leaf || n - left_count < cfg.min_leaf)
                    continue;
                double right_pos = mass_pos - left_pos;
                double right_neg = mass_neg - left_neg;
                double score;
                if (cfg.mode == SplitMode::Cost) {
                    double lc = std::min(label_cost(left_pos, left_neg, ClassLabel::Positive, cfg.cost),
                                         label_cost(left_pos, left_neg, ClassLabel::Negative, cfg.cost));
                    double rc = std::min(label_cost(right_pos, right_neg, ClassLabel::Positive, cfg.cost),
                                         label_cost(right_pos, right_neg, ClassLabel::Negative, cfg.cost));
                    score = (lc + rc) / parent_total;
                } else {
                    double lt = left_pos + left_neg;
                    double rt = right_pos + right_neg;
                    score = (lt * weighted_gini(left_pos, left_neg) +
                             rt * weighted_gini(right_pos, right_neg)) /
                            parent_total;
                }
                if (score < best_score) {
                    best_score = score;
                    best = SplitCandidate{f, (v + next) * 0.5, score};
                }
            }
        }
        return best;
    }
};

SplitScanner make_scanner(const EncodedMatrix& m, std::span<const ClassLabel> labels,
                          std::span<const double> weights) {
    SplitScanner s;
    s.n_features = m.n_cols;
    s.labels = labels;
    if (weights.empty())
        s.weights.assign(m.n_rows, 1.0);
    else
        s.weights.assign(weights.begin(), weights.end());
    s.col.resize(m.n_cols);
    s.order.resize(m.n_cols);
    for (std::size_t f = 0; f < m.n_cols; ++f) {
        auto& c = s.col[f];
        c.resize(m.n_rows);
        for (std::size_t i = 0; i < m.n_rows; ++i)
            c[i] = m.at(i, f);
        auto& ord = s.order[f];
        ord.resize(m.n_rows);
        std::iota(ord.begin(), ord.end(), std::size_t{0});
        std::sort(ord.begin(), ord.end(), [&c](std::size_t a, std::size_t b) {
            return c[a] < c[b] || (c[a] == c[b] && a < b);
        });
    }
    return s;
}

struct TreeBuilder {
    SplitScanner scanner;
    GrowConfig cfg;
    std::vector<char> goes_left;
    std::vector<std::size_t> buf;
    std::size_t n_leaves = 0;

    std::unique_ptr<TreeNode> build(std::size_t lo, std::size_t hi) {
        double mass_pos = 0.0, mass_neg = 0.0;
        for (std::size_t pos = lo; pos < hi; ++pos) {
            std::size_t id = scanner.order[0][pos];
            if (scanner.labels[id] == ClassLabel::Positive)
                mass_pos += scanner.weights[id];
            else
                mass_neg += scanner.weights[id];
        }
        auto node = std::make_unique<TreeNode>();
        node->mass_pos = mass_pos;
        node->mass_neg = mass_neg;
        node->label = node_label(mass_pos, mass_neg, cfg);

        std::optional<SplitCandidate> split;
        if (mass_pos > 0.0 && mass_neg > 0.0)
            split = scanner.scan(lo, hi, mass_pos, mass_neg, cfg);
        if (!split) {
            ++n_leaves;
            return node;
        }

        const auto f = split->feature;
        const double thr = split->threshold;
        std::size_t n_left = 0;
        for (std::size_t pos = lo; pos < hi; ++pos) {
            std::size_t id = scanner.order[f][pos];
            bool l = scanner.col[f][id] <= thr;
            goes_left[id] = l ? 1 : 0;
            n_left += l ? 1 : 0;
        }
        // Stable partition of every feature's segment keeps each side sorted.
        for (std::size_t g = 0; g < scanner.n_features; ++g) {
            auto& ord = scanner.order[g];
            std::size_t a = 0, b = n_left;
            for (std::size_t pos = lo; pos < hi; ++pos) {
                std::size_t id = ord[pos];
                buf[goes_left[id] ? a++ : b++] = id;
            }
            std::copy(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(hi - lo),
                      ord.begin() + static_cast<std::ptrdiff_t>(lo));
        }

        node->feature = static_cast<int>(f);
        node->threshold = thr;
        node->left = build(lo, lo + n_left);
        node->right = build(lo + n_left, hi);
        return node;
    }
};

std::unique_ptr<TreeNode> clone_node(const TreeNode& n) {
    auto out = std::make_unique<TreeNode>();
    out->feature = n.feature;
    out->threshold = n.threshold;
    out->mass_pos = n.mass_pos;
    out->mass_neg = n.mass_neg;
    out->label = n.label;
    if (!n.is_leaf()) {
        out->left = clone_node(*n.left);
        out->right = clone_node(*n.right);
    }
    return out;
}

std::size_t count_leaves(const TreeNode& n) {
    if (n.is_leaf())
        return 1;
    return count_leaves(*n.left) + count_leaves(*n.right);
}

} // namespace

Tree clone(const Tree& tree) {
    Tree out;
    out.config = tree.config;
    out.n_features = tree.n_features;
    out.n_leaves = tree.n_leaves;
    if (tree.root)
        out.root = clone_node(*tree.root);
    return out;
}

std::optional<SplitCandidate> best_split(const EncodedMatrix& rows,
                                         std::span<const ClassLabel> labels,
                                         std::span<const double> weights,
                                         const GrowConfig& cfg) {
    if (rows.n_rows < 2)
        return std::nullopt;
    if (labels.size() != rows.n_rows)
        throw std::invalid_argument("best_split: label count mismatch");
    SplitScanner s = make_scanner(rows, labels, weights);
    double mass_pos = 0.0, mass_neg = 0.0;
    for (std::size_t i = 0; i < rows.n_rows; ++i) {
        if (labels[i] == ClassLabel::Positive)
            mass_pos += s.weights[i];
        else
            mass_neg += s.weights[i];
    }
    if (!(mass_pos > 0.0) || !(mass_neg > 0.0))
        return std::nullopt;
    return s.scan(0, rows.n_rows, mass_pos, mass_neg, cfg);
}

Tree grow(const Dataset& ds, std::span<const double> weights, const GrowConfig& cfg) {
    if (ds.n_rows() == 0)
        throw std::invalid_argument("grow: empty dataset");
    if (!weights.empty() && weights.size() != ds.n_rows())
        throw std::invalid_argument("grow: weight count mismatch");
    if (cfg.min_leaf < 1)
        throw std::invalid_argument("grow: min_leaf must be >= 1");
    if (cfg.mode == SplitMode::Cost &&
        !(std::isfinite(cfg.cost.tp) && std::isfinite(cfg.cost.fn) &&
          std::isfinite(cfg.cost.fp) && std::isfinite(cfg.cost.tn)))
        throw std::invalid_argument("grow: cost matrix must be finite");

    TreeBuilder builder;
    builder.scanner = make_scanner(encode(ds), ds.labels(), weights);
    builder.cfg = cfg;
    builder.goes_left.resize(ds.n_rows());
    builder.buf.resize(ds.n_rows());

    Tree t;
    t.config = cfg;
    t.n_features = ds.n_features();
    t.root = builder.build(0, ds.n_rows());
    t.n_leaves = builder.n_leaves;
    return t;
}

Tree grow_cost_sensitive(const Dataset& ds, const CostMatrix& costs, GrowConfig cfg) {
    cfg.mode = SplitMode::Cost;
    cfg.cost = costs;
    return grow(ds, ds.weights(), cfg);
}

namespace {

// Risk of a node collapsed to a leaf, in unnormalized mass units.
double collapse_risk(const TreeNode& n, const GrowConfig& cfg) {
    if (cfg.mode == SplitMode::Cost)
        return std::min(label_cost(n.mass_pos, n.mass_neg, ClassLabel::Positive, cfg.cost),
                        label_cost(n.mass_pos, n.mass_neg, ClassLabel::Negative, cfg.cost));
    return n.label == ClassLabel::Positive ? n.mass_neg : n.mass_pos;
}

struct LinkInfo {
    TreeNode* node;
    double risk_gap;    // risk as leaf minus subtree risk
    std::size_t leaves; // leaves in the subtree
};

// Subtree risk and leaf count; collects internal nodes.
std::pair<double, std::size_t> survey(TreeNode& n, const GrowConfig& cfg,
                                      std::vector<LinkInfo>& links) {
    if (n.is_leaf())
        return {collapse_risk(n, cfg), 1};
    auto [lr, ll] = survey(*n.left, cfg, links);
    auto [rr, rl] = survey(*n.right, cfg, links);
    links.push_back({&n, collapse_risk(n, cfg) - (lr + rr), ll + rl});
    return {lr + rr, ll + rl};
}

// a.gap/(a.leaves-1) < b.gap/(b.leaves-1), compared cross-multiplied so
// integer-valued masses stay exact.
bool weaker_link(const LinkInfo& a, const LinkInfo& b) {
    return a.risk_gap * static_cast<double>(b.leaves - 1) <
           b.risk_gap * static_cast<double>(a.leaves - 1);
}

} // namespace

Tree prune(const Tree& tree, double cp) {
    if (cp < 0.0)
        throw std::invalid_argument("prune: cp must be non-negative");
    if (!tree.root)
        throw std::invalid_argument("prune: empty tree");
    Tree out = clone(tree);
    const double total_mass = out.root->mass_pos + out.root->mass_neg;

    for (;;) {
        std::vector<LinkInfo> links;
        survey(*out.root, out.config, links);
        if (links.empty())
            break;
        const LinkInfo* weakest = &links.front();
        for (const auto& l : links)
            if (weaker_link(l, *weakest))
                weakest = &l;
        // Collapse while the error increase per removed leaf is within cp;
        // equality collapses too, preferring the smaller tree.
        double threshold = cp * total_mass * static_cast<double>(weakest->leaves - 1);
        if (!(weakest->risk_gap <= threshold))
            break;
        TreeNode* n = weakest->node;
        n->feature = -1;
        n->left.reset();
        n->right.reset();
    }
    out.n_leaves = count_leaves(*out.root);
    return out;
}

ClassLabel predict(const Tree& tree, std::span<const double> instance) {
    if (instance.size() != tree.n_features)
        throw std::invalid_argument("predict: instance arity mismatch");
    const TreeNode* n = tree.root.get();
    while (!n->is_leaf())
        n = instance[static_cast<std::size_t>(n->feature)] <= n->threshold ? n->left.get()
                                                                           : n->right.get();
    return n->label;
}

namespace {

void serialize_node(const TreeNode& n, std::string& out) {
    if (n.is_leaf()) {
        out += "L ";
        out += format_double(n.mass_pos);
        out += ' ';
        out += format_double(n.mass_neg);
        out += ' ';
        out += to_token(n.label);
        out += '\n';
        return;
    }
    out += "I ";
    out += std::to_string(n.feature);
    out += ' ';
    out += format_double(n.threshold);
    out += '\n';
    serialize_node(*n.left, out);
    serialize_node(*n.right, out);
}

std::unique_ptr<TreeNode> parse_node(std::istream& in, std::size_t& leaves) {
    std::string tag;
    if (!(in >> tag))
        throw std::runtime_error("tree parse: unexpected end of input");
    auto node = std::make_unique<TreeNode>();
    if (tag == "L") {
        std::string label;
        if (!(in >> node->mass_pos >> node->mass_neg >> label))
            throw std::runtime_error("tree parse: malformed leaf");
        node->label = label == "Y" ? ClassLabel::Positive : ClassLabel::Negative;
        ++leaves;
        return node;
    }
    if (tag != "I")
        throw std::runtime_error("tree parse: unknown node tag '" + tag + "'");
    if (!(in >> node->feature >> node->threshold))
        throw std::runtime_error("tree parse: malformed internal node");
    node->left = parse_node(in, leaves);
    node->right = parse_node(in, leaves);
    node->mass_pos = node->left->mass_pos + node->right->mass_pos;
    node->mass_neg = node->left->mass_neg + node->right->mass_neg;
    node->label = node->mass_pos > node->mass_neg ? ClassLabel::Positive : ClassLabel::Negative;
    return node;
}

int max_feature(const TreeNode& n) {
    if (n.is_leaf())
        return -1;
    return std::max({n.feature, max_feature(*n.left), max_feature(*n.right)});
}

} // namespace

std::string serialize(const Tree& tree) {
    std::string out;
    if (tree.root)
        serialize_node(*tree.root, out);
    return out;
}

Tree deserialize_tree(std::istream& in) {
    Tree t;
    t.root = parse_node(in, t.n_leaves);
    t.n_features = static_cast<std::size_t>(max_feature(*t.root) + 1);
    return t;
}

Tree deserialize_tree(const std::string& text) {
    std::istringstream in(text);
    return deserialize_tree(in);
}

} // namespace rarelearn

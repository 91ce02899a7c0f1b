#include "rarelearn/bagging.hpp"

#include <sstream>
#include <stdexcept>

#include "rarelearn/rng.hpp"

namespace rarelearn {

std::vector<std::size_t> bootstrap_indices(std::size_t n, std::uint64_t seed,
                                           std::size_t tree_index) {
    auto rng = make_rng(derive_seed(seed, tree_index));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<std::size_t> sample(n);
    for (std::size_t i = 0; i < n; ++i)
        sample[i] = pick(rng);
    return sample;
}

Ensemble fit_bagging(const Dataset& ds, const BaggingConfig& cfg) {
    if (ds.n_rows() == 0)
        throw std::invalid_argument("fit_bagging: empty dataset");
    if (cfg.trials < 1)
        throw std::invalid_argument("fit_bagging: trials must be >= 1");
    if (cfg.use_case_weights && !ds.has_weights())
        throw std::invalid_argument("fit_bagging: case weights requested but dataset has none");

    GrowConfig base = cfg.base;
    base.cp = 0.0; // members stay unpruned

    Ensemble ens;
    ens.config = cfg;
    ens.trees.reserve(cfg.trials);
    std::span<const double> weights =
        cfg.use_case_weights ? std::span<const double>(ds.weights()) : std::span<const double>();

    if (cfg.trials == 1) {
        ens.trees.push_back(grow(ds, weights, base));
        return ens;
    }

    for (std::size_t t = 0; t < cfg.trials; ++t) {
        std::vector<std::size_t> sample = bootstrap_indices(ds.n_rows(), cfg.seed, t);
        Dataset boot = subset(ds, sample);
        std::span<const double> boot_weights =
            cfg.use_case_weights ? std::span<const double>(boot.weights())
                                 : std::span<const double>();
        ens.trees.push_back(grow(boot, boot_weights, base));
    }
    return ens;
}

ClassLabel predict(const Ensemble& ens, std::span<const double> instance) {
    std::size_t votes_pos = 0;
    for (const Tree& t : ens.trees)
        if (predict(t, instance) == ClassLabel::Positive)
            ++votes_pos;
    // ties favor the rare class
    return 2 * votes_pos >= ens.trees.size() ? ClassLabel::Positive : ClassLabel::Negative;
}

std::string serialize(const Ensemble& ens) {
    std::string out = "trials " + std::to_string(ens.config.trials) + " seed " +
                      std::to_string(ens.config.seed) + "\n";
    for (const Tree& t : ens.trees)
        out += serialize(t);
    return out;
}

Ensemble deserialize_ensemble(const std::string& text) {
    std::istringstream in(text);
    std::string word;
    Ensemble ens;
    std::size_t trials = 0;
    if (!(in >> word >> trials) || word != "trials")
        throw std::runtime_error("ensemble parse: bad header");
    if (!(in >> word >> ens.config.seed) || word != "seed")
        throw std::runtime_error("ensemble parse: bad header");
    ens.config.trials = trials;
    // tree serializations are self-delimiting in preorder
    for (std::size_t t = 0; t < trials; ++t)
        ens.trees.push_back(deserialize_tree(in));
    return ens;
}

} // namespace rarelearn

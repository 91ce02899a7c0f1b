#include "rarelearn/imbalance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rarelearn/rng.hpp"

namespace rarelearn {

namespace {

struct ClassSplit {
    std::vector<std::size_t> minority;
    std::vector<std::size_t> majority;
    ClassLabel minority_label = ClassLabel::Positive;
};

ClassSplit split_by_class(const Dataset& ds, const char* op) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < ds.n_rows(); ++i)
        (ds.label(i) == ClassLabel::Positive ? pos : neg).push_back(i);
    if (pos.empty() || neg.empty())
        throw std::invalid_argument(std::string(op) + " requires both classes present");
    ClassSplit s;
    if (pos.size() <= neg.size()) {
        s.minority = std::move(pos);
        s.majority = std::move(neg);
        s.minority_label = ClassLabel::Positive;
    } else {
        s.minority = std::move(neg);
        s.majority = std::move(pos);
        s.minority_label = ClassLabel::Negative;
    }
    return s;
}

// Partial Fisher-Yates: the first `take` slots end up holding a uniform
// sample without replacement.
std::vector<std::size_t> sample_without_replacement(std::vector<std::size_t> pool,
                                                    std::size_t take, std::mt19937_64& rng) {
    for (std::size_t i = 0; i < take; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
    }
    pool.resize(take);
    return pool;
}

ResampleOutcome take_rows(const Dataset& ds, std::vector<std::size_t> keep) {
    std::sort(keep.begin(), keep.end());
    ResampleOutcome out{subset(ds, keep), {}};
    out.provenance.reserve(keep.size());
    for (std::size_t i : keep)
        out.provenance.push_back({RowOrigin::Original, i, no_row});
    return out;
}

} // namespace

ResampleOutcome random_under_sample(const Dataset& ds, std::uint64_t seed) {
    ClassSplit s = split_by_class(ds, "random_under_sample");
    if (s.minority.size() == s.majority.size()) {
        std::vector<std::size_t> all(ds.n_rows());
        for (std::size_t i = 0; i < all.size(); ++i)
            all[i] = i;
        return take_rows(ds, all);
    }
    auto rng = make_rng(derive_seed(seed, "under"));
    auto kept = sample_without_replacement(s.majority, s.minority.size(), rng);
    kept.insert(kept.end(), s.minority.begin(), s.minority.end());
    return take_rows(ds, std::move(kept));
}

ResampleOutcome random_over_sample(const Dataset& ds, std::uint64_t seed) {
    ClassSplit s = split_by_class(ds, "random_over_sample");
    std::vector<std::size_t> all(ds.n_rows());
    for (std::size_t i = 0; i < all.size(); ++i)
        all[i] = i;
    ResampleOutcome out = take_rows(ds, all);
    auto rng = make_rng(derive_seed(seed, "over"));
    std::uniform_int_distribution<std::size_t> pick(0, s.minority.size() - 1);
    for (std::size_t n = s.minority.size(); n < s.majority.size(); ++n) {
        std::size_t src = s.minority[pick(rng)];
        out.dataset.append_row(ds.row(src), ds.label(src),
                               ds.has_weights() ? ds.weight(src) : -1.0);
        out.provenance.push_back({RowOrigin::Duplicated, src, no_row});
    }
    return out;
}

std::vector<double> smote_interpolate(std::span<const double> seed_row,
                                      std::span<const double> neighbor_row, double r,
                                      std::span<const FeatureSchema> schema) {
    std::vector<double> out(seed_row.size());
    for (std::size_t j = 0; j < seed_row.size(); ++j) {
        double v = seed_row[j] + r * (neighbor_row[j] - seed_row[j]);
        const FeatureKind& kind = schema[j].kind;
        if (kind.type != FeatureType::Numeric) {
            v = std::round(v);
            v = std::clamp(v, static_cast<double>(kind.ordinal_min),
                           static_cast<double>(kind.ordinal_max));
        }
        out[j] = v;
    }
    return out;
}

ResampleOutcome smote(const Dataset& ds, const SmoteConfig& cfg) {
    ClassSplit s = split_by_class(ds, "smote");
    if (cfg.k_neighbors < 1 || static_cast<std::size_t>(cfg.k_neighbors) >= s.minority.size())
        throw std::invalid_argument("smote: need 1 <= k_neighbors < minority size");
    if (cfg.over_ratio < 0.0)
        throw std::invalid_argument("smote: over_ratio must be non-negative");

    const std::size_t n_min = s.minority.size();
    const std::size_t n_cols = ds.n_features();
    const auto n_synth =
        static_cast<std::size_t>(std::floor(cfg.over_ratio * static_cast<double>(n_min)));

    std::vector<std::size_t> all(ds.n_rows());
    for (std::size_t i = 0; i < all.size(); ++i)
        all[i] = i;
    ResampleOutcome out = take_rows(ds, all);
    if (n_synth == 0)
        return out;

    // Neighbor metric: plain Euclidean on encoded values, optionally z-scaled.
    std::vector<double> scale(n_cols, 1.0);
    if (cfg.standardize) {
        for (std::size_t j = 0; j < n_cols; ++j) {
            double mean = 0.0, sq = 0.0;
            for (std::size_t i : s.minority)
                mean += ds.value(i, j);
            mean /= static_cast<double>(n_min);
            for (std::size_t i : s.minority) {
                double d = ds.value(i, j) - mean;
                sq += d * d;
            }
            double sd = std::sqrt(sq / static_cast<double>(n_min));
            scale[j] = sd > 0.0 ? 1.0 / sd : 1.0;
        }
    }

    // k nearest minority neighbors per minority row, ties to the lower row index.
    const auto k = static_cast<std::size_t>(cfg.k_neighbors);
    std::vector<std::size_t> neighbors(n_min * k);
    std::vector<std::pair<double, std::size_t>> dist(n_min - 1);
    for (std::size_t a = 0; a < n_min; ++a) {
        std::size_t m = 0;
        for (std::size_t b = 0; b < n_min; ++b) {
            if (a == b)
                continue;
            double d2 = 0.0;
            for (std::size_t j = 0; j < n_cols; ++j) {
                double d = (ds.value(s.minority[a], j) - ds.value(s.minority[b], j)) * scale[j];
                d2 += d * d;
            }
            dist[m++] = {d2, b};
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k),
                          dist.end());
        for (std::size_t t = 0; t < k; ++t)
            neighbors[a * k + t] = dist[t].second;
    }

    // Each minority row draws its synthetics from its own stream, so the
    // output does not depend on generation schedule.
    std::vector<double> synth(n_cols);
    for (std::size_t a = 0; a < n_min; ++a) {
        std::size_t count = n_synth / n_min + (a < n_synth % n_min ? 1 : 0);
        if (count == 0)
            continue;
        auto rng = make_rng(derive_seed(cfg.seed, a));
        std::uniform_int_distribution<std::size_t> pick(0, k - 1);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::size_t seed_idx = s.minority[a];
        for (std::size_t c = 0; c < count; ++c) {
            std::size_t b = neighbors[a * k + pick(rng)];
            std::size_t nbr_idx = s.minority[b];
            double r = unit(rng);
            auto v = smote_interpolate(ds.row(seed_idx), ds.row(nbr_idx), r,
                                       ds.schema());
            out.dataset.append_row(v, s.minority_label,
                                   ds.has_weights() ? ds.weight(seed_idx) : -1.0);
            out.provenance.push_back({RowOrigin::Synthetic, seed_idx, nbr_idx});
        }
    }
    return out;
}

ResampleOutcome hybrid_smote_under(const Dataset& ds, const SmoteConfig& cfg,
                                   std::uint64_t seed) {
    ResampleOutcome augmented = smote(ds, cfg);
    ResampleOutcome balanced = random_under_sample(augmented.dataset, seed);
    // Rebase provenance onto the original dataset; synthetic rows keep their
    // interpolation parents.
    for (auto& p : balanced.provenance) {
        const RowProvenance& src = augmented.provenance[p.source];
        p = src;
    }
    return balanced;
}

std::vector<double> class_weights(const Dataset& ds) {
    ClassCounts c = class_counts(ds);
    if (c.positive == 0 || c.negative == 0)
        throw std::invalid_argument("class_weights requires both classes present");
    double n = static_cast<double>(c.total());
    double w_pos = n / (2.0 * static_cast<double>(c.positive));
    double w_neg = n / (2.0 * static_cast<double>(c.negative));
    std::vector<double> w(ds.n_rows());
    for (std::size_t i = 0; i < ds.n_rows(); ++i)
        w[i] = ds.label(i) == ClassLabel::Positive ? w_pos : w_neg;
    return w;
}

} // namespace rarelearn

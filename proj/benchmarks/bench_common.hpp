#pragma once

#include <cmath>

#include "rarelearn/dataset.hpp"
#include "rarelearn/rng.hpp"

namespace rarelearn::bench {

// Imbalanced mixed-type dataset shaped like the canonical corpus: a few
// binary flags, an ordinal and two numeric columns.
inline Dataset make_dataset(std::size_t rows, double positive_rate, std::uint64_t seed) {
    std::vector<FeatureSchema> schema = {
        {"grade", FeatureKind::ordinal(-1, 12)}, {"flag_a", FeatureKind::binary()},
        {"flag_b", FeatureKind::binary()},       {"days", FeatureKind::numeric()},
        {"absent", FeatureKind::numeric()},
    };
    Dataset ds(schema);
    ds.reserve(rows);
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t i = 0; i < rows; ++i) {
        double risk = normal(rng);
        double row[5] = {
            std::floor(unit(rng) * 14.0) - 1.0,
            unit(rng) < 0.2 + 0.2 * risk ? 1.0 : 0.0,
            unit(rng) < 0.3 ? 1.0 : 0.0,
            160.0 + 20.0 * unit(rng),
            std::round(std::exp(1.0 + 0.8 * risk)),
        };
        bool pos = unit(rng) < positive_rate * (1.0 + std::max(risk, 0.0));
        ds.append_row(row, pos ? ClassLabel::Positive : ClassLabel::Negative);
    }
    return ds;
}

} // namespace rarelearn::bench

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "rarelearn/metrics.hpp"
#include "rarelearn/rng.hpp"

using namespace rarelearn;

namespace {

// Independent counting oracle: walks the vectors and recomputes every rate
// from first principles.
struct OracleCounts {
    std::uint64_t tp = 0, fn = 0, fp = 0, tn = 0;
};

OracleCounts count_by_hand(const std::vector<ClassLabel>& labels,
                           const std::vector<ClassLabel>& preds) {
    OracleCounts c;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == ClassLabel::Positive && preds[i] == ClassLabel::Positive)
            ++c.tp;
        if (labels[i] == ClassLabel::Positive && preds[i] == ClassLabel::Negative)
            ++c.fn;
        if (labels[i] == ClassLabel::Negative && preds[i] == ClassLabel::Positive)
            ++c.fp;
        if (labels[i] == ClassLabel::Negative && preds[i] == ClassLabel::Negative)
            ++c.tn;
    }
    return c;
}

std::vector<ClassLabel> random_labels(std::size_t n, double rate, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<ClassLabel> out(n);
    for (auto& l : out)
        l = unit(rng) < rate ? ClassLabel::Positive : ClassLabel::Negative;
    return out;
}

} // namespace

TEST_SUITE("metrics") {

TEST_CASE("confusion counts the four cells") {
    std::vector<ClassLabel> labels = {ClassLabel::Positive, ClassLabel::Positive,
                                      ClassLabel::Negative, ClassLabel::Negative};
    std::vector<ClassLabel> preds = {ClassLabel::Positive, ClassLabel::Negative,
                                     ClassLabel::Positive, ClassLabel::Negative};
    ConfusionMatrix cm = confusion(labels, preds);
    CHECK(cm.tp == 1);
    CHECK(cm.fn == 1);
    CHECK(cm.fp == 1);
    CHECK(cm.tn == 1);

    ConfusionMatrix perfect = confusion(labels, labels);
    CHECK(perfect.fn == 0);
    CHECK(perfect.fp == 0);

    std::vector<ClassLabel> too_short = {ClassLabel::Negative};
    CHECK_THROWS_AS(confusion(labels, too_short), std::invalid_argument);
}

TEST_CASE("the accuracy pitfall: all-negative predictions on the skewed corpus") {
    // 14,895 dropouts, none detected
    ConfusionMatrix cm{0, 14895, 0, 351911};
    CHECK(accuracy(cm) == doctest::Approx(0.9594).epsilon(0.00005));
    CHECK(recall(cm) == 0.0);
    CHECK(precision(cm) == 0.0);
    CHECK(precision_is_degenerate(cm));
}

TEST_CASE("precision") {
    CHECK(precision(ConfusionMatrix{90, 5, 10, 95}) == doctest::Approx(0.9));
    CHECK(precision(ConfusionMatrix{7, 3, 0, 90}) == 1.0);
    ConfusionMatrix none{0, 4, 0, 96};
    CHECK(precision(none) == 0.0);
    CHECK(precision_is_degenerate(none));
    CHECK_FALSE(precision_is_degenerate(ConfusionMatrix{1, 0, 0, 9}));
}

TEST_CASE("recall") {
    CHECK(recall(ConfusionMatrix{90, 10, 3, 97}) == doctest::Approx(0.9));
    CHECK(recall(ConfusionMatrix{4, 0, 2, 94}) == 1.0);
    CHECK_THROWS_AS(recall(ConfusionMatrix{0, 0, 5, 95}), std::domain_error);
}

TEST_CASE("f_beta hand values") {
    // equal precision and recall is a fixed point for any beta
    ConfusionMatrix even{6, 4, 4, 6};
    CHECK(f_beta(even, 1.0) == doctest::Approx(0.6));

    // P = 0.5, R = 0.9 at the rare-class beta of five
    ConfusionMatrix cm{9, 1, 9, 81};
    double expected = 26.0 * 0.5 * 0.9 / (25.0 * 0.5 + 0.9);
    CHECK(f_beta(cm, 5.0) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(f_beta(cm, 5.0) == doctest::Approx(0.8731).epsilon(1e-4));

    // defined-zero convention at P = R = 0
    CHECK(f_beta(ConfusionMatrix{0, 10, 0, 90}, 5.0) == 0.0);
    CHECK_THROWS_AS(f_beta(ConfusionMatrix{1, 1, 1, 1}, 0.0), std::invalid_argument);
}

TEST_CASE("accuracy") {
    ConfusionMatrix perfect{10, 0, 0, 90};
    CHECK(accuracy(perfect) == 1.0);
    CHECK(accuracy(ConfusionMatrix{1, 1, 1, 1}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(accuracy(ConfusionMatrix{}), std::domain_error);
}

TEST_CASE("total_cost") {
    // unit misclassification costs reduce to the error count
    ConfusionMatrix cm{5, 2, 3, 90};
    CHECK(total_cost(cm, CostMatrix{0, 1, 1, 0}) == 5.0);
    CHECK(total_cost(cm, CostMatrix{0, 10, 1, 0}) == 23.0);
    CHECK(total_cost(cm, CostMatrix{}) == 0.0);
    // negative rewards on correct cells are allowed
    CHECK(total_cost(ConfusionMatrix{2, 0, 0, 3}, CostMatrix{-1, 0, 0, -1}) == -5.0);
}

TEST_CASE("metrics agree with the counting oracle on random vectors") {
    auto rng = make_rng(2024);
    std::uniform_int_distribution<std::size_t> len(1, 200);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        std::size_t n = len(rng);
        auto labels = random_labels(n, 0.1 + 0.8 * unit(rng), rng);
        auto preds = random_labels(n, 0.1 + 0.8 * unit(rng), rng);
        ConfusionMatrix cm = confusion(labels, preds);
        OracleCounts oc = count_by_hand(labels, preds);
        REQUIRE(cm.tp == oc.tp);
        REQUIRE(cm.fn == oc.fn);
        REQUIRE(cm.fp == oc.fp);
        REQUIRE(cm.tn == oc.tn);

        if (oc.tp + oc.fp > 0)
            CHECK(precision(cm) == static_cast<double>(oc.tp) /
                                       static_cast<double>(oc.tp + oc.fp));
        if (oc.tp + oc.fn > 0)
            CHECK(recall(cm) == static_cast<double>(oc.tp) /
                                    static_cast<double>(oc.tp + oc.fn));
        CHECK(accuracy(cm) == static_cast<double>(oc.tp + oc.tn) / static_cast<double>(n));
        CHECK(total_cost(cm, CostMatrix{0, 1, 1, 0}) ==
              static_cast<double>(n - oc.tp - oc.tn));
    }
}

TEST_CASE("f_beta lies between precision and recall and leans toward recall") {
    auto rng = make_rng(555);
    std::uniform_int_distribution<std::uint64_t> cell(1, 60);
    const double betas[] = {0.5, 1.0, 2.0, 5.0, 10.0};
    for (int trial = 0; trial < 200; ++trial) {
        ConfusionMatrix cm{cell(rng), cell(rng), cell(rng), cell(rng)};
        double p = precision(cm);
        double r = recall(cm);
        double previous = -1.0;
        for (double beta : betas) {
            double f = f_beta(cm, beta);
            CHECK(f >= std::min(p, r) - 1e-12);
            CHECK(f <= std::max(p, r) + 1e-12);
            if (p < r) {
                CHECK(f >= previous - 1e-12); // grows toward recall as beta grows
                previous = f;
            }
        }
    }
}

TEST_CASE("report row serialization") {
    ConfusionMatrix cm{9, 1, 9, 81};
    MetricsReport report = MetricsReport::compute(cm, 5.0, CostMatrix{0, 10, 1, 0});
    CHECK(report.beta == 5.0);
    CHECK(report.total_cost == 19.0);
    CHECK_FALSE(report.degenerate_precision);
    std::string row = report.csv_row("demo");
    CHECK(row.substr(0, 5) == "demo,");
    CHECK(std::count(row.begin(), row.end(), ',') == 9);
    std::string header = MetricsReport::csv_header();
    CHECK(std::count(header.begin(), header.end(), ',') == 9);
}

} // TEST_SUITE

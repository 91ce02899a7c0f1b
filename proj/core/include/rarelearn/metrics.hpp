#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "rarelearn/dataset.hpp"

namespace rarelearn {

struct ConfusionMatrix {
    std::uint64_t tp = 0;
    std::uint64_t fn = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;

    std::uint64_t total() const { return tp + fn + fp + tn; }
};

// Misclassification costs per (actual, predicted) cell. Correct cells may
// carry negative values to reward hits.
struct CostMatrix {
    double tp = 0.0;
    double fn = 0.0;
    double fp = 0.0;
    double tn = 0.0;
};

ConfusionMatrix confusion(std::span<const ClassLabel> labels,
                          std::span<const ClassLabel> predictions);

// tp / (tp + fp). A classifier that predicts no positives at all is a
// legitimate outcome on skewed data, so this returns 0 rather than failing;
// precision_is_degenerate reports that case.
double precision(const ConfusionMatrix& cm);
bool precision_is_degenerate(const ConfusionMatrix& cm);

// tp / (tp + fn); throws when the data contains no positive instances.
double recall(const ConfusionMatrix& cm);

// (1 + beta^2) P R / (beta^2 P + R), defined as 0 at P = R = 0.
double f_beta(const ConfusionMatrix& cm, double beta);

double accuracy(const ConfusionMatrix& cm);

// tp*c_tp + fn*c_fn + fp*c_fp + tn*c_tn
double total_cost(const ConfusionMatrix& cm, const CostMatrix& costs);

// All rates are with respect to the Positive (rare) class.
struct MetricsReport {
    double precision = 0.0;
    double recall = 0.0;
    double f_beta = 0.0;
    double accuracy = 0.0;
    double beta = 1.0;
    double total_cost = 0.0;
    bool degenerate_precision = false;
    ConfusionMatrix cm;

    static MetricsReport compute(const ConfusionMatrix& cm, double beta,
                                 const CostMatrix& costs = {});

    static const char* csv_header(); // model_id,precision,recall,f5,...
    std::string csv_row(const std::string& model_id) const;
};

} // namespace rarelearn

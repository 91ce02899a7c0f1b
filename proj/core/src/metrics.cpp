#include "rarelearn/metrics.hpp"

#include <stdexcept>

namespace rarelearn {

ConfusionMatrix confusion(std::span<const ClassLabel> labels,
                          std::span<const ClassLabel> predictions) {
    if (labels.size() != predictions.size())
        throw std::invalid_argument("confusion: labels and predictions differ in length");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        bool actual = labels[i] == ClassLabel::Positive;
        bool predicted = predictions[i] == ClassLabel::Positive;
        if (actual)
            ++(predicted ? cm.tp : cm.fn);
        else
            ++(predicted ? cm.fp : cm.tn);
    }
    return cm;
}

double precision(const ConfusionMatrix& cm) {
    std::uint64_t denom = cm.tp + cm.fp;
    if (denom == 0)
        return 0.0;
    return static_cast<double>(cm.tp) / static_cast<double>(denom);
}

bool precision_is_degenerate(const ConfusionMatrix& cm) {
    return cm.tp + cm.fp == 0;
}

double recall(const ConfusionMatrix& cm) {
    std::uint64_t denom = cm.tp + cm.fn;
    if (denom == 0)
        throw std::domain_error("recall undefined: no positive instances");
    return static_cast<double>(cm.tp) / static_cast<double>(denom);
}

double f_beta(const ConfusionMatrix& cm, double beta) {
    if (!(beta > 0.0))
        throw std::invalid_argument("beta must be positive");
    double p = precision(cm);
    double r = recall(cm);
    if (p == 0.0 && r == 0.0)
        return 0.0;
    double b2 = beta * beta;
    return (1.0 + b2) * p * r / (b2 * p + r);
}

double accuracy(const ConfusionMatrix& cm) {
    std::uint64_t t = cm.total();
    if (t == 0)
        throw std::domain_error("accuracy undefined on an empty confusion matrix");
    return static_cast<double>(cm.tp + cm.tn) / static_cast<double>(t);
}

double total_cost(const ConfusionMatrix& cm, const CostMatrix& costs) {
    return static_cast<double>(cm.tp) * costs.tp + static_cast<double>(cm.fn) * costs.fn +
           static_cast<double>(cm.fp) * costs.fp + static_cast<double>(cm.tn) * costs.tn;
}

MetricsReport MetricsReport::compute(const ConfusionMatrix& cm, double beta,
                                     const CostMatrix& costs) {
    MetricsReport r;
    r.cm = cm;
    r.beta = beta;
    r.precision = rarelearn::precision(cm);
    r.degenerate_precision = precision_is_degenerate(cm);
    r.recall = rarelearn::recall(cm);
    r.f_beta = rarelearn::f_beta(cm, beta);
    r.accuracy = rarelearn::accuracy(cm);
    r.total_cost = rarelearn::total_cost(cm, costs);
    return r;
}

const char* MetricsReport::csv_header() {
    return "model_id,precision,recall,f5,accuracy,total_cost,tp,fn,fp,tn";
}

std::string MetricsReport::csv_row(const std::string& model_id) const {
    std::string out = model_id;
    out += ',';
    out += format_double(precision);
    out += ',';
    out += format_double(recall);
    out += ',';
    out += format_double(f_beta);
    out += ',';
    out += format_double(accuracy);
    out += ',';
    out += format_double(total_cost);
    out += ',';
    out += std::to_string(cm.tp);
    out += ',';
    out += std::to_string(cm.fn);
    out += ',';
    out += std::to_string(cm.fp);
    out += ',';
    out += std::to_string(cm.tn);
    return out;
}

} // namespace rarelearn

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rarelearn/dataset.hpp"

namespace rarelearn {

struct MlpConfig {
    std::size_t hidden_units = 3;
    double decay = 0.0;          // L2 penalty on every connection weight and bias
    double learning_rate = 0.1;
    std::size_t max_iterations = 2000;
    double tolerance = 1e-8;     // stop when the accepted loss decrease falls below
    double init_range = 0.5;     // uniform(-r, r) initialization
    std::uint64_t seed = 0;
};

// Single hidden layer, sigmoid activations throughout. Inputs are
// standardized with the per-feature mean/sd frozen at fit time; w1 is
// row-major hidden x (inputs + 1) and w2 has hidden + 1 entries, the
// trailing column/entry being the bias.
struct MlpModel {
    std::size_t n_inputs = 0;
    std::size_t n_hidden = 0;
    std::vector<double> w1;
    std::vector<double> w2;
    std::vector<double> means;
    std::vector<double> sds;
};

// sigmoid(w2 . [sigmoid(W1 [z;1]); 1]) with z the standardized instance.
double mlp_forward(const MlpModel& model, std::span<const double> instance);

// Weighted binary cross-entropy, normalized by total weight, plus
// decay * sum of squared parameters. Probabilities clamp at 1e-12.
double mlp_loss(const MlpModel& model, const Dataset& ds,
                std::span<const double> instance_weights, double decay);

struct MlpGradient {
    std::vector<double> w1;
    std::vector<double> w2;
};

// Exact analytic gradient of mlp_loss with respect to every parameter.
MlpGradient mlp_gradient(const MlpModel& model, const Dataset& ds,
                         std::span<const double> instance_weights, double decay);

// Full-batch gradient descent with step halving; the accepted loss sequence
// is non-increasing. Deterministic given the config seed. Empty weights mean
// unit weights. loss_trace, when given, receives the accepted loss values in
// order, starting with the initial loss.
MlpModel train_mlp(const Dataset& ds, std::span<const double> instance_weights,
                   const MlpConfig& cfg, std::vector<double>* loss_trace = nullptr);

// Positive iff mlp_forward >= 0.5.
ClassLabel mlp_predict_label(const MlpModel& model, std::span<const double> instance);

std::string serialize(const MlpModel& model);
MlpModel deserialize_mlp(const std::string& text);

} // namespace rarelearn

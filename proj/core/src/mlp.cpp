#include "rarelearn/mlp.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "rarelearn/rng.hpp"

namespace rarelearn {

namespace {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

constexpr double prob_clamp = 1e-12;

Matrix sigmoid(const Matrix& a) {
    return ((-a.array()).exp() + 1.0).inverse().matrix();
}

Vector sigmoid(const Vector& a) {
    return ((-a.array()).exp() + 1.0).inverse().matrix();
}

// Standardized design matrix with trailing bias column, labels as 0/1, and
// normalized instance weights.
struct Batch {
    Matrix x;  // n x (inputs + 1)
    Vector y;  // 0/1
    Vector w;  // sums to 1
};

Batch make_batch(const Dataset& ds, std::span<const double> means, std::span<const double> sds,
                 std::span<const double> instance_weights) {
    const auto n = static_cast<Eigen::Index>(ds.n_rows());
    const auto d = static_cast<Eigen::Index>(ds.n_features());
    if (!instance_weights.empty() && instance_weights.size() != ds.n_rows())
        throw std::invalid_argument("instance weight count mismatch");
    Batch b;
    b.x.resize(n, d + 1);
    b.y.resize(n);
    b.w.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        auto row = ds.row(static_cast<std::size_t>(i));
        for (Eigen::Index j = 0; j < d; ++j)
            b.x(i, j) = (row[static_cast<std::size_t>(j)] - means[static_cast<std::size_t>(j)]) /
                        sds[static_cast<std::size_t>(j)];
        b.x(i, d) = 1.0;
        b.y(i) = ds.label(static_cast<std::size_t>(i)) == ClassLabel::Positive ? 1.0 : 0.0;
        b.w(i) = instance_weights.empty() ? 1.0 : instance_weights[static_cast<std::size_t>(i)];
    }
    double total = b.w.sum();
    if (!(total > 0.0))
        throw std::invalid_argument("instance weights must have positive total");
    b.w /= total;
    return b;
}

struct Params {
    Matrix w1; // hidden x (inputs + 1)
    Vector w2; // hidden + 1

    double squared_norm() const { return w1.squaredNorm() + w2.squaredNorm(); }
};

Params to_params(const MlpModel& m) {
    Params p;
    p.w1.resize(static_cast<Eigen::Index>(m.n_hidden), static_cast<Eigen::Index>(m.n_inputs + 1));
    for (Eigen::Index i = 0; i < p.w1.size(); ++i)
        p.w1.data()[i] = m.w1[static_cast<std::size_t>(i)];
    p.w2.resize(static_cast<Eigen::Index>(m.n_hidden + 1));
    for (Eigen::Index i = 0; i < p.w2.size(); ++i)
        p.w2[i] = m.w2[static_cast<std::size_t>(i)];
    return p;
}

void store_params(const Params& p, MlpModel& m) {
    m.w1.assign(p.w1.data(), p.w1.data() + p.w1.size());
    m.w2.assign(p.w2.data(), p.w2.data() + p.w2.size());
}

// Forward pass over the whole batch: hidden activations and output probs.
struct Activation {
    Matrix hidden; // n x hidden (no bias column)
    Vector prob;   // n
};

Activation run_forward(const Batch& b, const Params& p) {
    Activation a;
    a.hidden = sigmoid(Matrix(b.x * p.w1.transpose()));
    Vector z = a.hidden * p.w2.head(p.w2.size() - 1) +
               Vector::Constant(b.x.rows(), p.w2(p.w2.size() - 1));
    a.prob = sigmoid(z);
    return a;
}

double batch_loss(const Batch& b, const Params& p, double decay, const Activation& a) {
    auto prob = a.prob.array().min(1.0 - prob_clamp).max(prob_clamp);
    auto bce = -(b.y.array() * prob.log() + (1.0 - b.y.array()) * (1.0 - prob).log());
    double data_term = (b.w.array() * bce).sum();
    double value = data_term + decay * p.squared_norm();
    if (!std::isfinite(value))
        throw std::runtime_error("mlp: non-finite loss");
    return value;
}

Params batch_gradient(const Batch& b, const Params& p, double decay, const Activation& a) {
    const Eigen::Index h = p.w1.rows();
    // d(loss)/dz per instance; weights are pre-normalized to sum 1
    Vector coef = (b.w.array() * (a.prob - b.y).array()).matrix();
    Params g;
    g.w2.resize(h + 1);
    g.w2.head(h) = a.hidden.transpose() * coef;
    g.w2(h) = coef.sum();
    Matrix delta =
        (a.hidden.array() * (1.0 - a.hidden.array())).colwise() * coef.array(); // n x h
    delta = delta.array().rowwise() * p.w2.head(h).transpose().array();
    g.w1 = delta.transpose() * b.x;
    g.w1 += 2.0 * decay * p.w1;
    g.w2 += 2.0 * decay * p.w2;
    return g;
}

void check_model_arity(const MlpModel& m) {
    if (m.w1.size() != m.n_hidden * (m.n_inputs + 1) || m.w2.size() != m.n_hidden + 1 ||
        m.means.size() != m.n_inputs || m.sds.size() != m.n_inputs)
        throw std::invalid_argument("mlp: inconsistent model dimensions");
}

} // namespace

double mlp_forward(const MlpModel& model, std::span<const double> instance) {
    check_model_arity(model);
    if (instance.size() != model.n_inputs)
        throw std::invalid_argument("mlp_forward: instance arity mismatch");
    double z_out = model.w2[model.n_hidden];
    for (std::size_t j = 0; j < model.n_hidden; ++j) {
        double a = model.w1[j * (model.n_inputs + 1) + model.n_inputs]; // bias
        for (std::size_t k = 0; k < model.n_inputs; ++k) {
            double zk = (instance[k] - model.means[k]) / model.sds[k];
            a += model.w1[j * (model.n_inputs + 1) + k] * zk;
        }
        z_out += model.w2[j] / (1.0 + std::exp(-a));
    }
    return 1.0 / (1.0 + std::exp(-z_out));
}

double mlp_loss(const MlpModel& model, const Dataset& ds,
                std::span<const double> instance_weights, double decay) {
    check_model_arity(model);
    if (ds.n_rows() == 0)
        throw std::invalid_argument("mlp_loss: empty dataset");
    Batch b = make_batch(ds, model.means, model.sds, instance_weights);
    Params p = to_params(model);
    return batch_loss(b, p, decay, run_forward(b, p));
}

MlpGradient mlp_gradient(const MlpModel& model, const Dataset& ds,
                         std::span<const double> instance_weights, double decay) {
    check_model_arity(model);
    if (ds.n_rows() == 0)
        throw std::invalid_argument("mlp_gradient: empty dataset");
    Batch b = make_batch(ds, model.means, model.sds, instance_weights);
    Params p = to_params(model);
    Params g = batch_gradient(b, p, decay, run_forward(b, p));
    MlpGradient out;
    out.w1.assign(g.w1.data(), g.w1.data() + g.w1.size());
    out.w2.assign(g.w2.data(), g.w2.data() + g.w2.size());
    return out;
}

MlpModel train_mlp(const Dataset& ds, std::span<const double> instance_weights,
                   const MlpConfig& cfg, std::vector<double>* loss_trace) {
    if (ds.n_rows() == 0)
        throw std::invalid_argument("train_mlp: empty dataset");
    ClassCounts counts = class_counts(ds);
    if (counts.positive == 0 || counts.negative == 0)
        throw std::invalid_argument("train_mlp: both classes must be present");
    if (cfg.hidden_units < 1 || !(cfg.learning_rate > 0.0) || !(cfg.init_range > 0.0) ||
        cfg.decay < 0.0 || cfg.tolerance < 0.0 || cfg.max_iterations < 1)
        throw std::invalid_argument("train_mlp: invalid config");

    MlpModel model;
    model.n_inputs = ds.n_features();
    model.n_hidden = cfg.hidden_units;

    // Freeze standardization; constant features standardize to zero.
    model.means.assign(model.n_inputs, 0.0);
    model.sds.assign(model.n_inputs, 1.0);
    const double n = static_cast<double>(ds.n_rows());
    for (std::size_t j = 0; j < model.n_inputs; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < ds.n_rows(); ++i)
            mean += ds.value(i, j);
        mean /= n;
        double sq = 0.0;
        for (std::size_t i = 0; i < ds.n_rows(); ++i) {
            double d = ds.value(i, j) - mean;
            sq += d * d;
        }
        double sd = std::sqrt(sq / n);
        model.means[j] = mean;
        model.sds[j] = sd > 0.0 ? sd : 1.0;
    }

    Batch b = make_batch(ds, model.means, model.sds, instance_weights);

    Params p;
    p.w1.resize(static_cast<Eigen::Index>(model.n_hidden),
                static_cast<Eigen::Index>(model.n_inputs + 1));
    p.w2.resize(static_cast<Eigen::Index>(model.n_hidden + 1));
    auto rng = make_rng(derive_seed(cfg.seed, "mlp-init"));
    std::uniform_real_distribution<double> init(-cfg.init_range, cfg.init_range);
    for (Eigen::Index i = 0; i < p.w1.size(); ++i)
        p.w1.data()[i] = init(rng);
    for (Eigen::Index i = 0; i < p.w2.size(); ++i)
        p.w2[i] = init(rng);

    double loss = batch_loss(b, p, cfg.decay, run_forward(b, p));
    if (loss_trace)
        loss_trace->push_back(loss);
    double step = cfg.learning_rate;
    for (std::size_t iter = 0; iter < cfg.max_iterations; ++iter) {
        Params g = batch_gradient(b, p, cfg.decay, run_forward(b, p));
        Params trial;
        double trial_loss = 0.0;
        int halvings = 0;
        for (;; ++halvings) {
            trial.w1 = p.w1 - step * g.w1;
            trial.w2 = p.w2 - step * g.w2;
            trial_loss = batch_loss(b, trial, cfg.decay, run_forward(b, trial));
            if (trial_loss <= loss)
                break;
            if (halvings >= 30)
                break;
            step *= 0.5;
        }
        if (trial_loss > loss)
            break; // halvings exhausted
        double improvement = loss - trial_loss;
        p = std::move(trial);
        loss = trial_loss;
        if (loss_trace)
            loss_trace->push_back(loss);
        if (halvings == 0)
            step = std::min(step * 2.0, cfg.learning_rate * 1024.0);
        if (improvement < cfg.tolerance)
            break;
    }

    store_params(p, model);
    return model;
}

ClassLabel mlp_predict_label(const MlpModel& model, std::span<const double> instance) {
    return mlp_forward(model, instance) >= 0.5 ? ClassLabel::Positive : ClassLabel::Negative;
}

std::string serialize(const MlpModel& model) {
    check_model_arity(model);
    std::string out = "mlp " + std::to_string(model.n_inputs) + ' ' +
                      std::to_string(model.n_hidden) + '\n';
    auto append_line = [&out](const char* tag, const std::vector<double>& v) {
        out += tag;
        for (double x : v) {
            out += ' ';
            out += format_double(x);
        }
        out += '\n';
    };
    append_line("means", model.means);
    append_line("sds", model.sds);
    append_line("w1", model.w1);
    append_line("w2", model.w2);
    return out;
}

MlpModel deserialize_mlp(const std::string& text) {
    std::istringstream in(text);
    std::string tag;
    MlpModel m;
    if (!(in >> tag >> m.n_inputs >> m.n_hidden) || tag != "mlp")
        throw std::runtime_error("mlp parse: bad header");
    auto read_line = [&in](const char* expect, std::vector<double>& v, std::size_t count) {
        std::string t;
        if (!(in >> t) || t != expect)
            throw std::runtime_error(std::string("mlp parse: expected ") + expect);
        v.resize(count);
        for (auto& x : v)
            if (!(in >> x))
                throw std::runtime_error(std::string("mlp parse: truncated ") + expect);
    };
    read_line("means", m.means, m.n_inputs);
    read_line("sds", m.sds, m.n_inputs);
    read_line("w1", m.w1, m.n_hidden * (m.n_inputs + 1));
    read_line("w2", m.w2, m.n_hidden + 1);
    return m;
}

} // namespace rarelearn

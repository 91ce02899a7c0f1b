#include "rarelearn/model_selection.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <numeric>
#include <stdexcept>

#include "rarelearn/parallel.hpp"
#include "rarelearn/rng.hpp"

namespace rarelearn {

const char* handler_name(HandlerKind k) {
    switch (k) {
    case HandlerKind::None: return "none";
    case HandlerKind::Down: return "down";
    case HandlerKind::Up: return "up";
    case HandlerKind::Hybrid: return "hybrid";
    case HandlerKind::CaseWeights: return "weights";
    case HandlerKind::CostSensitive: return "cost";
    }
    return "?";
}

const char* family_name(ModelFamily f) {
    switch (f) {
    case ModelFamily::SingleTree: return "single_tree";
    case ModelFamily::BaggingTrees: return "bagging";
    case ModelFamily::NeuralNet: return "nn";
    }
    return "?";
}

std::vector<ModelSpec> experiment_specs() {
    std::vector<ModelSpec> specs;
    const HandlerKind tree_handlers[] = {HandlerKind::None,        HandlerKind::Down,
                                         HandlerKind::Up,          HandlerKind::Hybrid,
                                         HandlerKind::CaseWeights, HandlerKind::CostSensitive};
    const HandlerKind net_handlers[] = {HandlerKind::None, HandlerKind::Down, HandlerKind::Up,
                                        HandlerKind::Hybrid, HandlerKind::CaseWeights};
    auto add = [&specs](ModelFamily family, HandlerKind kind) {
        ModelSpec s;
        s.family = family;
        s.handler.kind = kind;
        s.id = family_name(family);
        if (kind != HandlerKind::None)
            s.id += std::string("_") + handler_name(kind);
        specs.push_back(std::move(s));
    };
    for (HandlerKind k : tree_handlers)
        add(ModelFamily::SingleTree, k);
    for (HandlerKind k : tree_handlers)
        add(ModelFamily::BaggingTrees, k);
    for (HandlerKind k : net_handlers)
        add(ModelFamily::NeuralNet, k);
    return specs;
}

std::vector<ParamPoint> param_grid(const ModelSpec& spec) {
    if (spec.family == ModelFamily::NeuralNet && spec.handler.kind == HandlerKind::CostSensitive)
        throw std::invalid_argument("cost-sensitive learning applies to tree families only");
    const double cps[] = {0.0, 0.0001, 0.0005, 0.001};
    const std::size_t trials[] = {1, 5, 10, 50};
    const std::size_t sizes[] = {1, 3, 5};
    const double decays[] = {0.1, 0.0001, 0.0}; // larger decay counts as simpler
    const double cost_fns[] = {10.0, 100.0, 1000.0};

    std::vector<ParamPoint> grid;
    const bool cost = spec.handler.kind == HandlerKind::CostSensitive;
    switch (spec.family) {
    case ModelFamily::SingleTree:
        for (double cp : cps) {
            ParamPoint p;
            p.cp = cp;
            if (cost) {
                for (double c : cost_fns) {
                    p.cost_fn = c;
                    grid.push_back(p);
                }
            } else {
                grid.push_back(p);
            }
        }
        break;
    case ModelFamily::BaggingTrees:
        for (std::size_t t : trials) {
            ParamPoint p;
            p.trials = t;
            if (cost) {
                for (double c : cost_fns) {
                    p.cost_fn = c;
                    grid.push_back(p);
                }
            } else {
                grid.push_back(p);
            }
        }
        break;
    case ModelFamily::NeuralNet:
        for (std::size_t s : sizes) {
            for (double d : decays) {
                ParamPoint p;
                p.hidden = s;
                p.decay = d;
                grid.push_back(p);
            }
        }
        break;
    }
    return grid;
}

std::string describe_point(const ModelSpec& spec, const ParamPoint& point) {
    std::string out;
    switch (spec.family) {
    case ModelFamily::SingleTree:
        out = "cp=" + format_double(point.cp);
        break;
    case ModelFamily::BaggingTrees:
        out = "trials=" + std::to_string(point.trials);
        break;
    case ModelFamily::NeuralNet:
        out = "size=" + std::to_string(point.hidden) + ";decay=" + format_double(point.decay);
        break;
    }
    if (spec.handler.kind == HandlerKind::CostSensitive)
        out += ";C_FN=" + format_double(point.cost_fn);
    return out;
}

std::vector<std::vector<std::size_t>> stratified_kfold(const Dataset& ds, std::size_t k,
                                                       std::uint64_t seed) {
    if (k < 2)
        throw std::invalid_argument("stratified_kfold: k must be >= 2");
    ClassCounts counts = class_counts(ds);
    if (counts.positive == 0 || counts.negative == 0)
        throw std::invalid_argument("stratified_kfold: both classes must be present");
    std::size_t minority = std::min(counts.positive, counts.negative);
    if (k > minority)
        std::cerr << "warning: k=" << k << " exceeds minority count " << minority
                  << "; some folds will lack positives\n";

    // One continuous round-robin deal across both classes: per-class fold
    // sizes differ by at most one and so do the overall fold sizes.
    std::vector<std::vector<std::size_t>> folds(k);
    std::size_t next_fold = 0;
    auto deal = [&](ClassLabel cls, std::uint64_t salt) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < ds.n_rows(); ++i)
            if (ds.label(i) == cls)
                idx.push_back(i);
        auto rng = make_rng(derive_seed(seed, salt));
        std::shuffle(idx.begin(), idx.end(), rng);
        for (std::size_t i : idx) {
            folds[next_fold].push_back(i);
            next_fold = (next_fold + 1) % k;
        }
    };
    deal(ClassLabel::Positive, fnv1a("positive"));
    deal(ClassLabel::Negative, fnv1a("negative"));
    for (auto& f : folds)
        std::sort(f.begin(), f.end());
    return folds;
}

ClassLabel predict_label(const FittedModel& model, std::span<const double> instance) {
    return std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, MlpModel>)
                return mlp_predict_label(m, instance);
            else
                return predict(m, instance);
        },
        model);
}

PreparedTraining prepare_training(const ModelSpec& spec, const ParamPoint& point,
                                  const Dataset& training, std::uint64_t seed) {
    PreparedTraining out;
    switch (spec.handler.kind) {
    case HandlerKind::None:
        out.data = training;
        break;
    case HandlerKind::Down: {
        ResampleOutcome r = random_under_sample(training, derive_seed(seed, "resample"));
        out.data = std::move(r.dataset);
        for (const auto& p : r.provenance)
            out.source_rows.push_back(p.source);
        break;
    }
    case HandlerKind::Up: {
        ResampleOutcome r = random_over_sample(training, derive_seed(seed, "resample"));
        out.data = std::move(r.dataset);
        for (const auto& p : r.provenance)
            out.source_rows.push_back(p.source);
        break;
    }
    case HandlerKind::Hybrid: {
        SmoteConfig cfg = spec.handler.smote;
        cfg.seed = derive_seed(seed, "smote");
        ResampleOutcome r = hybrid_smote_under(training, cfg, derive_seed(seed, "under"));
        out.data = std::move(r.dataset);
        for (const auto& p : r.provenance) {
            out.source_rows.push_back(p.source);
            if (p.neighbor != no_row)
                out.source_rows.push_back(p.neighbor);
        }
        break;
    }
    case HandlerKind::CaseWeights:
        out.data = training;
        out.data.set_weights(class_weights(training));
        break;
    case HandlerKind::CostSensitive:
        out.data = training;
        out.cost_mode = true;
        out.cost = CostMatrix{0.0, point.cost_fn, 1.0, 0.0};
        break;
    }
    if (out.source_rows.empty() && spec.handler.kind != HandlerKind::Down &&
        spec.handler.kind != HandlerKind::Up && spec.handler.kind != HandlerKind::Hybrid) {
        out.source_rows.resize(training.n_rows());
        std::iota(out.source_rows.begin(), out.source_rows.end(), std::size_t{0});
    }
    return out;
}

FittedModel fit_model(const ModelSpec& spec, const ParamPoint& point,
                      const PreparedTraining& prepared, std::uint64_t seed) {
    const Dataset& data = prepared.data;
    switch (spec.family) {
    case ModelFamily::SingleTree: {
        GrowConfig cfg;
        cfg.min_leaf = experiment_min_leaf;
        cfg.cp = point.cp;
        if (prepared.cost_mode) {
            cfg.mode = SplitMode::Cost;
            cfg.cost = prepared.cost;
        }
        Tree t = grow(data, data.weights(), cfg);
        return prune(t, point.cp);
    }
    case ModelFamily::BaggingTrees: {
        BaggingConfig cfg;
        cfg.trials = point.trials;
        cfg.seed = derive_seed(seed, "bagging");
        cfg.base.min_leaf = experiment_min_leaf;
        cfg.use_case_weights = data.has_weights();
        if (prepared.cost_mode) {
            cfg.base.mode = SplitMode::Cost;
            cfg.base.cost = prepared.cost;
        }
        return fit_bagging(data, cfg);
    }
    case ModelFamily::NeuralNet: {
        MlpConfig cfg;
        cfg.hidden_units = point.hidden;
        cfg.decay = point.decay;
        cfg.seed = derive_seed(seed, "mlp");
        return train_mlp(data, data.weights(), cfg);
    }
    }
    throw std::logic_error("unknown model family");
}

CvResult cross_validate(const ModelSpec& spec, const ParamPoint& point, const Dataset& ds,
                        std::size_t k, std::uint64_t seed, bool collect_audits) {
    auto folds = stratified_kfold(ds, k, derive_seed(seed, "kfold"));
    std::uint64_t spec_seed =
        derive_seed(derive_seed(seed, spec.id), fnv1a(describe_point(spec, point)));

    CvResult result;
    result.fold_f5.resize(k);
    if (collect_audits)
        result.audits.resize(k);

    for (std::size_t i = 0; i < k; ++i) {
        const auto& val_idx = folds[i];
        std::vector<std::size_t> train_idx;
        train_idx.reserve(ds.n_rows() - val_idx.size());
        for (std::size_t f = 0; f < k; ++f)
            if (f != i)
                train_idx.insert(train_idx.end(), folds[f].begin(), folds[f].end());
        std::sort(train_idx.begin(), train_idx.end());

        std::uint64_t fold_seed = derive_seed(spec_seed, i);
        Dataset training = subset(ds, train_idx);
        PreparedTraining prepared = prepare_training(spec, point, training, fold_seed);
        FittedModel model = fit_model(spec, point, prepared, derive_seed(fold_seed, "fit"));

        std::vector<ClassLabel> truth, preds;
        truth.reserve(val_idx.size());
        preds.reserve(val_idx.size());
        for (std::size_t row : val_idx) {
            truth.push_back(ds.label(row));
            preds.push_back(predict_label(model, ds.row(row)));
        }
        ConfusionMatrix cm = confusion(truth, preds);

        bool zero_pos = cm.tp + cm.fn == 0;
        if (zero_pos) {
            std::cerr << "warning: validation fold " << i << " of spec " << spec.id
                      << " has no positive instances; scoring F5 = 0\n";
            result.fold_f5[i] = 0.0;
        } else {
            result.fold_f5[i] = f_beta(cm, f_score_beta);
        }

        if (collect_audits) {
            FoldAudit& audit = result.audits[i];
            audit.validation_indices = val_idx;
            audit.validation_rows = val_idx.size();
            audit.validation_positives = cm.tp + cm.fn;
            audit.zero_positive_fold = zero_pos;
            ClassCounts learner_counts = class_counts(prepared.data);
            audit.learner_rows = prepared.data.n_rows();
            audit.learner_positives = learner_counts.positive;
            audit.learner_negatives = learner_counts.negative;
            audit.training_sources.reserve(prepared.source_rows.size());
            for (std::size_t local : prepared.source_rows)
                audit.training_sources.push_back(train_idx[local]);
        }
    }
    result.mean_f5 =
        std::accumulate(result.fold_f5.begin(), result.fold_f5.end(), 0.0) /
        static_cast<double>(k);
    return result;
}

namespace {

std::vector<ModelSpec> filtered_specs(const std::vector<std::string>& filter) {
    std::vector<ModelSpec> all = experiment_specs();
    if (filter.empty())
        return all;
    std::vector<ModelSpec> out;
    for (const std::string& id : filter) {
        auto it = std::find_if(all.begin(), all.end(),
                               [&id](const ModelSpec& s) { return s.id == id; });
        if (it == all.end())
            throw std::invalid_argument("unknown spec id: " + id);
        out.push_back(*it);
    }
    return out;
}

} // namespace

std::vector<TuningRow> grid_search(ModelFamily family, const Dataset& ds, std::size_t k,
                                   std::uint64_t seed) {
    std::vector<TuningRow> rows;
    for (const ModelSpec& spec : experiment_specs()) {
        if (spec.family != family)
            continue;
        auto grid = param_grid(spec);
        if (grid.empty())
            throw std::logic_error("empty parameter grid");
        std::size_t best = 0;
        std::vector<double> scores(grid.size());
        for (std::size_t g = 0; g < grid.size(); ++g) {
            scores[g] = cross_validate(spec, grid[g], ds, k, seed).mean_f5;
            if (scores[g] > scores[best])
                best = g;
        }
        for (std::size_t g = 0; g < grid.size(); ++g)
            rows.push_back({spec.id, grid[g], describe_point(spec, grid[g]), scores[g],
                            g == best});
    }
    return rows;
}

TuningReport run_experiment(const Dataset& train, const Dataset& test, std::uint64_t seed,
                            const ExperimentOptions& options) {
    if (train.n_features() != test.n_features())
        throw std::invalid_argument("run_experiment: train/test schema mismatch");
    const std::vector<ModelSpec> specs = filtered_specs(options.spec_filter);

    struct Task {
        std::size_t spec_idx;
        std::size_t grid_idx;
        ParamPoint point;
    };
    std::vector<std::vector<ParamPoint>> grids;
    std::vector<Task> tasks;
    for (std::size_t s = 0; s < specs.size(); ++s) {
        grids.push_back(param_grid(specs[s]));
        for (std::size_t g = 0; g < grids.back().size(); ++g)
            tasks.push_back({s, g, grids.back()[g]});
    }

    std::vector<double> scores(tasks.size());
    parallel_for(tasks.size(), options.jobs, [&](std::size_t t) {
        scores[t] = cross_validate(specs[tasks[t].spec_idx], tasks[t].point, train,
                                   options.folds, seed)
                        .mean_f5;
    });

    TuningReport report;
    std::vector<std::size_t> selected(specs.size(), 0);
    {
        std::vector<double> best_score(specs.size(),
                                       -std::numeric_limits<double>::infinity());
        for (std::size_t t = 0; t < tasks.size(); ++t) {
            const Task& task = tasks[t];
            if (scores[t] > best_score[task.spec_idx]) {
                best_score[task.spec_idx] = scores[t];
                selected[task.spec_idx] = task.grid_idx;
            }
        }
        for (std::size_t t = 0; t < tasks.size(); ++t) {
            const Task& task = tasks[t];
            report.tuning.push_back({specs[task.spec_idx].id, task.point,
                                     describe_point(specs[task.spec_idx], task.point),
                                     scores[t], selected[task.spec_idx] == task.grid_idx});
        }
    }

    // Refit each spec at its selected point on the full training set and
    // score the untouched test set.
    report.test_rows.resize(specs.size());
    parallel_for(specs.size(), options.jobs, [&](std::size_t s) {
        const ModelSpec& spec = specs[s];
        const ParamPoint& point = grids[s][selected[s]];
        std::uint64_t refit_seed = derive_seed(derive_seed(seed, spec.id), "refit");
        PreparedTraining prepared = prepare_training(spec, point, train, refit_seed);
        FittedModel model = fit_model(spec, point, prepared, derive_seed(refit_seed, "fit"));
        std::vector<ClassLabel> preds;
        preds.reserve(test.n_rows());
        for (std::size_t i = 0; i < test.n_rows(); ++i)
            preds.push_back(predict_label(model, test.row(i)));
        ConfusionMatrix cm = confusion(test.labels(), preds);
        report.test_rows[s] = {spec.id, point, describe_point(spec, point),
                               MetricsReport::compute(cm, f_score_beta)};
    });

    std::stable_sort(report.test_rows.begin(), report.test_rows.end(),
                     [](const TestRow& a, const TestRow& b) {
                         if (a.metrics.recall != b.metrics.recall)
                             return a.metrics.recall > b.metrics.recall;
                         return a.spec_id < b.spec_id;
                     });
    return report;
}

void write_tuning_csv(const TuningReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << "spec_id,params,mean_cv_f5,selected\n";
    for (const TuningRow& row : report.tuning)
        out << row.spec_id << ',' << row.params << ',' << format_double(row.mean_cv_f5) << ','
            << (row.selected ? 1 : 0) << '\n';
    if (!out)
        throw std::runtime_error("write failed: " + path.string());
}

void write_test_results_csv(const TuningReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << "spec_id,precision,recall,f5,accuracy\n";
    for (const TestRow& row : report.test_rows)
        out << row.spec_id << ',' << format_double(row.metrics.precision) << ','
            << format_double(row.metrics.recall) << ',' << format_double(row.metrics.f_beta)
            << ',' << format_double(row.metrics.accuracy) << '\n';
    if (!out)
        throw std::runtime_error("write failed: " + path.string());
}

} // namespace rarelearn

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rarelearn/bagging.hpp"
#include "rarelearn/dataset.hpp"
#include "rarelearn/imbalance.hpp"
#include "rarelearn/metrics.hpp"
#include "rarelearn/mlp.hpp"
#include "rarelearn/tree.hpp"

namespace rarelearn {

// Recall is weighted far above precision when scoring dropout detectors.
inline constexpr double f_score_beta = 5.0;

// Minimum leaf size for every tree the experiment engine grows. Leaves keep
// a handful of instances, so case weights and cost matrices can move leaf
// labels instead of acting on split order alone.
inline constexpr std::size_t experiment_min_leaf = 7;

enum class HandlerKind : std::uint8_t { None, Down, Up, Hybrid, CaseWeights, CostSensitive };

const char* handler_name(HandlerKind k);

// CostSensitive pairs only with tree-based families.
struct ImbalanceHandler {
    HandlerKind kind = HandlerKind::None;
    SmoteConfig smote{}; // Hybrid parameters (seed is derived per use)
};

enum class ModelFamily : std::uint8_t { SingleTree, BaggingTrees, NeuralNet };

const char* family_name(ModelFamily f);

// One point of a family's tuning grid. Only the fields the family reads are
// meaningful; cost_fn applies when the handler is CostSensitive.
struct ParamPoint {
    double cp = 0.0;
    std::size_t trials = 1;
    std::size_t hidden = 1;
    double decay = 0.0;
    double cost_fn = 0.0;
};

struct ModelSpec {
    ModelFamily family = ModelFamily::SingleTree;
    ImbalanceHandler handler{};
    std::string id;
};

// The classifier-by-handler experiment matrix: 6 single-tree, 6 bagging and
// 5 neural-net configurations.
std::vector<ModelSpec> experiment_specs();

// Grid points in canonical order, simplest first: cp/trials/size ascending,
// decay descending, C_FN ascending. Tie scores resolve to the earlier point.
std::vector<ParamPoint> param_grid(const ModelSpec& spec);

std::string describe_point(const ModelSpec& spec, const ParamPoint& point);

// Index folds that partition the dataset with per-class sizes differing by
// at most one. Warns (stderr) when k exceeds the minority count.
std::vector<std::vector<std::size_t>> stratified_kfold(const Dataset& ds, std::size_t k,
                                                       std::uint64_t seed);

using FittedModel = std::variant<Tree, Ensemble, MlpModel>;

ClassLabel predict_label(const FittedModel& model, std::span<const double> instance);

// Handler-transformed training data ready for fitting. For resampling
// handlers, source_rows maps every learner input row back to a row of the
// handler's input (synthetics list both interpolation parents).
struct PreparedTraining {
    Dataset data;
    std::vector<std::size_t> source_rows;
    bool cost_mode = false;
    CostMatrix cost{};
};

PreparedTraining prepare_training(const ModelSpec& spec, const ParamPoint& point,
                                  const Dataset& training, std::uint64_t seed);

FittedModel fit_model(const ModelSpec& spec, const ParamPoint& point,
                      const PreparedTraining& prepared, std::uint64_t seed);

struct FoldAudit {
    std::vector<std::size_t> validation_indices; // into the CV dataset
    std::vector<std::size_t> training_sources;   // into the CV dataset
    std::size_t validation_rows = 0;
    std::size_t validation_positives = 0;
    std::size_t learner_rows = 0; // rows actually handed to the learner
    std::size_t learner_positives = 0;
    std::size_t learner_negatives = 0;
    bool zero_positive_fold = false;
};

struct CvResult {
    double mean_f5 = 0.0;
    std::vector<double> fold_f5;
    std::vector<FoldAudit> audits; // filled when requested
};

// Fig-3 protocol: the handler transforms only the k-1 training folds of each
// iteration; every validation fold keeps the original imbalance. The fold
// assignment depends only on (ds, k, seed), so all specs evaluated with one
// master seed share identical folds. A fold without positives scores 0 with
// a diagnostic rather than being skipped.
CvResult cross_validate(const ModelSpec& spec, const ParamPoint& point, const Dataset& ds,
                        std::size_t k, std::uint64_t seed, bool collect_audits = false);

struct TuningRow {
    std::string spec_id;
    ParamPoint point;
    std::string params; // human-readable point description
    double mean_cv_f5 = 0.0;
    bool selected = false;
};

struct TestRow {
    std::string spec_id;
    ParamPoint point;
    std::string params;
    MetricsReport metrics;
};

struct TuningReport {
    std::vector<TuningRow> tuning;
    std::vector<TestRow> test_rows; // sorted by test recall, descending
};

// Evaluates every grid point of every spec in the family by CV F5.
std::vector<TuningRow> grid_search(ModelFamily family, const Dataset& ds, std::size_t k,
                                   std::uint64_t seed);

struct ExperimentOptions {
    std::size_t folds = 5;
    std::size_t jobs = 1;
    std::vector<std::string> spec_filter; // empty = all 17
};

// Grid-tunes each spec on the training set, refits at the selected point on
// the full handler-transformed training set, and scores the untouched test
// set. Byte-identical output for equal seeds regardless of jobs.
TuningReport run_experiment(const Dataset& train, const Dataset& test, std::uint64_t seed,
                            const ExperimentOptions& options = {});

void write_tuning_csv(const TuningReport& report, const std::filesystem::path& path);
void write_test_results_csv(const TuningReport& report, const std::filesystem::path& path);

} // namespace rarelearn

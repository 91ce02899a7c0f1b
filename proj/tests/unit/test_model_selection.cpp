#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "rarelearn/model_selection.hpp"
#include "rarelearn/rng.hpp"
#include "test_helpers.hpp"

using namespace rarelearn;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ModelSpec spec_by_id(const std::string& id) {
    for (const ModelSpec& s : experiment_specs())
        if (s.id == id)
            return s;
    throw std::logic_error("no such spec: " + id);
}

} // namespace

TEST_SUITE("model_selection") {

TEST_CASE("the experiment matrix has exactly 17 specs") {
    auto specs = experiment_specs();
    CHECK(specs.size() == 17);
    std::set<std::string> ids;
    std::size_t trees = 0, bags = 0, nets = 0;
    for (const ModelSpec& s : specs) {
        ids.insert(s.id);
        switch (s.family) {
        case ModelFamily::SingleTree: ++trees; break;
        case ModelFamily::BaggingTrees: ++bags; break;
        case ModelFamily::NeuralNet: ++nets; break;
        }
        if (s.family == ModelFamily::NeuralNet)
            CHECK(s.handler.kind != HandlerKind::CostSensitive);
    }
    CHECK(ids.size() == 17);
    CHECK(trees == 6);
    CHECK(bags == 6);
    CHECK(nets == 5);
}

TEST_CASE("grid sizes follow the configured parameter sets") {
    CHECK(param_grid(spec_by_id("single_tree")).size() == 4);
    CHECK(param_grid(spec_by_id("single_tree_cost")).size() == 12);
    CHECK(param_grid(spec_by_id("bagging")).size() == 4);
    CHECK(param_grid(spec_by_id("bagging_cost")).size() == 12);
    CHECK(param_grid(spec_by_id("nn")).size() == 9);

    // simplest point first: ties resolve to it
    auto tree_grid = param_grid(spec_by_id("single_tree"));
    CHECK(tree_grid.front().cp == 0.0);
    auto nn_grid = param_grid(spec_by_id("nn"));
    CHECK(nn_grid.front().hidden == 1);
    CHECK(nn_grid.front().decay == 0.1);
    auto cost_grid = param_grid(spec_by_id("single_tree_cost"));
    CHECK(cost_grid.front().cost_fn == 10.0);

    ModelSpec bad = spec_by_id("nn");
    bad.handler.kind = HandlerKind::CostSensitive;
    CHECK_THROWS_AS(param_grid(bad), std::invalid_argument);
}

TEST_CASE("describe_point names the family parameters") {
    CHECK(describe_point(spec_by_id("single_tree"), param_grid(spec_by_id("single_tree"))[2]) ==
          "cp=0.0005");
    auto bag_cost = spec_by_id("bagging_cost");
    auto p = param_grid(bag_cost)[5]; // trials=5, C_FN=1000
    CHECK(describe_point(bag_cost, p) == "trials=5;C_FN=1000");
    auto nn = spec_by_id("nn");
    CHECK(describe_point(nn, param_grid(nn)[1]) == "size=1;decay=0.0001");
}

TEST_CASE("stratified_kfold deals classes within one count") {
    Dataset ds = testing::two_class_blobs(4, 96, 2, 7);
    auto folds = stratified_kfold(ds, 5, 3);
    REQUIRE(folds.size() == 5);
    std::size_t with_pos = 0;
    std::set<std::size_t> seen;
    for (const auto& fold : folds) {
        CHECK(fold.size() == 20); // the continuous deal balances overall sizes
        std::size_t pos = 0;
        for (std::size_t i : fold) {
            CHECK(seen.insert(i).second); // disjoint
            pos += ds.label(i) == ClassLabel::Positive ? 1 : 0;
        }
        with_pos += pos > 0 ? 1 : 0;
        CHECK(pos <= 1);
    }
    CHECK(seen.size() == ds.n_rows()); // partition
    CHECK(with_pos == 4);              // pigeonhole: one fold has no positive
}

TEST_CASE("stratified_kfold on balanced ten rows with k=2") {
    Dataset ds = testing::two_class_blobs(5, 5, 2, 9);
    auto folds = stratified_kfold(ds, 2, 1);
    CHECK(folds[0].size() == 5);
    CHECK(folds[1].size() == 5);
    for (const auto& fold : folds) {
        std::size_t pos = 0;
        for (std::size_t i : fold)
            pos += ds.label(i) == ClassLabel::Positive ? 1 : 0;
        CHECK(pos >= 2);
        CHECK(pos <= 3);
    }
}

TEST_CASE("cross_validate keeps validation folds imbalanced for every handler") {
    Dataset ds = testing::coarse_random_dataset(400, 3, 4, 0.10, 11);
    ClassCounts counts = class_counts(ds);
    double full_rate = static_cast<double>(counts.positive) /
                       static_cast<double>(counts.total());
    const std::size_t k = 5;

    for (const char* id : {"single_tree", "single_tree_down", "single_tree_up",
                           "single_tree_hybrid", "single_tree_weights", "single_tree_cost"}) {
        ModelSpec spec = spec_by_id(id);
        ParamPoint point = param_grid(spec).front();
        CvResult result = cross_validate(spec, point, ds, k, 21, true);
        REQUIRE(result.audits.size() == k);
        for (const FoldAudit& audit : result.audits) {
            // validation imbalance within one count of the full rate
            double expected = full_rate * static_cast<double>(audit.validation_rows);
            CHECK(std::abs(static_cast<double>(audit.validation_positives) - expected) <=
                  1.0 + 1e-9);

            // leakage guard: no validation row feeds the learner
            std::set<std::size_t> val(audit.validation_indices.begin(),
                                      audit.validation_indices.end());
            for (std::size_t src : audit.training_sources)
                CHECK(val.count(src) == 0);
        }
    }
}

TEST_CASE("resampling handlers feed the learner balanced training folds") {
    Dataset ds = testing::coarse_random_dataset(400, 3, 4, 0.10, 13);
    for (const char* id : {"single_tree_down", "single_tree_hybrid"}) {
        ModelSpec spec = spec_by_id(id);
        CvResult result = cross_validate(spec, param_grid(spec).front(), ds, 5, 23, true);
        for (const FoldAudit& audit : result.audits)
            CHECK(audit.learner_positives == audit.learner_negatives);
    }
    ModelSpec up = spec_by_id("single_tree_up");
    CvResult result = cross_validate(up, param_grid(up).front(), ds, 5, 23, true);
    for (const FoldAudit& audit : result.audits)
        CHECK(audit.learner_positives == audit.learner_negatives);
}

TEST_CASE("the case-weight handler keeps the original rows") {
    Dataset ds = testing::coarse_random_dataset(300, 2, 4, 0.12, 17);
    ModelSpec spec = spec_by_id("single_tree_weights");
    CvResult result = cross_validate(spec, param_grid(spec).front(), ds, 5, 29, true);
    for (const FoldAudit& audit : result.audits) {
        CHECK(audit.learner_rows == ds.n_rows() - audit.validation_rows);
        CHECK(audit.learner_positives + audit.learner_negatives == audit.learner_rows);
    }
}

TEST_CASE("folds without positives score zero with a diagnostic") {
    Dataset ds = testing::coarse_random_dataset(60, 2, 3, 0.001, 19);
    // force exactly 3 positives so two of five folds have none
    std::size_t pos = class_counts(ds).positive;
    Dataset fixed(ds.schema());
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
        ClassLabel l = ds.label(i);
        if (l == ClassLabel::Positive)
            l = ClassLabel::Negative;
        fixed.append_row(ds.row(i), i < 3 ? ClassLabel::Positive : l);
    }
    (void)pos;
    ModelSpec spec = spec_by_id("single_tree");
    CvResult result = cross_validate(spec, param_grid(spec).front(), fixed, 5, 31, true);
    std::size_t zero_folds = 0;
    for (std::size_t i = 0; i < result.audits.size(); ++i) {
        if (result.audits[i].zero_positive_fold) {
            ++zero_folds;
            CHECK(result.fold_f5[i] == 0.0);
        }
    }
    CHECK(zero_folds == 2);
}

TEST_CASE("cv folds are shared across specs for one master seed") {
    Dataset ds = testing::coarse_random_dataset(200, 2, 4, 0.15, 23);
    auto a = stratified_kfold(ds, 5, derive_seed(77, "kfold"));
    auto b = stratified_kfold(ds, 5, derive_seed(77, "kfold"));
    CHECK(a == b);
}

TEST_CASE("grid_search covers every spec of the family and marks one winner") {
    Dataset ds = testing::coarse_random_dataset(250, 3, 4, 0.12, 29);
    auto rows = grid_search(ModelFamily::SingleTree, ds, 3, 41);
    CHECK(rows.size() == 4 * 5 + 12);
    std::set<std::string> ids;
    for (const TuningRow& r : rows)
        ids.insert(r.spec_id);
    CHECK(ids.size() == 6);
    for (const std::string& id : ids) {
        double best = -1.0;
        std::size_t selected = 0;
        for (const TuningRow& r : rows)
            if (r.spec_id == id) {
                best = std::max(best, r.mean_cv_f5);
                selected += r.selected ? 1 : 0;
            }
        CHECK(selected == 1);
        for (const TuningRow& r : rows)
            if (r.spec_id == id && r.selected)
                CHECK(r.mean_cv_f5 == best);
    }
}

TEST_CASE("run_experiment produces a full deterministic report") {
    Dataset ds = testing::coarse_random_dataset(320, 3, 4, 0.12, 31);
    auto [train, test] = stratified_split(ds, 0.7, 3);

    ExperimentOptions opt;
    opt.folds = 3;
    opt.jobs = 1;
    TuningReport a = run_experiment(train, test, 55, opt);
    CHECK(a.test_rows.size() == 17);

    // sorted by recall descending
    for (std::size_t i = 1; i < a.test_rows.size(); ++i)
        CHECK(a.test_rows[i - 1].metrics.recall >= a.test_rows[i].metrics.recall);

    // byte-identical CSVs regardless of worker count
    ExperimentOptions parallel = opt;
    parallel.jobs = 4;
    TuningReport b = run_experiment(train, test, 55, parallel);
    fs::path dir = fs::temp_directory_path() / "rarelearn_tests";
    fs::create_directories(dir);
    write_tuning_csv(a, dir / "tuning_a.csv");
    write_tuning_csv(b, dir / "tuning_b.csv");
    write_test_results_csv(a, dir / "results_a.csv");
    write_test_results_csv(b, dir / "results_b.csv");
    CHECK(slurp(dir / "tuning_a.csv") == slurp(dir / "tuning_b.csv"));
    CHECK(slurp(dir / "results_a.csv") == slurp(dir / "results_b.csv"));
    CHECK(slurp(dir / "tuning_a.csv").find("spec_id,params,mean_cv_f5,selected") == 0);
    CHECK(slurp(dir / "results_a.csv").find("spec_id,precision,recall,f5,accuracy") == 0);
}

TEST_CASE("spec filter restricts the run") {
    Dataset ds = testing::coarse_random_dataset(200, 2, 4, 0.15, 37);
    auto [train, test] = stratified_split(ds, 0.7, 5);
    ExperimentOptions opt;
    opt.folds = 3;
    opt.spec_filter = {"single_tree_cost"};
    TuningReport report = run_experiment(train, test, 7, opt);
    CHECK(report.test_rows.size() == 1);
    CHECK(report.test_rows[0].spec_id == "single_tree_cost");
    CHECK(report.tuning.size() == 12);

    opt.spec_filter = {"no_such_spec"};
    CHECK_THROWS_AS(run_experiment(train, test, 7, opt), std::invalid_argument);
}

} // TEST_SUITE

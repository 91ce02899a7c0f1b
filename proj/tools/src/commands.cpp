#include "commands.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <regex>
#include <thread>

#include "rarelearn/etl.hpp"
#include "rarelearn/imbalance.hpp"
#include "rarelearn/model_selection.hpp"
#include "rarelearn/rng.hpp"
#include "rarelearn/synthetic.hpp"

namespace fs = std::filesystem;

namespace rarelearn::cli {

namespace {

using ManifestEntries = std::vector<std::pair<std::string, std::string>>;

// Flat key = value file describing a run. The timestamp lives only here;
// every other artifact is fully determined by the seed.
void write_manifest(const fs::path& path, const std::string& command,
                    const ManifestEntries& entries) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << "tool_version = " << tool_version << '\n';
    out << "command = " << command << '\n';
    for (const auto& [key, value] : entries)
        out << key << " = " << value << '\n';
    auto now = std::chrono::system_clock::now();
    out << "generated_at = "
        << std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count()
        << '\n';
    if (!out)
        throw std::runtime_error("write failed: " + path.string());
}

std::string year_file(const char* prefix, int year) {
    return std::string(prefix) + "_" + std::to_string(year) + ".csv";
}

} // namespace

void cmd_gen_data(const GenDataOptions& opt) {
    etl::SyntheticConfig cfg;
    cfg.n_students = opt.students;
    cfg.dropout_rate = opt.dropout_rate;
    cfg.first_year = opt.first_year;
    cfg.n_years = opt.years;
    cfg.conflict_rate = opt.conflict_rate;
    cfg.seed = opt.seed;

    fs::create_directories(opt.out_dir);
    auto years = etl::generate_synthetic(cfg);
    for (const auto& y : years) {
        etl::save_enrollment_csv(y.enrollment, opt.out_dir / year_file("enrollment", y.year));
        etl::save_discipline_csv(y.discipline, opt.out_dir / year_file("discipline", y.year));
    }
    write_manifest(opt.out_dir / "manifest.txt", "gen-data",
                   {{"seed", std::to_string(opt.seed)},
                    {"students", std::to_string(opt.students)},
                    {"dropout_rate", format_double(opt.dropout_rate)},
                    {"years", std::to_string(opt.years)},
                    {"first_year", std::to_string(opt.first_year)},
                    {"conflict_rate", format_double(opt.conflict_rate)},
                    {"out_dir", opt.out_dir.string()}});
}

void cmd_etl(const EtlOptions& opt) {
    static const std::regex enrollment_pattern(R"(enrollment_(\d{4})\.csv)");
    std::vector<etl::YearInput> years;
    if (!fs::is_directory(opt.in_dir))
        throw std::runtime_error("input directory not found: " + opt.in_dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(opt.in_dir))
        files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& path : files) {
        std::smatch match;
        std::string name = path.filename().string();
        if (!std::regex_match(name, match, enrollment_pattern))
            continue;
        etl::YearInput y;
        y.year = std::stoi(match[1].str());
        y.enrollment = etl::load_enrollment_csv(path);
        fs::path discipline = opt.in_dir / year_file("discipline", y.year);
        if (fs::exists(discipline))
            y.discipline = etl::load_discipline_csv(discipline);
        else
            std::cerr << "warning: " << discipline.filename().string()
                      << " missing; students get N discipline flags for " << y.year << '\n';
        years.push_back(std::move(y));
    }
    if (years.empty())
        throw std::runtime_error("no enrollment_<YYYY>.csv files in " + opt.in_dir.string());

    etl::BuildResult result = etl::build_all_time(std::move(years));
    fs::create_directories(opt.out_dir);
    save_csv(result.dataset, opt.out_dir / "alltime.csv", etl::alltime_label_column());
    etl::write_conflicts_csv(result.conflicts, opt.out_dir / "conflicts.csv");
    write_manifest(opt.out_dir / "manifest.txt", "etl",
                   {{"in_dir", opt.in_dir.string()},
                    {"out_dir", opt.out_dir.string()},
                    {"students", std::to_string(result.dataset.n_rows())},
                    {"conflicts", std::to_string(result.conflicts.size())}});
}

void cmd_resample(const ResampleOptions& opt) {
    Dataset ds = load_csv(opt.input, etl::alltime_schema(), etl::alltime_label_column());
    ResampleOutcome outcome;
    if (opt.method == "down") {
        outcome = random_under_sample(ds, opt.seed);
    } else if (opt.method == "up") {
        outcome = random_over_sample(ds, opt.seed);
    } else if (opt.method == "smote") {
        SmoteConfig cfg{opt.k_neighbors, opt.over_ratio, derive_seed(opt.seed, "smote")};
        outcome = smote(ds, cfg);
    } else if (opt.method == "hybrid") {
        SmoteConfig cfg{opt.k_neighbors, opt.over_ratio, derive_seed(opt.seed, "smote")};
        outcome = hybrid_smote_under(ds, cfg, derive_seed(opt.seed, "under"));
    } else {
        throw std::runtime_error("unknown resample method: " + opt.method);
    }
    save_csv(outcome.dataset, opt.output, etl::alltime_label_column());
    ClassCounts counts = class_counts(outcome.dataset);
    write_manifest(opt.output.parent_path() / (opt.output.stem().string() + ".manifest.txt"),
                   "resample",
                   {{"method", opt.method},
                    {"seed", std::to_string(opt.seed)},
                    {"k_neighbors", std::to_string(opt.k_neighbors)},
                    {"over_ratio", format_double(opt.over_ratio)},
                    {"input", opt.input.string()},
                    {"output", opt.output.string()},
                    {"rows", std::to_string(outcome.dataset.n_rows())},
                    {"positive", std::to_string(counts.positive)},
                    {"negative", std::to_string(counts.negative)}});
}

void cmd_experiment(const ExperimentOptionsCli& opt) {
    Dataset ds = load_csv(opt.data, etl::alltime_schema(), etl::alltime_label_column());
    ClassCounts counts = class_counts(ds);
    if (counts.positive == 0)
        throw std::runtime_error("dataset has no positive instances");

    auto [train, test] = stratified_split(ds, opt.train_fraction, derive_seed(opt.seed, "split"));

    ExperimentOptions options;
    options.folds = opt.folds;
    options.jobs = opt.jobs > 0 ? opt.jobs : std::max(1u, std::thread::hardware_concurrency());
    options.spec_filter = opt.specs;
    TuningReport report = run_experiment(train, test, derive_seed(opt.seed, "experiment"),
                                         options);

    fs::create_directories(opt.out_dir);
    write_tuning_csv(report, opt.out_dir / "tuning.csv");
    write_test_results_csv(report, opt.out_dir / "test_results.csv");
    write_manifest(opt.out_dir / "manifest.txt", "experiment",
                   {{"seed", std::to_string(opt.seed)},
                    {"data", opt.data.string()},
                    {"train_fraction", format_double(opt.train_fraction)},
                    {"folds", std::to_string(opt.folds)},
                    {"jobs", std::to_string(options.jobs)},
                    {"specs", opt.specs.empty() ? std::string("all") : [&] {
                         std::string joined;
                         for (const auto& s : opt.specs)
                             joined += (joined.empty() ? "" : ";") + s;
                         return joined;
                     }()},
                    {"train_rows", std::to_string(train.n_rows())},
                    {"test_rows", std::to_string(test.n_rows())},
                    {"out_dir", opt.out_dir.string()}});
}

void cmd_metrics(const MetricsOptions& opt) {
    Dataset truth = load_csv(opt.truth, etl::alltime_schema(), etl::alltime_label_column());
    std::ifstream pred_in(opt.predictions);
    if (!pred_in)
        throw std::runtime_error("cannot open " + opt.predictions.string());
    std::vector<ClassLabel> predictions;
    std::string line;
    while (std::getline(pred_in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        if (line == "Y")
            predictions.push_back(ClassLabel::Positive);
        else if (line == "N")
            predictions.push_back(ClassLabel::Negative);
        else
            throw std::runtime_error("prediction file: expected Y or N, got '" + line + "'");
    }
    ConfusionMatrix cm = confusion(truth.labels(), predictions);
    CostMatrix costs{opt.cost_tp, opt.cost_fn, opt.cost_fp, opt.cost_tn};
    MetricsReport report = MetricsReport::compute(cm, opt.beta, costs);
    std::string text =
        std::string(MetricsReport::csv_header()) + '\n' + report.csv_row(opt.model_id) + '\n';
    if (opt.output.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(opt.output);
        if (!out)
            throw std::runtime_error("cannot write " + opt.output.string());
        out << text;
    }
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"imbalanced-learning pipeline for rare-class dropout prediction"};
    app.require_subcommand(1);

    GenDataOptions gen;
    auto* gen_cmd = app.add_subcommand("gen-data", "generate synthetic yearly cohort files");
    gen_cmd->add_option("--students", gen.students, "number of students (>= 100)");
    gen_cmd->add_option("--dropout-rate", gen.dropout_rate, "target positive fraction");
    gen_cmd->add_option("--years", gen.years, "number of school years");
    gen_cmd->add_option("--first-year", gen.first_year, "first school year");
    gen_cmd->add_option("--conflict-rate", gen.conflict_rate,
                        "fraction of students given a colliding ssn");
    gen_cmd->add_option("--seed", gen.seed, "master seed");
    gen_cmd->add_option("--out", gen.out_dir, "output directory")->required();

    EtlOptions etl_opt;
    auto* etl_cmd = app.add_subcommand("etl", "build alltime.csv from yearly files");
    etl_cmd->add_option("--in", etl_opt.in_dir, "directory with yearly csv files")->required();
    etl_cmd->add_option("--out", etl_opt.out_dir, "output directory")->required();

    ResampleOptions res;
    auto* res_cmd = app.add_subcommand("resample", "rebalance a canonical csv");
    res_cmd->add_option("--method", res.method, "down | up | smote | hybrid")->required();
    res_cmd->add_option("--in", res.input, "input csv")->required();
    res_cmd->add_option("--out", res.output, "output csv")->required();
    res_cmd->add_option("--seed", res.seed, "master seed");
    res_cmd->add_option("--k", res.k_neighbors, "smote neighbor count");
    res_cmd->add_option("--over-ratio", res.over_ratio, "synthetics per minority row");

    ExperimentOptionsCli exp;
    auto* exp_cmd = app.add_subcommand("experiment", "tune, fit and score the model matrix");
    exp_cmd->add_option("--data", exp.data, "canonical alltime csv")->required();
    exp_cmd->add_option("--out", exp.out_dir, "output directory")->required();
    exp_cmd->add_option("--seed", exp.seed, "master seed");
    exp_cmd->add_option("--train-fraction", exp.train_fraction, "stratified train share");
    exp_cmd->add_option("--folds", exp.folds, "cross-validation folds");
    exp_cmd->add_option("--jobs", exp.jobs, "worker threads (0 = all cores)");
    exp_cmd->add_option("--specs", exp.specs, "subset of spec ids to run")->delimiter(',');

    MetricsOptions met;
    auto* met_cmd = app.add_subcommand("metrics", "score predictions against a labeled csv");
    met_cmd->add_option("--truth", met.truth, "canonical csv with labels")->required();
    met_cmd->add_option("--pred", met.predictions, "file with one Y/N per line")->required();
    met_cmd->add_option("--beta", met.beta, "f-measure beta");
    met_cmd->add_option("--cost-tp", met.cost_tp, "cost of a true positive");
    met_cmd->add_option("--cost-fn", met.cost_fn, "cost of a false negative");
    met_cmd->add_option("--cost-fp", met.cost_fp, "cost of a false positive");
    met_cmd->add_option("--cost-tn", met.cost_tn, "cost of a true negative");
    met_cmd->add_option("--model-id", met.model_id, "row label in the report");
    met_cmd->add_option("--out", met.output, "write the report here instead of stdout");

    try {
        app.parse(argc, argv);
        if (gen_cmd->parsed())
            cmd_gen_data(gen);
        else if (etl_cmd->parsed())
            cmd_etl(etl_opt);
        else if (res_cmd->parsed())
            cmd_resample(res);
        else if (exp_cmd->parsed())
            cmd_experiment(exp);
        else if (met_cmd->parsed())
            cmd_metrics(met);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0)
            return app.exit(e); // --help
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

} // namespace rarelearn::cli

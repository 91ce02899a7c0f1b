#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace rarelearn::cli {

inline constexpr const char* tool_version = "0.1.0";

struct GenDataOptions {
    std::size_t students = 20000;
    double dropout_rate = 0.04;
    int years = 13;
    int first_year = 1999;
    double conflict_rate = 0.0;
    std::uint64_t seed = 0;
    std::filesystem::path out_dir;
};

struct EtlOptions {
    std::filesystem::path in_dir;
    std::filesystem::path out_dir;
};

struct ResampleOptions {
    std::string method; // down, up, smote, hybrid
    std::filesystem::path input;
    std::filesystem::path output;
    std::uint64_t seed = 0;
    int k_neighbors = 5;
    double over_ratio = 1.0;
};

struct ExperimentOptionsCli {
    std::filesystem::path data;
    std::filesystem::path out_dir;
    std::uint64_t seed = 0;
    double train_fraction = 0.70;
    std::size_t folds = 5;
    std::size_t jobs = 0; // 0 = hardware concurrency
    std::vector<std::string> specs;
};

struct MetricsOptions {
    std::filesystem::path truth;
    std::filesystem::path predictions;
    double beta = 5.0;
    double cost_tp = 0.0, cost_fn = 0.0, cost_fp = 0.0, cost_tn = 0.0;
    std::string model_id = "model";
    std::filesystem::path output; // empty = stdout
};

void cmd_gen_data(const GenDataOptions& opt);
void cmd_etl(const EtlOptions& opt);
void cmd_resample(const ResampleOptions& opt);
void cmd_experiment(const ExperimentOptionsCli& opt);
void cmd_metrics(const MetricsOptions& opt);

// Parses argv and dispatches; returns the process exit code. Failures print
// a single machine-parsable "error: ..." line on stderr.
int run_cli(int argc, const char* const* argv);

} // namespace rarelearn::cli

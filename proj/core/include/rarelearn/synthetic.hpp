#pragma once

#include <cstdint>
#include <vector>

#include "rarelearn/etl.hpp"

namespace rarelearn::etl {

// Logistic coefficients linking a student's aggregated behavior to their
// dropout propensity. The intercept is calibrated at generation time so the
// realized positive fraction matches the requested rate.
struct PropensityModel {
    double per_truancy_year = 0.55;
    double per_suspension_year = 0.50;
    double per_expulsion_year = 0.80;
    double per_avg_absent_day = 0.09;
    double per_fail_event = 0.70;
    double ever_homeless = 0.50;
};

struct SyntheticConfig {
    std::size_t n_students = 20000; // at least 100
    double dropout_rate = 0.04;
    int first_year = 1999;
    int n_years = 13;
    double conflict_rate = 0.0; // fraction of students given a colliding ssn
    std::uint64_t seed = 0;
    PropensityModel propensity{};
};

// Simulates per-student yearly trajectories. A latent risk trait drives
// absences, truancy, discipline and grade retention; dropout labels are
// drawn from the logistic propensity on the aggregated behavior, so the
// planted signal survives the all-time aggregation. Deterministic given the
// seed.
std::vector<YearInput> generate_synthetic(const SyntheticConfig& cfg);

} // namespace rarelearn::etl

#include "rarelearn/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "rarelearn/rng.hpp"

namespace rarelearn::etl {

namespace {

constexpr const char* first_names[] = {
    "JAMES", "MARY", "ROBERT", "PATRICIA", "JOHN",   "JENNIFER", "MICHAEL", "LINDA",
    "DAVID", "ELIZA", "WILLIAM", "BARBARA", "RICHARD", "SUSAN",  "JOSEPH",  "JESSICA",
    "THOMAS", "SARAH", "CHARLES", "KAREN",  "CHRIS",  "NANCY",   "DANIEL",  "LISA"};
constexpr const char* last_names[] = {
    "SMITH",  "JOHNSON", "WILLIAMS", "BROWN",    "JONES",  "GARCIA", "MILLER", "DAVIS",
    "RODRIGUEZ", "MARTINEZ", "HERNANDEZ", "LOPEZ", "GONZALES", "WILSON", "ANDERSON", "THOMAS"};
// Distinct alphabet for injected identity conflicts, so the planted pairs
// always clear the name-distance threshold.
constexpr const char* phantom_names[] = {"XAVIER QUIXOTE", "ZULEIKA VZQUEZ", "QUINCY XYLANDER",
                                         "XENIA ZHUKOV"};

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct YearPlan {
    int year = 0;
    int grade = 0;
    double age = 0.0;
    double days_enrolled = 0.0;
    double days_absent = 0.0;
    int n_schools = 1;
    bool district_change = false;
    bool truancy = false;
    bool homeless = false;
    bool free_lunch = false;
    bool suspension = false;
    bool expulsion = false;
    bool failed_from_prev = false;
};

struct StudentPlan {
    std::string ssn;
    std::string name;
    Date birth;
    char sex = 'F';
    int ethnic = 5;
    std::vector<YearPlan> years;
    std::size_t exit_index = 0; // candidate dropout year (index into years)
    double score = 0.0;         // uncalibrated propensity input
    bool dropout = false;
};

// Aggregates of the trajectory truncated at the candidate exit year.
double propensity_score(const StudentPlan& s, const PropensityModel& m) {
    double truancy_years = 0.0, suspension_years = 0.0, expulsion_years = 0.0;
    double absent_total = 0.0;
    bool homeless = false;
    int fail_events = 0;
    const std::size_t n = s.exit_index + 1;
    for (std::size_t i = 0; i < n; ++i) {
        const YearPlan& y = s.years[i];
        truancy_years += y.truancy ? 1.0 : 0.0;
        suspension_years += y.suspension ? 1.0 : 0.0;
        expulsion_years += y.expulsion ? 1.0 : 0.0;
        absent_total += y.days_absent;
        homeless |= y.homeless;
        fail_events += y.failed_from_prev ? 1 : 0;
    }
    double avg_absent = absent_total / static_cast<double>(n);
    return m.per_truancy_year * truancy_years + m.per_suspension_year * suspension_years +
           m.per_expulsion_year * expulsion_years + m.per_avg_absent_day * avg_absent +
           m.per_fail_event * fail_events + (homeless ? m.ever_homeless : 0.0);
}

} // namespace

std::vector<YearInput> generate_synthetic(const SyntheticConfig& cfg) {
    if (cfg.n_students < 100)
        throw std::invalid_argument("generate_synthetic: need at least 100 students");
    if (!(cfg.dropout_rate > 0.0 && cfg.dropout_rate < 1.0))
        throw std::invalid_argument("generate_synthetic: dropout_rate must lie in (0,1)");
    if (cfg.n_years < 1)
        throw std::invalid_argument("generate_synthetic: need at least one school year");

    const int last_year = cfg.first_year + cfg.n_years - 1;
    std::vector<StudentPlan> students;
    students.reserve(cfg.n_students);

    for (std::size_t idx = 0; idx < cfg.n_students; ++idx) {
        auto rng = make_rng(derive_seed(derive_seed(cfg.seed, "student"), idx));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::normal_distribution<double> normal(0.0, 1.0);

        StudentPlan s;
        char ssn[16];
        std::snprintf(ssn, sizeof ssn, "S%08zu", idx);
        s.ssn = ssn;
        s.name = std::string(first_names[idx % std::size(first_names)]) + " " +
                 last_names[(idx / std::size(first_names)) % std::size(last_names)];
        s.sex = unit(rng) < 0.51 ? 'F' : 'M';
        double eth = unit(rng);
        s.ethnic = eth < 0.02 ? 1 : eth < 0.04 ? 2 : eth < 0.46 ? 3 : eth < 0.50 ? 4 : eth < 0.96 ? 5 : 6;

        // Latent risk trait drives every behavioral signal.
        double risk = normal(rng);

        std::uniform_int_distribution<int> entry_year_pick(cfg.first_year, last_year);
        std::uniform_int_distribution<int> entry_grade_pick(-1, 9);
        int year = entry_year_pick(rng);
        int grade = entry_grade_pick(rng);
        double age_offset = unit(rng) < 0.5 ? 0.0 : 0.5;
        s.birth = Date{year - grade - 6, 1 + static_cast<int>(unit(rng) * 12) % 12,
                       1 + static_cast<int>(unit(rng) * 28) % 28};
        bool fl_eligible = unit(rng) < std::clamp(0.40 + 0.12 * risk, 0.05, 0.9);

        while (year <= last_year && grade <= 12) {
            YearPlan y;
            y.year = year;
            y.grade = grade;
            y.age = grade + 6 + age_offset;
            double absent = 2.0 + std::exp(0.9 * risk + 0.5 * normal(rng)) * 2.5;
            y.days_absent = std::round(std::min(absent, 60.0));
            y.days_enrolled = std::round(176.0 - unit(rng) * 12.0 - y.days_absent * 0.4);
            y.truancy = unit(rng) < sigmoid(-2.6 + 1.1 * risk + y.days_absent / 18.0 - 0.8);
            y.homeless = unit(rng) < sigmoid(-4.6 + 0.9 * risk);
            y.free_lunch = fl_eligible;
            y.suspension = unit(rng) < sigmoid(-2.9 + 1.3 * risk);
            y.expulsion = y.suspension && unit(rng) < sigmoid(-2.4 + 0.9 * risk);
            y.n_schools = unit(rng) < 0.05 + 0.04 * std::max(risk, 0.0) ? 2 : 1;
            y.district_change = y.n_schools == 2 && unit(rng) < 0.5;
            s.years.push_back(y);

            // grade transition: retention repeats the grade, a rare skip
            // jumps two ahead
            double p_fail = sigmoid(-2.3 + 1.2 * risk);
            if (unit(rng) < p_fail) {
                year += 1;
                if (year <= last_year && grade <= 12) {
                    YearPlan repeat = y;
                    repeat.year = year;
                    repeat.failed_from_prev = true;
                    // regenerate the behavioral part of the repeated year
                    double ab = 2.0 + std::exp(0.9 * risk + 0.5 * normal(rng)) * 2.5;
                    repeat.days_absent = std::round(std::min(ab, 60.0));
                    repeat.days_enrolled =
                        std::round(176.0 - unit(rng) * 12.0 - repeat.days_absent * 0.4);
                    repeat.truancy =
                        unit(rng) < sigmoid(-2.6 + 1.1 * risk + repeat.days_absent / 18.0 - 0.8);
                    repeat.suspension = unit(rng) < sigmoid(-2.9 + 1.3 * risk);
                    repeat.expulsion = repeat.suspension && unit(rng) < sigmoid(-2.4 + 0.9 * risk);
                    repeat.n_schools = unit(rng) < 0.05 + 0.04 * std::max(risk, 0.0) ? 2 : 1;
                    repeat.district_change = repeat.n_schools == 2 && unit(rng) < 0.5;
                    s.years.push_back(repeat);
                }
            }
            grade += unit(rng) < 0.012 ? 2 : 1;
            year += 1;
        }
        if (s.years.empty())
            continue;

        // Candidate exit year for a potential dropout: a uniformly chosen
        // high-school year, or the last year when none reaches grade 7.
        std::vector<std::size_t> hs;
        for (std::size_t i = 0; i < s.years.size(); ++i)
            if (s.years[i].grade >= 7)
                hs.push_back(i);
        if (hs.empty()) {
            s.exit_index = s.years.size() - 1;
        } else {
            std::uniform_int_distribution<std::size_t> pick(0, hs.size() - 1);
            s.exit_index = hs[pick(rng)];
        }
        s.score = propensity_score(s, cfg.propensity);
        students.push_back(std::move(s));
    }

    // Calibrate the propensity intercept so the expected positive fraction
    // equals the requested rate.
    double lo = -60.0, hi = 60.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double mean = 0.0;
        for (const StudentPlan& s : students)
            mean += sigmoid(s.score + mid);
        mean /= static_cast<double>(students.size());
        (mean > cfg.dropout_rate ? hi : lo) = mid;
    }
    const double intercept = 0.5 * (lo + hi);

    for (std::size_t idx = 0; idx < students.size(); ++idx) {
        StudentPlan& s = students[idx];
        auto rng = make_rng(derive_seed(derive_seed(cfg.seed, "dropout"), idx));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        s.dropout = unit(rng) < sigmoid(s.score + intercept);
        if (s.dropout)
            s.years.resize(s.exit_index + 1);
    }

    // Emit yearly records.
    std::vector<YearInput> out(static_cast<std::size_t>(cfg.n_years));
    for (int y = 0; y < cfg.n_years; ++y)
        out[static_cast<std::size_t>(y)].year = cfg.first_year + y;
    auto year_slot = [&out, &cfg](int year) -> YearInput& {
        return out[static_cast<std::size_t>(year - cfg.first_year)];
    };

    for (std::size_t idx = 0; idx < students.size(); ++idx) {
        const StudentPlan& s = students[idx];
        auto rng = make_rng(derive_seed(derive_seed(cfg.seed, "emit"), idx));
        std::uniform_real_distribution<double> unit(0.0, 1.0);

        int school = 100 + static_cast<int>(unit(rng) * 400.0);
        int district = school % 64;
        for (std::size_t i = 0; i < s.years.size(); ++i) {
            const YearPlan& y = s.years[i];
            bool is_last = i + 1 == s.years.size();
            EnrollmentRecord base;
            base.ssn = s.ssn;
            base.name = s.name;
            base.birth_date = s.birth;
            base.school_year = y.year;
            base.grade = y.grade;
            base.age = y.age;
            base.sex = s.sex;
            base.ethnic = s.ethnic;
            base.dropout = is_last && s.dropout;
            base.homeless = y.homeless;
            base.free_lunch = y.free_lunch;
            base.truancy = y.truancy;

            if (y.n_schools == 2) {
                int school_b = 100 + static_cast<int>(unit(rng) * 400.0);
                int district_b = y.district_change ? school_b % 64 : district;
                EnrollmentRecord first_half = base;
                first_half.school_id = "SCH" + std::to_string(school);
                first_half.district_id = "D" + std::to_string(district);
                first_half.days_enrolled = std::round(y.days_enrolled * 0.6);
                first_half.days_absent = std::round(y.days_absent * 0.6);
                EnrollmentRecord second_half = base;
                second_half.school_id = "SCH" + std::to_string(school_b);
                second_half.district_id = "D" + std::to_string(district_b);
                second_half.days_enrolled = y.days_enrolled - first_half.days_enrolled;
                second_half.days_absent = y.days_absent - first_half.days_absent;
                year_slot(y.year).enrollment.push_back(std::move(first_half));
                year_slot(y.year).enrollment.push_back(std::move(second_half));
                school = school_b;
                district = district_b;
            } else {
                base.school_id = "SCH" + std::to_string(school);
                base.district_id = "D" + std::to_string(district);
                base.days_enrolled = y.days_enrolled;
                base.days_absent = y.days_absent;
                year_slot(y.year).enrollment.push_back(std::move(base));
            }

            if (y.suspension || y.expulsion) {
                DisciplinaryRecord d;
                d.ssn = s.ssn;
                d.school_year = y.year;
                d.suspension = y.suspension;
                d.expulsion = y.expulsion;
                year_slot(y.year).discipline.push_back(std::move(d));
            }
        }
    }

    // Optional identity-conflict injection: a phantom student reuses an
    // existing ssn with an unmistakably different name and birth date.
    if (cfg.conflict_rate > 0.0) {
        for (std::size_t idx = 0; idx < students.size(); ++idx) {
            auto rng = make_rng(derive_seed(derive_seed(cfg.seed, "conflict"), idx));
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            if (unit(rng) >= cfg.conflict_rate)
                continue;
            const StudentPlan& s = students[idx];
            const YearPlan& y = s.years[static_cast<std::size_t>(
                unit(rng) * static_cast<double>(s.years.size()))];
            EnrollmentRecord ghost;
            ghost.ssn = s.ssn;
            ghost.name = phantom_names[idx % std::size(phantom_names)];
            ghost.birth_date = Date{s.birth.year - 3, 6, 15};
            ghost.school_year = y.year;
            ghost.grade = std::min(y.grade + 1, 12);
            ghost.age = ghost.grade + 6;
            ghost.sex = s.sex == 'F' ? 'M' : 'F';
            ghost.ethnic = s.ethnic;
            ghost.days_enrolled = 120;
            ghost.days_absent = 4;
            ghost.school_id = "SCH999";
            ghost.district_id = "D63";
            year_slot(y.year).enrollment.push_back(std::move(ghost));
        }
    }
    return out;
}

} // namespace rarelearn::etl

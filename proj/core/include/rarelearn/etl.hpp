#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rarelearn/dataset.hpp"

namespace rarelearn::etl {

struct Date {
    int year = 0;
    int month = 0;
    int day = 0;
    auto operator<=>(const Date&) const = default;
};

Date parse_date(std::string_view text); // YYYY-MM-DD
std::string format_date(const Date& d);

// One enrollment row per (ssn, school year, school).
struct EnrollmentRecord {
    std::string ssn;
    std::string name;
    Date birth_date;
    int school_year = 0; // start year of the school year
    int grade = 0;       // -1 = pre-k, 0 = kindergarten, 1..12
    double age = 0.0;
    char sex = 'F'; // 'F' or 'M'
    int ethnic = 1; // 1..6
    double days_enrolled = 0.0;
    double days_absent = 0.0;
    std::string school_id;
    std::string district_id;
    bool dropout = false;
    bool homeless = false;
    bool free_lunch = false;
    bool truancy = false;
};

struct DisciplinaryRecord {
    std::string ssn;
    int school_year = 0;
    bool suspension = false;
    bool expulsion = false;
};

struct MergedRecord {
    EnrollmentRecord enrollment;
    bool suspension = false;
    bool expulsion = false;
};

// Two records sharing an SSN whose normalized names differ by more than the
// threshold AND whose birth dates differ describe two different students;
// such records never merge.
struct IdentityConflict {
    std::string ssn;
    std::string name_a;
    std::string name_b;
    Date birth_a;
    Date birth_b;
    double name_distance = 0.0;
    std::string scope; // "year:YYYY" or "all-time"
};

// All 18 all-time variables, in canonical column order.
struct AllTimeRecord {
    int last_grade = 0;
    double last_age = 0.0;
    char sex = 'F';
    int ethnic = 1;
    bool fail_flag = false;
    bool move_ahead_flag = false;
    bool on_track_flag = true;
    bool failed_more_than_2 = false;
    double avg_days_enrolled = 0.0;
    double avg_days_absent = 0.0;
    double avg_school_changes = 0.0;
    double avg_district_changes = 0.0;
    bool ever_homeless = false;
    bool ever_truancy = false;
    bool ever_free_lunch = false;
    bool ever_suspension = false;
    bool ever_expulsion = false;
    bool last_dropout = false;
};

// Levenshtein distance over normalized names (uppercased, whitespace
// collapsed), divided by the longer length.
double normalized_name_distance(std::string_view a, std::string_view b);

inline constexpr double name_distance_threshold = 0.2;

struct MergeResult {
    std::vector<MergedRecord> records;
    std::vector<IdentityConflict> conflicts;
};

// Left join of one year's discipline onto enrollment by SSN; students with
// no disciplinary rows get N flags. SSNs with conflicting identities are
// excluded entirely and logged.
MergeResult merge_year(std::vector<EnrollmentRecord> enrollment,
                       std::vector<DisciplinaryRecord> discipline, int year);

// Collapses one student's yearly records into the 18 all-time variables.
// Grade-sequence flags come from consecutive enrolled years: a fail event is
// grade(next) <= grade(prev); moving ahead is grade(next) >= grade(prev)+2;
// the student is on track iff they never failed.
AllTimeRecord aggregate_all_time(std::span<const MergedRecord> years);

struct YearInput {
    int year = 0;
    std::vector<EnrollmentRecord> enrollment;
    std::vector<DisciplinaryRecord> discipline;
};

struct BuildResult {
    Dataset dataset;                        // rows sorted by ssn
    std::vector<std::string> ssns;          // aligned with dataset rows
    std::vector<IdentityConflict> conflicts;
};

BuildResult build_all_time(std::vector<YearInput> years);

// Canonical 17-predictor schema plus the label column name. Sex Cd maps
// into the Y/N alphabet as M -> Y, F -> N.
std::vector<FeatureSchema> alltime_schema();
const std::string& alltime_label_column();

Dataset to_dataset(std::span<const AllTimeRecord> records);

std::vector<EnrollmentRecord> load_enrollment_csv(const std::filesystem::path& path);
std::vector<DisciplinaryRecord> load_discipline_csv(const std::filesystem::path& path);
void save_enrollment_csv(std::span<const EnrollmentRecord> records,
                         const std::filesystem::path& path);
void save_discipline_csv(std::span<const DisciplinaryRecord> records,
                         const std::filesystem::path& path);
void write_conflicts_csv(std::span<const IdentityConflict> conflicts,
                         const std::filesystem::path& path);

} // namespace rarelearn::etl

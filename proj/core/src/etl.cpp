#include "rarelearn/etl.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace rarelearn::etl {

Date parse_date(std::string_view text) {
    Date d;
    char dash1 = 0, dash2 = 0;
    std::istringstream in{std::string(text)};
    if (!(in >> d.year >> dash1 >> d.month >> dash2 >> d.day) || dash1 != '-' || dash2 != '-' ||
        d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31)
        throw std::runtime_error("malformed date: " + std::string(text));
    return d;
}

std::string format_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

namespace {

std::string normalize_name(std::string_view raw) {
    std::string out;
    bool pending_space = false;
    for (char c : raw) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out += ' ';
            pending_space = false;
        }
        out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    return out;
}

std::size_t levenshtein(const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j)
        prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

struct Identity {
    std::string name;
    Date birth;
};

// The conflict rule is conjunctive: adequately different names AND unequal
// birth dates.
bool identities_conflict(const Identity& a, const Identity& b, double& distance) {
    distance = normalized_name_distance(a.name, b.name);
    return distance > name_distance_threshold && a.birth != b.birth;
}

// Scans a group of identities claiming one SSN; returns the first offending
// pair, if any.
bool find_conflict(const std::vector<Identity>& ids, IdentityConflict& out) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
        for (std::size_t j = i + 1; j < ids.size(); ++j) {
            double dist = 0.0;
            if (identities_conflict(ids[i], ids[j], dist)) {
                out.name_a = ids[i].name;
                out.name_b = ids[j].name;
                out.birth_a = ids[i].birth;
                out.birth_b = ids[j].birth;
                out.name_distance = dist;
                return true;
            }
        }
    }
    return false;
}

} // namespace

double normalized_name_distance(std::string_view a, std::string_view b) {
    std::string na = normalize_name(a);
    std::string nb = normalize_name(b);
    std::size_t longest = std::max(na.size(), nb.size());
    if (longest == 0)
        return 0.0;
    return static_cast<double>(levenshtein(na, nb)) / static_cast<double>(longest);
}

MergeResult merge_year(std::vector<EnrollmentRecord> enrollment,
                       std::vector<DisciplinaryRecord> discipline, int year) {
    for (const auto& r : enrollment)
        if (r.school_year != year)
            throw std::invalid_argument("enrollment record for ssn " + r.ssn +
                                        " is not from year " + std::to_string(year));
    for (const auto& r : discipline)
        if (r.school_year != year)
            throw std::invalid_argument("discipline record for ssn " + r.ssn +
                                        " is not from year " + std::to_string(year));

    std::map<std::string, std::vector<Identity>> identities;
    for (const auto& r : enrollment)
        identities[r.ssn].push_back({r.name, r.birth_date});

    MergeResult result;
    std::set<std::string> excluded;
    for (auto& [ssn, ids] : identities) {
        IdentityConflict conflict;
        if (find_conflict(ids, conflict)) {
            conflict.ssn = ssn;
            conflict.scope = "year:" + std::to_string(year);
            result.conflicts.push_back(std::move(conflict));
            excluded.insert(ssn);
        }
    }

    // OR the flags of all disciplinary rows per student.
    std::map<std::string, std::pair<bool, bool>> flags;
    for (const auto& r : discipline) {
        auto& f = flags[r.ssn];
        f.first |= r.suspension;
        f.second |= r.expulsion;
    }

    for (auto& r : enrollment) {
        if (excluded.count(r.ssn))
            continue;
        MergedRecord m;
        m.enrollment = std::move(r);
        if (auto it = flags.find(m.enrollment.ssn); it != flags.end()) {
            m.suspension = it->second.first;
            m.expulsion = it->second.second;
        }
        result.records.push_back(std::move(m));
    }
    return result;
}

AllTimeRecord aggregate_all_time(std::span<const MergedRecord> years) {
    if (years.empty())
        throw std::invalid_argument("aggregate_all_time: no yearly records");

    // Collapse to one row per school year first; a student may attend
    // several schools in one year.
    struct YearSummary {
        int grade = 0;
        double age = 0.0;
        double days_enrolled = 0.0;
        double days_absent = 0.0;
        std::set<std::string> schools;
        std::set<std::string> districts;
        bool dropout = false, homeless = false, free_lunch = false, truancy = false;
        bool suspension = false, expulsion = false;
    };
    std::map<int, YearSummary> by_year;
    for (const MergedRecord& m : years) {
        const EnrollmentRecord& e = m.enrollment;
        YearSummary& y = by_year[e.school_year];
        y.grade = y.schools.empty() ? e.grade : std::max(y.grade, e.grade);
        y.age = std::max(y.age, e.age);
        y.days_enrolled += e.days_enrolled;
        y.days_absent += e.days_absent;
        y.schools.insert(e.school_id);
        y.districts.insert(e.district_id);
        y.dropout |= e.dropout;
        y.homeless |= e.homeless;
        y.free_lunch |= e.free_lunch;
        y.truancy |= e.truancy;
        y.suspension |= m.suspension;
        y.expulsion |= m.expulsion;
    }

    AllTimeRecord out;
    const EnrollmentRecord& first = years.front().enrollment;
    out.sex = first.sex;
    out.ethnic = first.ethnic;

    const auto n_years = static_cast<double>(by_year.size());
    int fail_events = 0;
    const YearSummary* prev = nullptr;
    for (const auto& [year, y] : by_year) {
        out.avg_days_enrolled += y.days_enrolled;
        out.avg_days_absent += y.days_absent;
        out.avg_school_changes += static_cast<double>(y.schools.size() - 1);
        out.avg_district_changes += static_cast<double>(y.districts.size() - 1);
        out.ever_homeless |= y.homeless;
        out.ever_truancy |= y.truancy;
        out.ever_free_lunch |= y.free_lunch;
        out.ever_suspension |= y.suspension;
        out.ever_expulsion |= y.expulsion;
        if (prev) {
            if (y.grade <= prev->grade)
                ++fail_events;
            if (y.grade >= prev->grade + 2)
                out.move_ahead_flag = true;
        }
        prev = &y;
    }
    out.avg_days_enrolled /= n_years;
    out.avg_days_absent /= n_years;
    out.avg_school_changes /= n_years;
    out.avg_district_changes /= n_years;
    out.fail_flag = fail_events >= 1;
    out.failed_more_than_2 = fail_events >= 2;
    out.on_track_flag = !out.fail_flag;

    const YearSummary& last = by_year.rbegin()->second;
    out.last_grade = last.grade;
    out.last_age = last.age;
    out.last_dropout = last.dropout;
    return out;
}

BuildResult build_all_time(std::vector<YearInput> years) {
    if (years.empty())
        throw std::invalid_argument("build_all_time: no input years");
    std::sort(years.begin(), years.end(),
              [](const YearInput& a, const YearInput& b) { return a.year < b.year; });

    BuildResult result;
    std::map<std::string, std::vector<MergedRecord>> by_ssn;
    for (auto& y : years) {
        MergeResult merged = merge_year(std::move(y.enrollment), std::move(y.discipline), y.year);
        for (auto& c : merged.conflicts)
            result.conflicts.push_back(std::move(c));
        for (auto& r : merged.records)
            by_ssn[r.enrollment.ssn].push_back(std::move(r));
    }

    // Cross-year pass: the same rule again, over each student's history.
    std::vector<AllTimeRecord> rows;
    for (auto& [ssn, records] : by_ssn) {
        std::vector<Identity> ids;
        ids.reserve(records.size());
        for (const auto& r : records)
            ids.push_back({r.enrollment.name, r.enrollment.birth_date});
        IdentityConflict conflict;
        if (find_conflict(ids, conflict)) {
            conflict.ssn = ssn;
            conflict.scope = "all-time";
            result.conflicts.push_back(std::move(conflict));
            continue;
        }
        rows.push_back(aggregate_all_time(records));
        result.ssns.push_back(ssn);
    }
    result.dataset = to_dataset(rows);
    return result;
}

std::vector<FeatureSchema> alltime_schema() {
    return {
        {"Last Grade", FeatureKind::ordinal(-1, 12)},
        {"Last Age", FeatureKind::numeric()},
        {"Sex Cd", FeatureKind::binary()},
        {"Ethnic Cd", FeatureKind::ordinal(1, 6)},
        {"Fail Flag", FeatureKind::binary()},
        {"Move Ahead Flag", FeatureKind::binary()},
        {"On Track Flag", FeatureKind::binary()},
        {"Failed More than 2", FeatureKind::binary()},
        {"Avg Aggr Days Enrl Cnt", FeatureKind::numeric()},
        {"Avg Aggr Days Abs Cnt", FeatureKind::numeric()},
        {"Avg School Changes", FeatureKind::numeric()},
        {"Avg District Changes", FeatureKind::numeric()},
        {"Ever Homeless", FeatureKind::binary()},
        {"Ever Truancy Flag", FeatureKind::binary()},
        {"Ever Free Lunch", FeatureKind::binary()},
        {"Ever Suspension", FeatureKind::binary()},
        {"Ever Expulsion", FeatureKind::binary()},
    };
}

const std::string& alltime_label_column() {
    static const std::string name = "Last Dropout Flag";
    return name;
}

Dataset to_dataset(std::span<const AllTimeRecord> records) {
    Dataset ds(alltime_schema());
    ds.reserve(records.size());
    for (const AllTimeRecord& r : records) {
        double row[17] = {
            static_cast<double>(r.last_grade),
            r.last_age,
            r.sex == 'M' ? 1.0 : 0.0,
            static_cast<double>(r.ethnic),
            r.fail_flag ? 1.0 : 0.0,
            r.move_ahead_flag ? 1.0 : 0.0,
            r.on_track_flag ? 1.0 : 0.0,
            r.failed_more_than_2 ? 1.0 : 0.0,
            r.avg_days_enrolled,
            r.avg_days_absent,
            r.avg_school_changes,
            r.avg_district_changes,
            r.ever_homeless ? 1.0 : 0.0,
            r.ever_truancy ? 1.0 : 0.0,
            r.ever_free_lunch ? 1.0 : 0.0,
            r.ever_suspension ? 1.0 : 0.0,
            r.ever_expulsion ? 1.0 : 0.0,
        };
        ds.append_row(row, r.last_dropout ? ClassLabel::Positive : ClassLabel::Negative);
    }
    return ds;
}

namespace {

constexpr const char* enrollment_header =
    "ssn,name,birth_date,school_year,grade,age,sex,ethnic,days_enrolled,days_absent,"
    "school_id,district_id,dropout,homeless,free_lunch,truancy";
constexpr const char* discipline_header = "ssn,school_year,suspension,expulsion";

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            out.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    out.push_back(field);
    return out;
}

bool parse_flag(const std::string& token, const std::filesystem::path& path,
                std::size_t line_no) {
    if (token == "Y")
        return true;
    if (token == "N")
        return false;
    throw std::runtime_error(path.string() + " line " + std::to_string(line_no) +
                             ": expected Y or N, got '" + token + "'");
}

void expect_header(std::ifstream& in, const char* expected,
                   const std::filesystem::path& path) {
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("empty file: " + path.string());
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != expected)
        throw std::runtime_error("unexpected header in " + path.string());
}

} // namespace

std::vector<EnrollmentRecord> load_enrollment_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    expect_header(in, enrollment_header, path);
    std::vector<EnrollmentRecord> out;
    std::string line;
    for (std::size_t line_no = 2; std::getline(in, line); ++line_no) {
        if (line.empty())
            continue;
        auto f = split_line(line);
        if (f.size() != 16)
            throw std::runtime_error(path.string() + " line " + std::to_string(line_no) +
                                     ": expected 16 fields");
        EnrollmentRecord r;
        r.ssn = f[0];
        r.name = f[1];
        r.birth_date = parse_date(f[2]);
        r.school_year = std::stoi(f[3]);
        r.grade = std::stoi(f[4]);
        r.age = std::stod(f[5]);
        if (f[6] != "F" && f[6] != "M")
            throw std::runtime_error(path.string() + " line " + std::to_string(line_no) +
                                     ": sex must be F or M");
        r.sex = f[6][0];
        r.ethnic = std::stoi(f[7]);
        r.days_enrolled = std::stod(f[8]);
        r.days_absent = std::stod(f[9]);
        r.school_id = f[10];
        r.district_id = f[11];
        r.dropout = parse_flag(f[12], path, line_no);
        r.homeless = parse_flag(f[13], path, line_no);
        r.free_lunch = parse_flag(f[14], path, line_no);
        r.truancy = parse_flag(f[15], path, line_no);
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<DisciplinaryRecord> load_discipline_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    expect_header(in, discipline_header, path);
    std::vector<DisciplinaryRecord> out;
    std::string line;
    for (std::size_t line_no = 2; std::getline(in, line); ++line_no) {
        if (line.empty())
            continue;
        auto f = split_line(line);
        if (f.size() != 4)
            throw std::runtime_error(path.string() + " line " + std::to_string(line_no) +
                                     ": expected 4 fields");
        DisciplinaryRecord r;
        r.ssn = f[0];
        r.school_year = std::stoi(f[1]);
        r.suspension = parse_flag(f[2], path, line_no);
        r.expulsion = parse_flag(f[3], path, line_no);
        out.push_back(std::move(r));
    }
    return out;
}

void save_enrollment_csv(std::span<const EnrollmentRecord> records,
                         const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << enrollment_header << '\n';
    for (const EnrollmentRecord& r : records) {
        out << r.ssn << ',' << r.name << ',' << format_date(r.birth_date) << ','
            << r.school_year << ',' << r.grade << ',' << format_double(r.age) << ',' << r.sex
            << ',' << r.ethnic << ',' << format_double(r.days_enrolled) << ','
            << format_double(r.days_absent) << ',' << r.school_id << ',' << r.district_id
            << ',' << (r.dropout ? 'Y' : 'N') << ',' << (r.homeless ? 'Y' : 'N') << ','
            << (r.free_lunch ? 'Y' : 'N') << ',' << (r.truancy ? 'Y' : 'N') << '\n';
    }
    if (!out)
        throw std::runtime_error("write failed: " + path.string());
}

void save_discipline_csv(std::span<const DisciplinaryRecord> records,
                         const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << discipline_header << '\n';
    for (const DisciplinaryRecord& r : records)
        out << r.ssn << ',' << r.school_year << ',' << (r.suspension ? 'Y' : 'N') << ','
            << (r.expulsion ? 'Y' : 'N') << '\n';
    if (!out)
        throw std::runtime_error("write failed: " + path.string());
}

void write_conflicts_csv(std::span<const IdentityConflict> conflicts,
                         const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << "ssn,scope,name_a,name_b,birth_a,birth_b,name_distance\n";
    for (const IdentityConflict& c : conflicts)
        out << c.ssn << ',' << c.scope << ',' << c.name_a << ',' << c.name_b << ','
            << format_date(c.birth_a) << ',' << format_date(c.birth_b) << ','
            << format_double(c.name_distance) << '\n';
    if (!out)
        throw std::runtime_error("write failed: " + path.string());
}

} // namespace rarelearn::etl

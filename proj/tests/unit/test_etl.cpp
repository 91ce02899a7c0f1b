#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "rarelearn/etl.hpp"
#include "rarelearn/synthetic.hpp"

using namespace rarelearn;
using namespace rarelearn::etl;
namespace fs = std::filesystem;

namespace {

EnrollmentRecord student_year(const std::string& ssn, const std::string& name, int year,
                              int grade, const std::string& school = "SCH1") {
    EnrollmentRecord r;
    r.ssn = ssn;
    r.name = name;
    r.birth_date = {1990, 5, 20};
    r.school_year = year;
    r.grade = grade;
    r.age = grade + 6.0;
    r.sex = 'F';
    r.ethnic = 3;
    r.days_enrolled = 170;
    r.days_absent = 5;
    r.school_id = school;
    r.district_id = "D1";
    return r;
}

} // namespace

TEST_SUITE("etl") {

TEST_CASE("date parsing and formatting") {
    Date d = parse_date("1990-05-20");
    CHECK(d.year == 1990);
    CHECK(d.month == 5);
    CHECK(d.day == 20);
    CHECK(format_date(d) == "1990-05-20");
    CHECK_THROWS(parse_date("1990/05/20"));
    CHECK_THROWS(parse_date("1990-13-01"));
    CHECK(Date{1990, 5, 20} == Date{1990, 5, 20});
    CHECK(Date{1990, 5, 20} != Date{1991, 5, 20});
}

TEST_CASE("normalized name distance") {
    CHECK(normalized_name_distance("JOHN SMITH", "JOHN SMITH") == 0.0);
    CHECK(normalized_name_distance("john  smith ", "JOHN SMITH") == 0.0);
    // one substitution over ten characters: a typo, below the threshold
    CHECK(normalized_name_distance("JOHN SMITH", "JOHN SMYTH") == doctest::Approx(0.1));
    // hand-computed: levenshtein = 11 over max length 12
    CHECK(normalized_name_distance("JOHN SMITH", "MARIA GARCIA") ==
          doctest::Approx(11.0 / 12.0));
    CHECK(normalized_name_distance("", "") == 0.0);
}

TEST_CASE("merge_year joins discipline and defaults to N flags") {
    std::vector<EnrollmentRecord> enrollment = {student_year("S1", "ANNA BELL", 2003, 7),
                                                student_year("S2", "BEN CODY", 2003, 8)};
    std::vector<DisciplinaryRecord> discipline = {{"S1", 2003, true, false},
                                                  {"S1", 2003, false, true}};
    MergeResult result = merge_year(enrollment, discipline, 2003);
    REQUIRE(result.records.size() == 2);
    CHECK(result.conflicts.empty());
    const MergedRecord& s1 = result.records[0].enrollment.ssn == "S1" ? result.records[0]
                                                                      : result.records[1];
    const MergedRecord& s2 = result.records[0].enrollment.ssn == "S2" ? result.records[0]
                                                                      : result.records[1];
    CHECK(s1.suspension);  // flags OR across disciplinary rows
    CHECK(s1.expulsion);
    CHECK_FALSE(s2.suspension);
    CHECK_FALSE(s2.expulsion);
}

TEST_CASE("merge_year tolerates typos but excludes conflicting identities") {
    // same ssn, one-letter name difference, same birth date: merges
    auto a = student_year("S1", "JOHN SMITH", 2004, 9, "SCH1");
    auto b = student_year("S1", "JOHN SMYTH", 2004, 9, "SCH2");
    MergeResult typo = merge_year({a, b}, {}, 2004);
    CHECK(typo.records.size() == 2);
    CHECK(typo.conflicts.empty());

    // same ssn, clearly different name AND different birth date: conflict
    auto c = student_year("S2", "JOHN SMITH", 2004, 9);
    auto d = student_year("S2", "MARIA GARCIA", 2004, 10);
    d.birth_date = {1989, 1, 2};
    MergeResult conflict = merge_year({c, d}, {}, 2004);
    CHECK(conflict.records.empty());
    REQUIRE(conflict.conflicts.size() == 1);
    CHECK(conflict.conflicts[0].ssn == "S2");
    CHECK(conflict.conflicts[0].scope == "year:2004");
    CHECK(conflict.conflicts[0].name_distance > name_distance_threshold);

    // different name but the SAME birth date stays merged (conjunctive rule)
    auto e = student_year("S3", "JOHN SMITH", 2004, 9);
    auto f = student_year("S3", "MARIA GARCIA", 2004, 9, "SCH2");
    MergeResult same_birth = merge_year({e, f}, {}, 2004);
    CHECK(same_birth.records.size() == 2);
    CHECK(same_birth.conflicts.empty());
}

TEST_CASE("merge_year rejects records from the wrong year") {
    auto a = student_year("S1", "ANNA BELL", 2003, 7);
    CHECK_THROWS_AS(merge_year({a}, {}, 2004), std::invalid_argument);
}

TEST_CASE("aggregate_all_time on a single year") {
    MergedRecord m{student_year("S1", "ANNA BELL", 2005, 8), true, false};
    AllTimeRecord r = aggregate_all_time(std::vector<MergedRecord>{m});
    CHECK(r.last_grade == 8);
    CHECK(r.last_age == 14.0);
    CHECK(r.avg_days_enrolled == 170.0);
    CHECK(r.avg_days_absent == 5.0);
    CHECK(r.avg_school_changes == 0.0);
    CHECK_FALSE(r.fail_flag);
    CHECK_FALSE(r.move_ahead_flag);
    CHECK(r.on_track_flag);
    CHECK_FALSE(r.failed_more_than_2);
    CHECK(r.ever_suspension);
    CHECK_FALSE(r.ever_expulsion);
    CHECK_FALSE(r.last_dropout);
}

TEST_CASE("grade sequence 9,9,10 is one fail event") {
    std::vector<MergedRecord> years = {{student_year("S1", "A B", 2001, 9), false, false},
                                       {student_year("S1", "A B", 2002, 9), false, false},
                                       {student_year("S1", "A B", 2003, 10), false, false}};
    years[0].enrollment.school_year = 2001;
    AllTimeRecord r = aggregate_all_time(years);
    CHECK(r.fail_flag);
    CHECK_FALSE(r.failed_more_than_2);
    CHECK_FALSE(r.on_track_flag);
    CHECK(r.last_grade == 10);
}

TEST_CASE("two fail events set failed_more_than_2") {
    std::vector<MergedRecord> years = {{student_year("S1", "A B", 2001, 9), false, false},
                                       {student_year("S1", "A B", 2002, 9), false, false},
                                       {student_year("S1", "A B", 2003, 9), false, false}};
    AllTimeRecord r = aggregate_all_time(years);
    CHECK(r.fail_flag);
    CHECK(r.failed_more_than_2);
}

TEST_CASE("skipping two grades sets the move-ahead flag") {
    std::vector<MergedRecord> years = {{student_year("S1", "A B", 2001, 7), false, false},
                                       {student_year("S1", "A B", 2002, 9), false, false}};
    AllTimeRecord r = aggregate_all_time(years);
    CHECK(r.move_ahead_flag);
    CHECK_FALSE(r.fail_flag);
    CHECK(r.on_track_flag);
}

TEST_CASE("multiple schools in one year sum days and count changes") {
    auto first = student_year("S1", "A B", 2001, 7, "SCH1");
    first.days_enrolled = 100;
    first.days_absent = 3;
    auto second = student_year("S1", "A B", 2001, 7, "SCH2");
    second.days_enrolled = 70;
    second.days_absent = 4;
    second.district_id = "D2";
    std::vector<MergedRecord> years = {{first, false, false}, {second, false, false}};
    AllTimeRecord r = aggregate_all_time(years);
    CHECK(r.avg_days_enrolled == 170.0); // days aggregate within the year
    CHECK(r.avg_days_absent == 7.0);
    CHECK(r.avg_school_changes == 1.0);
    CHECK(r.avg_district_changes == 1.0);
}

TEST_CASE("thirteen yearly records collapse to one all-time record") {
    std::vector<MergedRecord> years;
    for (int y = 0; y < 13; ++y)
        years.push_back({student_year("S1", "A B", 1999 + y, std::min(y, 12)), false, false});
    AllTimeRecord r = aggregate_all_time(years);
    CHECK(r.last_grade == 12);
    Dataset ds = to_dataset(std::vector<AllTimeRecord>{r});
    CHECK(ds.n_rows() == 1);
    CHECK(ds.n_features() == 17);
}

TEST_CASE("dropout in the last year becomes the positive label") {
    auto last = student_year("S1", "A B", 2002, 10);
    last.dropout = true;
    std::vector<MergedRecord> years = {{student_year("S1", "A B", 2001, 9), false, false},
                                       {last, false, false}};
    AllTimeRecord r = aggregate_all_time(years);
    CHECK(r.last_dropout);
    Dataset ds = to_dataset(std::vector<AllTimeRecord>{r});
    CHECK(ds.label(0) == ClassLabel::Positive);
}

TEST_CASE("build_all_time groups by ssn and applies the cross-year rule") {
    std::vector<YearInput> years(2);
    years[0].year = 2001;
    years[0].enrollment = {student_year("S1", "ANNA BELL", 2001, 7),
                           student_year("S2", "BEN CODY", 2001, 8),
                           student_year("S3", "CARA DIAZ", 2001, 6)};
    years[1].year = 2002;
    auto s3_later = student_year("S3", "ZULEIKA VAZQUEZ", 2002, 7); // stolen ssn
    s3_later.birth_date = {1985, 2, 2};
    years[1].enrollment = {student_year("S1", "ANNA BELL", 2002, 8),
                           student_year("S2", "BEN CODY", 2002, 9), s3_later};

    BuildResult result = build_all_time(years);
    CHECK(result.dataset.n_rows() == 2); // S3 excluded by the all-time rule
    REQUIRE(result.conflicts.size() == 1);
    CHECK(result.conflicts[0].ssn == "S3");
    CHECK(result.conflicts[0].scope == "all-time");
    CHECK(std::is_sorted(result.ssns.begin(), result.ssns.end()));
}

TEST_CASE("build_all_time is deterministic") {
    SyntheticConfig cfg;
    cfg.n_students = 150;
    cfg.seed = 5;
    auto years_a = generate_synthetic(cfg);
    auto years_b = generate_synthetic(cfg);
    BuildResult a = build_all_time(years_a);
    BuildResult b = build_all_time(years_b);
    REQUIRE(a.dataset.n_rows() == b.dataset.n_rows());
    for (std::size_t i = 0; i < a.dataset.n_rows(); ++i) {
        CHECK(a.ssns[i] == b.ssns[i]);
        auto ra = a.dataset.row(i), rb = b.dataset.row(i);
        for (std::size_t j = 0; j < ra.size(); ++j)
            CHECK(ra[j] == rb[j]);
    }
}

TEST_CASE("generator rejects tiny cohorts and hits the target rate") {
    SyntheticConfig cfg;
    cfg.n_students = 50;
    CHECK_THROWS_AS(generate_synthetic(cfg), std::invalid_argument);

    cfg.n_students = 5000;
    cfg.dropout_rate = 0.05;
    cfg.seed = 11;
    BuildResult built = build_all_time(generate_synthetic(cfg));
    CHECK(built.conflicts.empty()); // clean mode
    ClassCounts c = class_counts(built.dataset);
    double rate = static_cast<double>(c.positive) / static_cast<double>(c.total());
    CHECK(rate == doctest::Approx(0.05).epsilon(0.25));
}

TEST_CASE("conflict injection logs about rate * n conflicts") {
    SyntheticConfig cfg;
    cfg.n_students = 2000;
    cfg.conflict_rate = 0.05;
    cfg.seed = 13;
    BuildResult built = build_all_time(generate_synthetic(cfg));
    double expected = 0.05 * 2000;
    CHECK(static_cast<double>(built.conflicts.size()) > expected * 0.6);
    CHECK(static_cast<double>(built.conflicts.size()) < expected * 1.4);
    // a year-scope conflict drops that year only; a student vanishes entirely
    // only when every year conflicts, so the roster never grows
    CHECK(built.dataset.n_rows() <= 2000);
    CHECK(built.dataset.n_rows() + built.conflicts.size() >= 2000);
}

TEST_CASE("the planted signal survives aggregation") {
    SyntheticConfig cfg;
    cfg.n_students = 4000;
    cfg.seed = 17;
    BuildResult built = build_all_time(generate_synthetic(cfg));
    const auto& schema = built.dataset.schema();
    std::size_t absent_col = 0;
    for (std::size_t j = 0; j < schema.size(); ++j)
        if (schema[j].name == "Avg Aggr Days Abs Cnt")
            absent_col = j;
    double pos_sum = 0.0, neg_sum = 0.0;
    std::size_t pos_n = 0, neg_n = 0;
    for (std::size_t i = 0; i < built.dataset.n_rows(); ++i) {
        if (built.dataset.label(i) == ClassLabel::Positive) {
            pos_sum += built.dataset.value(i, absent_col);
            ++pos_n;
        } else {
            neg_sum += built.dataset.value(i, absent_col);
            ++neg_n;
        }
    }
    REQUIRE(pos_n > 0);
    CHECK(pos_sum / static_cast<double>(pos_n) > neg_sum / static_cast<double>(neg_n));
}

TEST_CASE("yearly csv files round-trip") {
    SyntheticConfig cfg;
    cfg.n_students = 120;
    cfg.seed = 19;
    auto years = generate_synthetic(cfg);
    fs::path dir = fs::temp_directory_path() / "rarelearn_tests";
    fs::create_directories(dir);

    const YearInput* with_discipline = nullptr;
    for (const auto& y : years)
        if (!y.enrollment.empty() && !y.discipline.empty())
            with_discipline = &y;
    REQUIRE(with_discipline != nullptr);

    save_enrollment_csv(with_discipline->enrollment, dir / "enr.csv");
    auto enr = load_enrollment_csv(dir / "enr.csv");
    REQUIRE(enr.size() == with_discipline->enrollment.size());
    for (std::size_t i = 0; i < enr.size(); ++i) {
        CHECK(enr[i].ssn == with_discipline->enrollment[i].ssn);
        CHECK(enr[i].name == with_discipline->enrollment[i].name);
        CHECK(enr[i].birth_date == with_discipline->enrollment[i].birth_date);
        CHECK(enr[i].grade == with_discipline->enrollment[i].grade);
        CHECK(enr[i].days_absent == with_discipline->enrollment[i].days_absent);
        CHECK(enr[i].dropout == with_discipline->enrollment[i].dropout);
    }

    save_discipline_csv(with_discipline->discipline, dir / "dis.csv");
    auto dis = load_discipline_csv(dir / "dis.csv");
    REQUIRE(dis.size() == with_discipline->discipline.size());
    for (std::size_t i = 0; i < dis.size(); ++i) {
        CHECK(dis[i].ssn == with_discipline->discipline[i].ssn);
        CHECK(dis[i].suspension == with_discipline->discipline[i].suspension);
    }
}

TEST_CASE("alltime schema matches the canonical column order") {
    auto schema = alltime_schema();
    REQUIRE(schema.size() == 17);
    CHECK(schema[0].name == "Last Grade");
    CHECK(schema[0].kind.type == FeatureType::Ordinal);
    CHECK(schema[0].kind.ordinal_min == -1);
    CHECK(schema[0].kind.ordinal_max == 12);
    CHECK(schema[3].name == "Ethnic Cd");
    CHECK(schema[3].kind.ordinal_min == 1);
    CHECK(schema[3].kind.ordinal_max == 6);
    CHECK(schema[16].name == "Ever Expulsion");
    CHECK(alltime_label_column() == "Last Dropout Flag");
}

} // TEST_SUITE

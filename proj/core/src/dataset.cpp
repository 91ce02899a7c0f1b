#include "rarelearn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "rarelearn/rng.hpp"

namespace rarelearn {

namespace {

bool is_valid_cell(double v, const FeatureKind& kind) {
    switch (kind.type) {
    case FeatureType::Numeric:
        return std::isfinite(v);
    case FeatureType::Ordinal:
        return v == std::floor(v) && v >= kind.ordinal_min && v <= kind.ordinal_max;
    case FeatureType::Binary:
        return v == 0.0 || v == 1.0;
    }
    return false;
}

std::vector<std::string> split_csv_line(const std::string& line) {
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

} // namespace

Dataset::Dataset(std::vector<FeatureSchema> schema) : schema_(std::move(schema)) {
    std::unordered_set<std::string> seen;
    for (const auto& f : schema_) {
        if (!seen.insert(f.name).second)
            throw std::invalid_argument("duplicate feature name in schema: " + f.name);
    }
}

void Dataset::append_row(std::span<const double> values, ClassLabel label, double weight) {
    if (values.size() != schema_.size())
        throw std::invalid_argument("row arity does not match schema");
    for (std::size_t j = 0; j < values.size(); ++j) {
        if (!is_valid_cell(values[j], schema_[j].kind))
            throw std::invalid_argument("value " + format_double(values[j]) +
                                        " invalid for feature '" + schema_[j].name + "'");
    }
    if (weight >= 0.0) {
        if (weight == 0.0)
            throw std::invalid_argument("weights must be strictly positive");
        if (weights_.empty() && !labels_.empty())
            throw std::invalid_argument("cannot add a weighted row to an unweighted dataset");
        weights_.push_back(weight);
    } else if (!weights_.empty()) {
        throw std::invalid_argument("weighted dataset requires a weight for every row");
    }
    cells_.insert(cells_.end(), values.begin(), values.end());
    labels_.push_back(label);
}

void Dataset::set_weights(std::vector<double> w) {
    if (w.size() != labels_.size())
        throw std::invalid_argument("weights length must equal row count");
    for (double x : w)
        if (!(x > 0.0))
            throw std::invalid_argument("weights must be strictly positive");
    weights_ = std::move(w);
}

void Dataset::reserve(std::size_t rows) {
    cells_.reserve(rows * schema_.size());
    labels_.reserve(rows);
}

ClassCounts class_counts(const Dataset& ds) {
    ClassCounts c;
    for (ClassLabel l : ds.labels()) {
        if (l == ClassLabel::Positive)
            ++c.positive;
        else
            ++c.negative;
    }
    return c;
}

EncodedMatrix encode(const Dataset& ds) {
    EncodedMatrix m;
    m.n_rows = ds.n_rows();
    m.n_cols = ds.n_features();
    m.columns = ds.schema();
    m.values.reserve(m.n_rows * m.n_cols);
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
        auto r = ds.row(i);
        m.values.insert(m.values.end(), r.begin(), r.end());
    }
    return m;
}

std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, double train_fraction,
                                             std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("train_fraction must lie in (0,1)");

    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < ds.n_rows(); ++i)
        (ds.label(i) == ClassLabel::Positive ? pos : neg).push_back(i);
    if (pos.empty() || neg.empty())
        throw std::invalid_argument("stratified_split requires both classes present");

    std::vector<bool> in_train(ds.n_rows(), false);
    auto assign = [&](std::vector<std::size_t>& idx, const char* cls, std::uint64_t salt) {
        auto rng = make_rng(derive_seed(seed, salt));
        std::shuffle(idx.begin(), idx.end(), rng);
        // round-half-up keeps per-class proportions within 1/train_total
        auto train_n = static_cast<std::size_t>(
            std::floor(train_fraction * static_cast<double>(idx.size()) + 0.5));
        if (train_n == 0 || train_n == idx.size())
            throw std::runtime_error(std::string("stratified_split leaves class ") + cls +
                                     " empty on one side");
        for (std::size_t k = 0; k < train_n; ++k)
            in_train[idx[k]] = true;
    };
    assign(pos, "Positive", fnv1a("positive"));
    assign(neg, "Negative", fnv1a("negative"));

    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < ds.n_rows(); ++i)
        (in_train[i] ? train_idx : test_idx).push_back(i);
    return {subset(ds, train_idx), subset(ds, test_idx)};
}

Dataset subset(const Dataset& ds, std::span<const std::size_t> indices) {
    Dataset out(ds.schema());
    out.reserve(indices.size());
    for (std::size_t i : indices)
        out.append_row(ds.row(i), ds.label(i), ds.has_weights() ? ds.weight(i) : -1.0);
    return out;
}

std::string format_double(double v) {
    if (v == std::floor(v) && std::abs(v) < 1e15) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.0f", v);
        return buf;
    }
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v)
            break;
    }
    return buf;
}

namespace {

double parse_cell(const std::string& token, const FeatureKind& kind, std::size_t line_no,
                  const std::string& column) {
    auto fail = [&](const std::string& why) -> double {
        throw std::runtime_error("csv line " + std::to_string(line_no) + ", column '" + column +
                                 "': " + why + " ('" + token + "')");
    };
    if (token.empty())
        return fail("missing value");
    if (kind.type == FeatureType::Binary) {
        if (token == "Y")
            return 1.0;
        if (token == "N")
            return 0.0;
        return fail("expected Y or N");
    }
    const char* begin = token.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end != begin + token.size())
        return fail("not a number");
    if (!is_valid_cell(v, kind))
        return fail(kind.type == FeatureType::Ordinal ? "outside ordinal range" : "not finite");
    return v;
}

} // namespace

Dataset load_csv(const std::filesystem::path& path, const std::vector<FeatureSchema>& schema,
                 const std::string& label_column) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("empty file: " + path.string());

    auto header = split_csv_line(line);
    auto find_col = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end())
            throw std::runtime_error("missing column '" + name + "' in " + path.string());
        return static_cast<std::size_t>(it - header.begin());
    };
    std::vector<std::size_t> col_of(schema.size());
    for (std::size_t j = 0; j < schema.size(); ++j)
        col_of[j] = find_col(schema[j].name);
    std::size_t label_col = find_col(label_column);

    Dataset ds(schema);
    std::vector<double> row(schema.size());
    const FeatureKind label_kind = FeatureKind::binary();
    for (std::size_t line_no = 2; std::getline(in, line); ++line_no) {
        if (line.empty() || (line.size() == 1 && line[0] == '\r'))
            continue;
        auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw std::runtime_error("csv line " + std::to_string(line_no) + ": expected " +
                                     std::to_string(header.size()) + " fields, got " +
                                     std::to_string(fields.size()));
        for (std::size_t j = 0; j < schema.size(); ++j)
            row[j] = parse_cell(fields[col_of[j]], schema[j].kind, line_no, schema[j].name);
        double lv = parse_cell(fields[label_col], label_kind, line_no, label_column);
        ds.append_row(row, lv == 1.0 ? ClassLabel::Positive : ClassLabel::Negative);
    }
    return ds;
}

void save_csv(const Dataset& ds, const std::filesystem::path& path,
              const std::string& label_column) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    const auto& schema = ds.schema();
    for (const auto& f : schema)
        out << f.name << ',';
    out << label_column << '\n';
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
        auto r = ds.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) {
            if (schema[j].kind.type == FeatureType::Binary)
                out << (r[j] == 1.0 ? "Y" : "N");
            else
                out << format_double(r[j]);
            out << ',';
        }
        out << to_token(ds.label(i)) << '\n';
    }
    if (!out)
        throw std::runtime_error("write failed: " + path.string());
}

} // namespace rarelearn

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace rarelearn {

// Positive is the rare class of interest ("Y"); Negative is "N".
enum class ClassLabel : std::uint8_t { Negative = 0, Positive = 1 };

inline const char* to_token(ClassLabel l) {
    return l == ClassLabel::Positive ? "Y" : "N";
}

enum class FeatureType : std::uint8_t { Numeric, Ordinal, Binary };

// Ordinal carries an inclusive integer range. Binary admits exactly the
// tokens "Y"/"N", stored as 1/0.
struct FeatureKind {
    FeatureType type = FeatureType::Numeric;
    int ordinal_min = 0;
    int ordinal_max = 0;

    static FeatureKind numeric() { return {FeatureType::Numeric, 0, 0}; }
    static FeatureKind ordinal(int min, int max) { return {FeatureType::Ordinal, min, max}; }
    static FeatureKind binary() { return {FeatureType::Binary, 0, 1}; }
};

struct FeatureSchema {
    std::string name;
    FeatureKind kind;
};

// Typed tabular instances with binary labels and optional per-instance
// weights. Cell values are stored in encoded form: binary Y/N as 1/0,
// ordinals as their integer level, numerics as-is. Datasets are immutable
// once built and safe to share read-only across threads.
class Dataset {
public:
    Dataset() = default;
    explicit Dataset(std::vector<FeatureSchema> schema);

    std::size_t n_rows() const { return labels_.size(); }
    std::size_t n_features() const { return schema_.size(); }
    const std::vector<FeatureSchema>& schema() const { return schema_; }

    std::span<const double> row(std::size_t i) const {
        return {cells_.data() + i * schema_.size(), schema_.size()};
    }
    double value(std::size_t row, std::size_t col) const {
        return cells_[row * schema_.size() + col];
    }
    ClassLabel label(std::size_t i) const { return labels_[i]; }
    const std::vector<ClassLabel>& labels() const { return labels_; }

    bool has_weights() const { return !weights_.empty(); }
    double weight(std::size_t i) const { return weights_.empty() ? 1.0 : weights_[i]; }
    const std::vector<double>& weights() const { return weights_; }

    // Validates every value against its feature kind; throws std::invalid_argument.
    void append_row(std::span<const double> values, ClassLabel label, double weight = -1.0);
    void set_weights(std::vector<double> w);
    void clear_weights() { weights_.clear(); }
    void reserve(std::size_t rows);

private:
    std::vector<FeatureSchema> schema_;
    std::vector<double> cells_; // row-major
    std::vector<ClassLabel> labels_;
    std::vector<double> weights_; // empty = unweighted
};

struct ClassCounts {
    std::size_t positive = 0;
    std::size_t negative = 0;
    std::size_t total() const { return positive + negative; }
};

ClassCounts class_counts(const Dataset& ds);

// Row-major real matrix plus the schema its columns map back to.
struct EncodedMatrix {
    std::vector<double> values;
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<FeatureSchema> columns;

    const double* row(std::size_t i) const { return values.data() + i * n_cols; }
    double at(std::size_t r, std::size_t c) const { return values[r * n_cols + c]; }
};

EncodedMatrix encode(const Dataset& ds);

// Per-class train counts are round-half-up of train_fraction * class count,
// remainder to test. Row order within each side follows the original dataset.
// Throws if any class would end up empty on either side.
std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, double train_fraction,
                                             std::uint64_t seed);

Dataset subset(const Dataset& ds, std::span<const std::size_t> indices);

// CSV, comma separated, first row = header, "Y"/"N" for binary fields.
// The header must cover every schema column plus the label column; extra
// columns are ignored. Parse errors name the offending line and column.
Dataset load_csv(const std::filesystem::path& path, const std::vector<FeatureSchema>& schema,
                 const std::string& label_column);

void save_csv(const Dataset& ds, const std::filesystem::path& path,
              const std::string& label_column);

// Shortest decimal representation that round-trips through strtod.
std::string format_double(double v);

} // namespace rarelearn

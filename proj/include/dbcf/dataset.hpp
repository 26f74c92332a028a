#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace dbcf {

using Label = int;
inline constexpr Label kNoiseLabel = -1;

/// Dense row-major numeric feature matrix. The space every distance,
/// neighbourhood and placement is measured in.
struct DatasetMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;               // rows * cols, row-major
    std::vector<std::string> column_names;
    std::vector<std::string> row_ids;         // empty unless the source carried an "id" column

    std::span<const double> row(std::size_t r) const {
        return {values.data() + r * cols, cols};
    }
    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

/// Validates invariants (finite values, non-empty, matching names) and returns
/// the dataset. Column names default to x0..x{n-1}.
DatasetMatrix make_dataset(std::size_t rows, std::size_t cols, std::vector<double> values,
                           std::vector<std::string> column_names = {});

/// CSV ingestion: first row is the header, cells are decimal floats with '.'
/// separator, comma-delimited, no quoting. A column named "id" is carried as
/// row identity and excluded from the features.
DatasetMatrix load_csv(const std::filesystem::path& path);

enum class MetricKind { Euclidean };

struct MetricSpace {
    MetricKind kind = MetricKind::Euclidean;
};

double distance(std::span<const double> a, std::span<const double> b, MetricSpace space = {});

/// Per-column standardization (z-score). Constant columns get the stddev
/// floor so they pass through as zeros instead of erroring.
struct ScalingTransform {
    std::vector<double> mean;
    std::vector<double> stddev;  // every entry >= kStddevFloor

    static constexpr double kStddevFloor = 1e-12;

    std::size_t cols() const { return mean.size(); }
    std::vector<double> apply_row(std::span<const double> x) const;
    std::vector<double> invert_row(std::span<const double> z) const;
    DatasetMatrix apply(const DatasetMatrix& data) const;
};

/// Population statistics (divide by row count). Requires rows >= 2.
ScalingTransform fit_scaling(const DatasetMatrix& data);

enum class MonotonicDirection { IncreaseOnly, DecreaseOnly };

struct MonotonicBound {
    MonotonicDirection direction = MonotonicDirection::IncreaseOnly;
    double slack = 0.0;  // >= 0; how far the wrong direction is still tolerated
};

enum class CorrelationSign { Positive, Negative };

struct CorrelatedGroup {
    std::vector<std::size_t> columns;  // >= 2 distinct columns
    CorrelationSign sign = CorrelationSign::Positive;
};

/// Actionability constraints relative to an origin point: frozen columns,
/// one-directional columns (with slack), and sign-coupled column groups.
struct ConstraintSpec {
    std::set<std::size_t> non_actionable;
    std::map<std::size_t, MonotonicBound> monotonic;
    std::vector<CorrelatedGroup> correlated_groups;

    bool empty() const {
        return non_actionable.empty() && monotonic.empty() && correlated_groups.empty();
    }
    /// Throws InvalidParameter on overlapping/monotonic-frozen columns,
    /// out-of-range indices, or all columns frozen.
    void validate(std::size_t num_cols) const;
};

/// True iff candidate stays in the valid region anchored at origin:
/// frozen columns exactly equal, monotonic columns inside their halfspace
/// (with slack), and each correlated group's deltas sharing the required
/// sign pattern (zero deltas are compatible with either sign).
bool valid_region_contains(std::span<const double> candidate, std::span<const double> origin,
                           const ConstraintSpec& spec);

}  // namespace dbcf

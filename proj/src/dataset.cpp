#include "dbcf/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dbcf/errors.hpp"

namespace dbcf {

namespace {

void validate_matrix(const DatasetMatrix& data) {
    if (data.rows < 1 || data.cols < 1) {
        throw EmptyDataset("dataset must have at least one row and one column");
    }
    if (data.values.size() != data.rows * data.cols) {
        throw InvalidParameter("value buffer size does not match rows*cols");
    }
    if (data.column_names.size() != data.cols) {
        throw InvalidParameter("column_names length does not match column count");
    }
    for (double v : data.values) {
        if (!std::isfinite(v)) throw InvalidParameter("dataset contains non-finite values");
    }
}

double parse_cell(const std::string& cell, std::size_t line_no) {
    double v = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end != begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r')) --end;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end) {
        throw ParseError("line " + std::to_string(line_no) + ": cannot parse numeric cell '" +
                         cell + "'");
    }
    return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace

DatasetMatrix make_dataset(std::size_t rows, std::size_t cols, std::vector<double> values,
                           std::vector<std::string> column_names) {
    DatasetMatrix data;
    data.rows = rows;
    data.cols = cols;
    data.values = std::move(values);
    if (column_names.empty()) {
        for (std::size_t c = 0; c < cols; ++c) column_names.push_back("x" + std::to_string(c));
    }
    data.column_names = std::move(column_names);
    validate_matrix(data);
    return data;
}

DatasetMatrix load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset file: " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty CSV file: " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::vector<std::string> header = split_csv_line(line);
    std::size_t id_col = header.size();
    for (std::size_t c = 0; c < header.size(); ++c) {
        std::string name = header[c];
        name.erase(std::remove_if(name.begin(), name.end(),
                                  [](unsigned char ch) { return std::isspace(ch); }),
                   name.end());
        header[c] = name;
        if (name == "id") id_col = c;
    }

    DatasetMatrix data;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c != id_col) data.column_names.push_back(header[c]);
    }
    data.cols = data.column_names.size();
    if (data.cols == 0) throw ParseError("CSV has no feature columns: " + path.string());

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw ParseError("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " cells, got " +
                             std::to_string(cells.size()));
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c == id_col) {
                data.row_ids.push_back(cells[c]);
            } else {
                data.values.push_back(parse_cell(cells[c], line_no));
            }
        }
        ++data.rows;
    }
    validate_matrix(data);
    return data;
}

double distance(std::span<const double> a, std::span<const double> b, MetricSpace space) {
    if (a.size() != b.size()) throw DimensionMismatch(a.size(), b.size());
    switch (space.kind) {
        case MetricKind::Euclidean: {
            double sq = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) {
                const double d = a[i] - b[i];
                sq += d * d;
            }
            return std::sqrt(sq);
        }
    }
    throw InvalidParameter("unsupported metric kind");
}

ScalingTransform fit_scaling(const DatasetMatrix& data) {
    if (data.rows < 2) throw EmptyDataset("scaling needs at least two rows");
    ScalingTransform t;
    t.mean.assign(data.cols, 0.0);
    t.stddev.assign(data.cols, 0.0);
    for (std::size_t r = 0; r < data.rows; ++r) {
        for (std::size_t c = 0; c < data.cols; ++c) t.mean[c] += data.at(r, c);
    }
    for (double& m : t.mean) m /= static_cast<double>(data.rows);
    for (std::size_t r = 0; r < data.rows; ++r) {
        for (std::size_t c = 0; c < data.cols; ++c) {
            const double d = data.at(r, c) - t.mean[c];
            t.stddev[c] += d * d;
        }
    }
    for (double& s : t.stddev) {
        s = std::sqrt(s / static_cast<double>(data.rows));  // population formula
        s = std::max(s, ScalingTransform::kStddevFloor);
    }
    return t;
}

std::vector<double> ScalingTransform::apply_row(std::span<const double> x) const {
    if (x.size() != cols()) throw DimensionMismatch(cols(), x.size());
    std::vector<double> z(x.size());
    for (std::size_t c = 0; c < x.size(); ++c) z[c] = (x[c] - mean[c]) / stddev[c];
    return z;
}

std::vector<double> ScalingTransform::invert_row(std::span<const double> z) const {
    if (z.size() != cols()) throw DimensionMismatch(cols(), z.size());
    std::vector<double> x(z.size());
    for (std::size_t c = 0; c < z.size(); ++c) x[c] = z[c] * stddev[c] + mean[c];
    return x;
}

DatasetMatrix ScalingTransform::apply(const DatasetMatrix& data) const {
    if (data.cols != cols()) throw DimensionMismatch(cols(), data.cols);
    DatasetMatrix out = data;
    for (std::size_t r = 0; r < data.rows; ++r) {
        for (std::size_t c = 0; c < data.cols; ++c) {
            out.values[r * data.cols + c] = (data.at(r, c) - mean[c]) / stddev[c];
        }
    }
    return out;
}

void ConstraintSpec::validate(std::size_t num_cols) const {
    auto check_col = [num_cols](std::size_t col) {
        if (col >= num_cols) {
            throw InvalidParameter("constraint column " + std::to_string(col) + " out of range");
        }
    };
    for (std::size_t col : non_actionable) check_col(col);
    if (!non_actionable.empty() && non_actionable.size() >= num_cols) {
        throw InvalidParameter("at least one feature must stay actionable");
    }
    for (const auto& [col, bound] : monotonic) {
        check_col(col);
        if (bound.slack < 0.0) throw InvalidParameter("monotonic slack must be >= 0");
        if (non_actionable.count(col)) {
            throw InvalidParameter("column " + std::to_string(col) +
                                   " cannot be both frozen and monotonic");
        }
    }
    for (const auto& group : correlated_groups) {
        if (group.columns.size() < 2) {
            throw InvalidParameter("correlated group needs at least two columns");
        }
        std::set<std::size_t> seen;
        for (std::size_t col : group.columns) {
            check_col(col);
            if (!seen.insert(col).second) {
                throw InvalidParameter("correlated group repeats column " + std::to_string(col));
            }
        }
    }
}

bool valid_region_contains(std::span<const double> candidate, std::span<const double> origin,
                           const ConstraintSpec& spec) {
    if (candidate.size() != origin.size()) throw DimensionMismatch(origin.size(), candidate.size());
    for (std::size_t col : spec.non_actionable) {
        if (candidate[col] != origin[col]) return false;  // exact equality: frozen feature
    }
    for (const auto& [col, bound] : spec.monotonic) {
        if (bound.direction == MonotonicDirection::IncreaseOnly) {
            if (candidate[col] < origin[col] - bound.slack) return false;
        } else {
            if (candidate[col] > origin[col] + bound.slack) return false;
        }
    }
    for (const auto& group : spec.correlated_groups) {
        bool has_pos = false;
        bool has_neg = false;
        for (std::size_t col : group.columns) {
            const double delta = candidate[col] - origin[col];
            if (delta > 0.0) has_pos = true;
            if (delta < 0.0) has_neg = true;
        }
        if (group.sign == CorrelationSign::Positive) {
            if (has_pos && has_neg) return false;
        } else {
            // Negative coupling: no two strict deltas may share a sign. With
            // zeros wild, that means at most one strict positive and at most
            // one strict negative, which for the pairwise case reduces to
            // "signs differ or at least one delta is zero".
            std::size_t pos = 0;
            std::size_t neg = 0;
            for (std::size_t col : group.columns) {
                const double delta = candidate[col] - origin[col];
                if (delta > 0.0) ++pos;
                if (delta < 0.0) ++neg;
            }
            if (pos > 1 || neg > 1) return false;
        }
    }
    return true;
}

}  // namespace dbcf

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dbcf/metrics.hpp"

namespace dbcf {

/// Benchmark configuration; mirrors the flat key = value config file parsed
/// by parse_config_file. See README for the documented keys.
struct ExperimentConfig {
    std::string dataset_path;
    double epsilon = 0.0;
    int min_pts = 1;
    int k = 10;
    int samples_per_partition = 10;
    std::vector<Strategy> strategies{Strategy::Greedy};
    std::uint64_t seed = 0;
    bool standardize = true;
    std::optional<std::string> constraints_path;
    int lof_k = 20;
    std::string output_dir = ".";
    int threads = 1;
    bool with_timings = false;  // adds a runtime column; breaks byte-determinism

    void validate() const;
};

ExperimentConfig parse_config_file(const std::filesystem::path& path);

/// Constraint file: one directive per line. Supported directives:
///   non_actionable = <col>[, <col>...]
///   increase_only  = <col> [: <slack>]
///   decrease_only  = <col> [: <slack>]
///   positive_group = <col>, <col>[, ...]
///   negative_group = <col>, <col>[, ...]
ConstraintSpec parse_constraints_file(const std::filesystem::path& path);

struct PlannedQuery {
    std::size_t query_id = 0;
    std::size_t source_row = 0;
    Label source_partition = kNoiseLabel;
    Label target = kNoiseLabel;
    std::uint64_t seed = 0;
};

struct QueryPlan {
    std::vector<PlannedQuery> queries;
};

/// Samples min(samples_per_partition, |partition|) source rows per partition
/// without replacement; cluster sources target every other cluster, noise
/// sources target every cluster. Deterministic given the config seed
/// (splitmix-style expansion into per-partition and per-query streams).
QueryPlan build_query_plan(const DbscanModel& model, const ExperimentConfig& config);

/// Runs the full benchmark and writes counterfactuals.csv, metrics.csv,
/// curve_<metric>_<strategy>.csv and summary.csv into output_dir. Queries run
/// in parallel (config.threads) and are gathered in plan order, so the output
/// bytes do not depend on the parallelism degree.
void run_experiment(const ExperimentConfig& config);

/// Serialized clustering: a key=value header line (epsilon, min_pts,
/// num_clusters, cols, rows, standardize, dataset) followed by one
/// "row_index,label,is_core" line per row.
void save_model(const DbscanModel& model, bool standardized, const std::string& dataset_path,
                const std::filesystem::path& out_path);

struct LoadedModel {
    DbscanModel model;               // in the fitted (possibly standardized) space
    bool standardized = false;
    std::optional<ScalingTransform> scaling;
    DatasetMatrix raw_data;          // original units
    std::string dataset_path;
};

LoadedModel load_model(const std::filesystem::path& model_path,
                       std::optional<std::string> dataset_override = std::nullopt);

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double value);

/// Constraints are written in original feature units; in a standardized model
/// space the monotonic slacks shrink by the column scale (directions and
/// signs are preserved because the scale is positive).
ConstraintSpec constraints_to_fitted_space(const ConstraintSpec& spec,
                                           const std::optional<ScalingTransform>& scaling);

}  // namespace dbcf

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dbcf/constructor.hpp"

namespace dbcf {

/// Per-query evaluation results. The four quality metrics are undefined
/// exactly when validity is zero.
struct QueryMetrics {
    double validity = 0.0;
    std::optional<double> proximity;
    std::optional<double> diversity;
    std::optional<double> sparsity;
    std::optional<double> plausibility;
    double runtime_seconds = 0.0;
};

/// Fraction of returned counterfactuals assigned to their target cluster;
/// zero for an empty set. When target is given it overrides the per-item
/// targets (single-target queries).
double validity(const CounterfactualSet& set, const DbscanModel& model,
                std::optional<Label> target = std::nullopt);

/// Mean distance from the origin to each valid counterfactual, in the fitted
/// feature space.
double proximity(const CounterfactualSet& set, std::span<const double> origin,
                 MetricSpace space = {});

enum class DiversityDistance {
    CoreGraph,               // unscaled shortest-path distance between reference cores
    CounterfactualEuclidean  // straight-line distance between the counterfactuals
};

/// Determinant of the kernel K_ij = 1 / (1 + d(cf_i, cf_j)) over the valid
/// counterfactuals of a single target cluster.
double diversity(const CounterfactualSet& set, const ClusterGraph& graph,
                 DiversityDistance mode = DiversityDistance::CoreGraph);

/// Any-target variant: per-cluster determinants multiplied (block-diagonal
/// kernel; cross-cluster pairs are treated as infinitely distant).
double diversity_product(const CounterfactualSet& set, const std::vector<ClusterGraph>& graphs,
                         DiversityDistance mode = DiversityDistance::CoreGraph);

/// Mean proportion of features changed, with a relative change threshold of
/// 1e-9 * max(1, |origin_j|) per column.
double sparsity(const CounterfactualSet& set, std::span<const double> origin);

/// Standard local outlier factor of an arbitrary point with respect to the
/// dataset rows; ties within the k-distance are included in the
/// neighbourhood, and reachability means are floored to keep duplicates
/// finite.
double lof_score(std::span<const double> point, const DatasetMatrix& data, int k_neighbors,
                 MetricSpace space = {});

/// Precomputed per-row LOF statistics so many query points can be scored
/// against the same dataset without redoing the O(l^2) setup.
class LofTable {
public:
    LofTable(DatasetMatrix data, int k_neighbors, MetricSpace space = {});
    double score(std::span<const double> point) const;

private:
    DatasetMatrix data_;
    MetricSpace space_;
    std::size_t k_;
    std::vector<double> k_dist_;
    std::vector<double> lrd_;
};

enum class CurveOrder { Ascending, Descending };

struct PercentilePoint {
    double percent = 0.0;  // 100 * r / N
    double value = 0.0;
};

struct PercentileCurve {
    std::vector<PercentilePoint> points;
};

/// Sorted metric values paired with their cumulative query percentage; failed
/// queries contribute no points, so the curve ends before 100 when some of
/// the N queries produced no value.
PercentileCurve percentile_curve(std::vector<double> values, std::size_t total_queries,
                                 CurveOrder order = CurveOrder::Ascending);

/// All metrics for one finished query.
QueryMetrics compute_query_metrics(const CounterfactualSet& set, const DbscanModel& model,
                                   const std::vector<ClusterGraph>& graphs,
                                   std::span<const double> origin, int lof_k);

/// Same, but reusing a prebuilt LOF table (the experiment runner scores many
/// counterfactuals against the same fitted dataset).
QueryMetrics compute_query_metrics(const CounterfactualSet& set, const DbscanModel& model,
                                   const std::vector<ClusterGraph>& graphs,
                                   std::span<const double> origin, const LofTable& lof);

}  // namespace dbcf

#pragma once

#include <span>
#include <vector>

#include "dbcf/dataset.hpp"

namespace dbcf {

/// Frozen clustering. The fitted data is owned by the model so assignment
/// queries stay valid for the model's whole lifetime.
struct DbscanModel {
    double epsilon = 0.0;
    int min_pts = 1;
    std::vector<Label> labels;       // per row: -1 noise or 0..num_clusters-1
    std::vector<bool> is_core;       // per row
    Label num_clusters = 0;
    DatasetMatrix data;
    MetricSpace space;
};

/// Fits DBSCAN with the <= epsilon neighbourhood predicate; a point's
/// neighbourhood counts the point itself. Cluster numbering is deterministic:
/// clusters are indexed by the smallest row index of any member, ascending.
/// Border points join the cluster of their nearest core (ties by smaller core
/// row index), which makes the labelling order-independent.
DbscanModel fit(DatasetMatrix data, double epsilon, int min_pts, MetricSpace space = {});

/// Out-of-dataset assignment: the cluster of the nearest core point within
/// epsilon (ties by smaller label), or noise (-1) when no core is in reach.
Label assign(const DbscanModel& model, std::span<const double> p);

/// Row indices of the cluster's core points, ascending. Non-empty for every
/// valid cluster.
std::vector<std::size_t> core_points_of(const DbscanModel& model, Label cluster);

}  // namespace dbcf

#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "dbcf/dbscan.hpp"

namespace dbcf {

/// Single-source shortest-path distances over a cluster graph. dist is
/// indexed by local vertex position; scale is the multiplier already applied
/// (1.0 when unscaled).
struct PathDistanceTable {
    std::size_t source_row = 0;
    std::vector<double> dist;
    double scale = 1.0;
};

/// Undirected weighted graph over one cluster's core points. Vertices are
/// dataset row indices (ascending); edges join cores at metric distance
/// <= epsilon, weighted by that distance. Connected by construction.
class ClusterGraph {
public:
    ClusterGraph() = default;

    Label cluster() const { return cluster_; }
    double epsilon() const { return epsilon_; }
    const std::vector<std::size_t>& vertices() const { return vertices_; }
    std::size_t size() const { return vertices_.size(); }
    std::size_t num_edges() const { return num_edges_; }

    std::span<const double> coords(std::size_t local) const {
        return {vertex_coords_.data() + local * dim_, dim_};
    }
    const std::vector<std::pair<std::size_t, double>>& neighbors(std::size_t local) const {
        return adjacency_[local];
    }

    /// Local position of a dataset row, or nullopt if not a vertex.
    std::optional<std::size_t> local_index(std::size_t row) const;

    /// Unscaled weighted shortest-path distance between two vertices (by
    /// dataset row). Tables are computed lazily per source and cached; scaled
    /// queries reuse the same cache since scaling all edges by a constant
    /// scales every path length by that constant.
    double path_distance(std::size_t row_u, std::size_t row_v) const;

    /// Arithmetic mean of all edge weights; 0 when the graph has no edges.
    double mean_edge_weight() const;

    /// Writes "u,v,weight" lines (dataset row indices) for inspection.
    void export_edge_list(const std::filesystem::path& path) const;

    friend ClusterGraph build_graph(const DbscanModel& model, Label cluster);
    friend PathDistanceTable shortest_path_from(const ClusterGraph& graph, std::size_t source_row,
                                                double scale);

private:
    const std::vector<double>& distances_from(std::size_t local) const;

    Label cluster_ = 0;
    double epsilon_ = 0.0;
    std::size_t dim_ = 0;
    std::size_t num_edges_ = 0;
    std::vector<std::size_t> vertices_;
    std::vector<double> vertex_coords_;  // |V| x dim, row-major
    std::vector<std::vector<std::pair<std::size_t, double>>> adjacency_;

    struct PathCache {
        std::mutex mutex;
        std::unordered_map<std::size_t, std::vector<double>> by_source;  // local -> dist
    };
    std::shared_ptr<PathCache> cache_;
};

ClusterGraph build_graph(const DbscanModel& model, Label cluster);

/// Dijkstra from a vertex given by dataset row index. Scaling every edge by
/// a constant scales every path length by the same constant, so scaled
/// tables reuse the unscaled cache.
PathDistanceTable shortest_path_from(const ClusterGraph& graph, std::size_t source_row,
                                     double scale = 1.0);

/// Builds one graph per cluster, indexed by label.
std::vector<ClusterGraph> build_all_graphs(const DbscanModel& model);

/// Vertices (dataset rows, ascending) whose epsilon-ball is reachable without
/// leaving the constraint region anchored at origin: frozen-subspace distance
/// <= epsilon, monotonic halfspace within epsilon (plus slack), and for each
/// correlated pair the epsilon-ball intersecting the allowed quadrant union.
std::vector<std::size_t> admissible_vertices(const ClusterGraph& graph,
                                             std::span<const double> origin,
                                             const ConstraintSpec& spec, double epsilon);

/// Graph-distance scale d_c / mean-edge-weight; 1.0 for edgeless graphs.
double normalization_scale(const ClusterGraph& graph, double d_c);

}  // namespace dbcf

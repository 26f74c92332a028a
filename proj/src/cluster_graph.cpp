#include "dbcf/cluster_graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>

#include "dbcf/errors.hpp"

namespace dbcf {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::optional<std::size_t> ClusterGraph::local_index(std::size_t row) const {
    auto it = std::lower_bound(vertices_.begin(), vertices_.end(), row);
    if (it == vertices_.end() || *it != row) return std::nullopt;
    return static_cast<std::size_t>(it - vertices_.begin());
}

const std::vector<double>& ClusterGraph::distances_from(std::size_t local) const {
    std::lock_guard<std::mutex> lock(cache_->mutex);
    auto it = cache_->by_source.find(local);
    if (it != cache_->by_source.end()) return it->second;

    std::vector<double> dist(vertices_.size(), kInf);
    dist[local] = 0.0;
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    heap.emplace(0.0, local);
    while (!heap.empty()) {
        const auto [d, u] = heap.top();
        heap.pop();
        if (d > dist[u]) continue;
        for (const auto& [v, w] : adjacency_[u]) {
            const double nd = d + w;
            if (nd < dist[v]) {
                dist[v] = nd;
                heap.emplace(nd, v);
            }
        }
    }
    return cache_->by_source.emplace(local, std::move(dist)).first->second;
}

double ClusterGraph::path_distance(std::size_t row_u, std::size_t row_v) const {
    const auto u = local_index(row_u);
    if (!u) throw UnknownVertex(row_u);
    const auto v = local_index(row_v);
    if (!v) throw UnknownVertex(row_v);
    return distances_from(*u)[*v];
}

double ClusterGraph::mean_edge_weight() const {
    if (num_edges_ == 0) return 0.0;
    double total = 0.0;
    for (std::size_t u = 0; u < adjacency_.size(); ++u) {
        for (const auto& [v, w] : adjacency_[u]) {
            if (v > u) total += w;  // count each undirected edge once
        }
    }
    return total / static_cast<double>(num_edges_);
}

void ClusterGraph::export_edge_list(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open edge-list file: " + path.string());
    for (std::size_t u = 0; u < adjacency_.size(); ++u) {
        for (const auto& [v, w] : adjacency_[u]) {
            if (v > u) out << vertices_[u] << ',' << vertices_[v] << ',' << w << '\n';
        }
    }
}

ClusterGraph build_graph(const DbscanModel& model, Label cluster) {
    ClusterGraph g;
    g.cluster_ = cluster;
    g.epsilon_ = model.epsilon;
    g.dim_ = model.data.cols;
    g.vertices_ = core_points_of(model, cluster);  // throws UnknownCluster
    g.cache_ = std::make_shared<ClusterGraph::PathCache>();

    const std::size_t n = g.vertices_.size();
    g.vertex_coords_.reserve(n * g.dim_);
    for (std::size_t row : g.vertices_) {
        const auto r = model.data.row(row);
        g.vertex_coords_.insert(g.vertex_coords_.end(), r.begin(), r.end());
    }

    g.adjacency_.assign(n, {});
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = u + 1; v < n; ++v) {
            const double w = distance(g.coords(u), g.coords(v), model.space);
            if (w <= model.epsilon) {
                g.adjacency_[u].emplace_back(v, w);
                g.adjacency_[v].emplace_back(u, w);
                ++g.num_edges_;
            }
        }
    }

    // Cores of one cluster are density-connected, so the graph must come out
    // connected; anything else means the model was corrupted upstream.
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    std::size_t reached = 1;
    while (!stack.empty()) {
        const std::size_t u = stack.back();
        stack.pop_back();
        for (const auto& [v, w] : g.adjacency_[u]) {
            if (!seen[v]) {
                seen[v] = true;
                ++reached;
                stack.push_back(v);
            }
        }
    }
    if (reached != n) {
        throw InternalInconsistency("core graph of cluster " + std::to_string(cluster) +
                                    " is disconnected");
    }
    return g;
}

PathDistanceTable shortest_path_from(const ClusterGraph& graph, std::size_t source_row,
                                     double scale) {
    if (scale <= 0.0) throw InvalidParameter("path distance scale must be > 0");
    const auto local = graph.local_index(source_row);
    if (!local) throw UnknownVertex(source_row);
    PathDistanceTable table;
    table.source_row = source_row;
    table.scale = scale;
    table.dist = graph.distances_from(*local);
    if (scale != 1.0) {
        for (double& d : table.dist) d *= scale;
    }
    return table;
}

std::vector<ClusterGraph> build_all_graphs(const DbscanModel& model) {
    std::vector<ClusterGraph> graphs;
    graphs.reserve(model.num_clusters);
    for (Label c = 0; c < model.num_clusters; ++c) graphs.push_back(build_graph(model, c));
    return graphs;
}

namespace {

/// Distance from the 2-D delta (a, b) to the union of the two quadrants where
/// the coordinates share the required sign relation. Zero when already inside.
double quadrant_union_distance(double a, double b, CorrelationSign sign) {
    if (sign == CorrelationSign::Positive) {
        if ((a >= 0.0 && b >= 0.0) || (a <= 0.0 && b <= 0.0)) return 0.0;
        return std::min(std::abs(a), std::abs(b));
    }
    if ((a >= 0.0 && b <= 0.0) || (a <= 0.0 && b >= 0.0)) return 0.0;
    return std::min(std::abs(a), std::abs(b));
}

}  // namespace

std::vector<std::size_t> admissible_vertices(const ClusterGraph& graph,
                                             std::span<const double> origin,
                                             const ConstraintSpec& spec, double epsilon) {
    spec.validate(origin.size());
    std::vector<std::size_t> kept;
    kept.reserve(graph.size());
    for (std::size_t local = 0; local < graph.size(); ++local) {
        const auto q = graph.coords(local);
        if (q.size() != origin.size()) throw DimensionMismatch(origin.size(), q.size());

        bool ok = true;
        if (!spec.non_actionable.empty()) {
            double sq = 0.0;
            for (std::size_t col : spec.non_actionable) {
                const double d = origin[col] - q[col];
                sq += d * d;
            }
            ok = std::sqrt(sq) <= epsilon;
        }
        if (ok) {
            for (const auto& [col, bound] : spec.monotonic) {
                if (bound.direction == MonotonicDirection::IncreaseOnly) {
                    ok = q[col] + epsilon >= origin[col] - bound.slack;
                } else {
                    ok = q[col] - epsilon <= origin[col] + bound.slack;
                }
                if (!ok) break;
            }
        }
        if (ok) {
            for (const auto& group : spec.correlated_groups) {
                for (std::size_t i = 0; i < group.columns.size() && ok; ++i) {
                    for (std::size_t j = i + 1; j < group.columns.size() && ok; ++j) {
                        const double a = q[group.columns[i]] - origin[group.columns[i]];
                        const double b = q[group.columns[j]] - origin[group.columns[j]];
                        ok = quadrant_union_distance(a, b, group.sign) <= epsilon;
                    }
                }
                if (!ok) break;
            }
        }
        if (ok) kept.push_back(graph.vertices()[local]);
    }
    return kept;
}

double normalization_scale(const ClusterGraph& graph, double d_c) {
    if (d_c <= 0.0) throw InvalidParameter("d_c must be > 0");
    const double mean = graph.mean_edge_weight();
    if (mean <= 0.0) return 1.0;  // edgeless (or degenerate) graph: nothing to normalize
    return d_c / mean;
}

}  // namespace dbcf

#include "dbcf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "dbcf/errors.hpp"

namespace dbcf {

namespace {

constexpr double kLofFloor = 1e-12;

std::vector<const Counterfactual*> valid_items(const CounterfactualSet& set) {
    std::vector<const Counterfactual*> out;
    for (const Counterfactual& cf : set.items) {
        if (cf.valid) out.push_back(&cf);
    }
    return out;
}

/// Determinant by Gaussian elimination with partial pivoting; matrices here
/// are k x k for small k.
double det(std::vector<std::vector<double>> m) {
    const std::size_t n = m.size();
    double d = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
        }
        if (m[pivot][col] == 0.0) return 0.0;
        if (pivot != col) {
            std::swap(m[pivot], m[col]);
            d = -d;
        }
        d *= m[col][col];
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = m[r][col] / m[col][col];
            for (std::size_t c = col; c < n; ++c) m[r][c] -= f * m[col][c];
        }
    }
    return d;
}

double kernel_determinant(const std::vector<const Counterfactual*>& items,
                          const ClusterGraph& graph, DiversityDistance mode) {
    const std::size_t n = items.size();
    std::vector<std::vector<double>> kernel(n, std::vector<double>(n, 1.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double d;
            if (mode == DiversityDistance::CoreGraph) {
                d = graph.path_distance(items[i]->reference_core, items[j]->reference_core);
            } else {
                d = distance(items[i]->coords, items[j]->coords);
            }
            kernel[i][j] = kernel[j][i] = 1.0 / (1.0 + d);
        }
    }
    return det(std::move(kernel));
}

}  // namespace

double validity(const CounterfactualSet& set, const DbscanModel& model,
                std::optional<Label> target) {
    if (set.items.empty()) return 0.0;
    std::size_t ok = 0;
    for (const Counterfactual& cf : set.items) {
        const Label want = target ? *target : cf.target;
        if (assign(model, cf.coords) == want) ++ok;
    }
    return static_cast<double>(ok) / static_cast<double>(set.items.size());
}

double proximity(const CounterfactualSet& set, std::span<const double> origin, MetricSpace space) {
    const auto items = valid_items(set);
    if (items.empty()) throw NoValidCounterfactuals();
    double total = 0.0;
    for (const Counterfactual* cf : items) total += distance(origin, cf->coords, space);
    return total / static_cast<double>(items.size());
}

double diversity(const CounterfactualSet& set, const ClusterGraph& graph,
                 DiversityDistance mode) {
    const auto items = valid_items(set);
    if (items.empty()) throw NoValidCounterfactuals();
    for (const Counterfactual* cf : items) {
        if (cf->target != graph.cluster()) throw MixedClusters();
    }
    return kernel_determinant(items, graph, mode);
}

double diversity_product(const CounterfactualSet& set, const std::vector<ClusterGraph>& graphs,
                         DiversityDistance mode) {
    const auto items = valid_items(set);
    if (items.empty()) throw NoValidCounterfactuals();
    std::map<Label, std::vector<const Counterfactual*>> by_cluster;
    for (const Counterfactual* cf : items) by_cluster[cf->target].push_back(cf);
    double product = 1.0;
    for (const auto& [cluster, members] : by_cluster) {
        if (cluster < 0 || static_cast<std::size_t>(cluster) >= graphs.size()) {
            throw UnknownCluster(cluster);
        }
        product *= kernel_determinant(members, graphs[cluster], mode);
    }
    return product;
}

double sparsity(const CounterfactualSet& set, std::span<const double> origin) {
    const auto items = valid_items(set);
    if (items.empty()) throw NoValidCounterfactuals();
    double total = 0.0;
    for (const Counterfactual* cf : items) {
        if (cf->coords.size() != origin.size()) {
            throw DimensionMismatch(origin.size(), cf->coords.size());
        }
        std::size_t changed = 0;
        for (std::size_t c = 0; c < origin.size(); ++c) {
            const double tol = 1e-9 * std::max(1.0, std::abs(origin[c]));
            if (std::abs(cf->coords[c] - origin[c]) > tol) ++changed;
        }
        total += static_cast<double>(changed) / static_cast<double>(origin.size());
    }
    return total / static_cast<double>(items.size());
}

LofTable::LofTable(DatasetMatrix data, int k_neighbors, MetricSpace space)
    : data_(std::move(data)), space_(space) {
    if (k_neighbors < 1) throw InvalidParameter("k_neighbors must be >= 1");
    const std::size_t l = data_.rows;
    k_ = static_cast<std::size_t>(k_neighbors);
    if (l < k_ + 1) {
        throw InsufficientData("LOF needs at least k_neighbors + 1 rows, got " +
                               std::to_string(l));
    }

    std::vector<std::vector<double>> dist(l, std::vector<double>(l, 0.0));
    for (std::size_t i = 0; i < l; ++i) {
        for (std::size_t j = i + 1; j < l; ++j) {
            dist[i][j] = dist[j][i] = distance(data_.row(i), data_.row(j), space_);
        }
    }

    // k-distance and neighbourhood (ties included) for every dataset row
    k_dist_.resize(l);
    std::vector<std::vector<std::size_t>> neigh(l);
    for (std::size_t i = 0; i < l; ++i) {
        std::vector<double> others;
        others.reserve(l - 1);
        for (std::size_t j = 0; j < l; ++j) {
            if (j != i) others.push_back(dist[i][j]);
        }
        std::nth_element(others.begin(), others.begin() + (k_ - 1), others.end());
        k_dist_[i] = others[k_ - 1];
        for (std::size_t j = 0; j < l; ++j) {
            if (j != i && dist[i][j] <= k_dist_[i]) neigh[i].push_back(j);
        }
    }

    lrd_.resize(l);
    for (std::size_t i = 0; i < l; ++i) {
        double reach = 0.0;
        for (std::size_t j : neigh[i]) reach += std::max(k_dist_[j], dist[i][j]);
        reach /= static_cast<double>(neigh[i].size());
        lrd_[i] = 1.0 / std::max(reach, kLofFloor);
    }
}

double LofTable::score(std::span<const double> point) const {
    if (point.size() != data_.cols) throw DimensionMismatch(data_.cols, point.size());
    const std::size_t l = data_.rows;

    // the query point is external: every row is a potential neighbour
    std::vector<double> pd(l);
    for (std::size_t j = 0; j < l; ++j) pd[j] = distance(point, data_.row(j), space_);
    std::vector<double> sorted = pd;
    std::nth_element(sorted.begin(), sorted.begin() + (k_ - 1), sorted.end());
    const double point_k_dist = sorted[k_ - 1];

    double reach = 0.0;
    double neighbor_lrd = 0.0;
    double count = 0.0;
    for (std::size_t j = 0; j < l; ++j) {
        if (pd[j] > point_k_dist) continue;
        reach += std::max(k_dist_[j], pd[j]);
        neighbor_lrd += lrd_[j];
        count += 1.0;
    }
    const double point_lrd = 1.0 / std::max(reach / count, kLofFloor);
    return (neighbor_lrd / count) / point_lrd;
}

double lof_score(std::span<const double> point, const DatasetMatrix& data, int k_neighbors,
                 MetricSpace space) {
    return LofTable(data, k_neighbors, space).score(point);
}

PercentileCurve percentile_curve(std::vector<double> values, std::size_t total_queries,
                                 CurveOrder order) {
    if (values.size() > total_queries) {
        throw InvalidParameter("more metric values than queries");
    }
    if (order == CurveOrder::Ascending) {
        std::sort(values.begin(), values.end());
    } else {
        std::sort(values.begin(), values.end(), std::greater<>());
    }
    PercentileCurve curve;
    curve.points.reserve(values.size());
    for (std::size_t r = 1; r <= values.size(); ++r) {
        curve.points.push_back({100.0 * static_cast<double>(r) / static_cast<double>(total_queries),
                                values[r - 1]});
    }
    return curve;
}

QueryMetrics compute_query_metrics(const CounterfactualSet& set, const DbscanModel& model,
                                   const std::vector<ClusterGraph>& graphs,
                                   std::span<const double> origin, const LofTable& lof) {
    QueryMetrics m;
    m.validity = validity(set, model, set.target);
    if (m.validity == 0.0) return m;

    m.proximity = proximity(set, origin, model.space);
    m.diversity = diversity_product(set, graphs);
    m.sparsity = sparsity(set, origin);

    double lof_total = 0.0;
    std::size_t lof_count = 0;
    for (const Counterfactual& cf : set.items) {
        if (!cf.valid) continue;
        lof_total += lof.score(cf.coords);
        ++lof_count;
    }
    m.plausibility = lof_total / static_cast<double>(lof_count);
    return m;
}

QueryMetrics compute_query_metrics(const CounterfactualSet& set, const DbscanModel& model,
                                   const std::vector<ClusterGraph>& graphs,
                                   std::span<const double> origin, int lof_k) {
    const int k =
        static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(lof_k),
                                               model.data.rows - 1));
    return compute_query_metrics(set, model, graphs, origin,
                                 LofTable(model.data, k, model.space));
}

}  // namespace dbcf

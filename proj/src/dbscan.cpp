#include "dbcf/dbscan.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "dbcf/errors.hpp"

namespace dbcf {

DbscanModel fit(DatasetMatrix data, double epsilon, int min_pts, MetricSpace space) {
    if (epsilon <= 0.0) throw InvalidParameter("epsilon must be > 0");
    if (min_pts < 1) throw InvalidParameter("min_pts must be >= 1");
    if (data.rows == 0) throw EmptyDataset("cannot fit on an empty dataset");

    const std::size_t l = data.rows;
    DbscanModel model;
    model.epsilon = epsilon;
    model.min_pts = min_pts;
    model.space = space;

    // Core test: |N_eps(p)| >= minPts, neighbourhood includes p itself.
    std::vector<std::vector<std::size_t>> neighbors(l);
    std::vector<bool> core(l, false);
    for (std::size_t i = 0; i < l; ++i) {
        for (std::size_t j = 0; j < l; ++j) {
            if (distance(data.row(i), data.row(j), space) <= epsilon) {
                neighbors[i].push_back(j);
            }
        }
        core[i] = neighbors[i].size() >= static_cast<std::size_t>(min_pts);
    }

    // Clusters are the connected components of the core-core <=eps graph.
    std::vector<Label> labels(l, kNoiseLabel);
    Label next = 0;
    for (std::size_t seed = 0; seed < l; ++seed) {
        if (!core[seed] || labels[seed] != kNoiseLabel) continue;
        const Label cluster = next++;
        std::vector<std::size_t> stack{seed};
        labels[seed] = cluster;
        while (!stack.empty()) {
            const std::size_t u = stack.back();
            stack.pop_back();
            for (std::size_t v : neighbors[u]) {
                if (core[v] && labels[v] == kNoiseLabel) {
                    labels[v] = cluster;
                    stack.push_back(v);
                }
            }
        }
    }

    // Border points join their nearest core's cluster (ties by core row index,
    // which the ascending scan gives for free with a strict comparison).
    for (std::size_t i = 0; i < l; ++i) {
        if (core[i]) continue;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t q : neighbors[i]) {
            if (!core[q]) continue;
            const double d = distance(data.row(i), data.row(q), space);
            if (d < best) {
                best = d;
                labels[i] = labels[q];
            }
        }
    }

    // Renumber so cluster k has the k-th smallest minimum member row index.
    std::vector<std::size_t> min_member(next, l);
    for (std::size_t i = 0; i < l; ++i) {
        if (labels[i] != kNoiseLabel) {
            min_member[labels[i]] = std::min(min_member[labels[i]], i);
        }
    }
    std::vector<Label> order(next);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](Label a, Label b) { return min_member[a] < min_member[b]; });
    std::vector<Label> remap(next);
    for (Label k = 0; k < next; ++k) remap[order[k]] = k;
    for (Label& lab : labels) {
        if (lab != kNoiseLabel) lab = remap[lab];
    }

    model.labels = std::move(labels);
    model.is_core.assign(core.begin(), core.end());
    model.num_clusters = next;
    model.data = std::move(data);
    return model;
}

Label assign(const DbscanModel& model, std::span<const double> p) {
    if (p.size() != model.data.cols) throw DimensionMismatch(model.data.cols, p.size());
    double best = std::numeric_limits<double>::infinity();
    Label best_label = kNoiseLabel;
    for (std::size_t i = 0; i < model.data.rows; ++i) {
        if (!model.is_core[i]) continue;
        const double d = distance(p, model.data.row(i), model.space);
        if (d > model.epsilon) continue;
        if (d < best || (d == best && model.labels[i] < best_label)) {
            best = d;
            best_label = model.labels[i];
        }
    }
    return best_label;
}

std::vector<std::size_t> core_points_of(const DbscanModel& model, Label cluster) {
    if (cluster < 0 || cluster >= model.num_clusters) throw UnknownCluster(cluster);
    std::vector<std::size_t> cores;
    for (std::size_t i = 0; i < model.data.rows; ++i) {
        if (model.is_core[i] && model.labels[i] == cluster) cores.push_back(i);
    }
    if (cores.empty()) {
        throw InternalInconsistency("cluster " + std::to_string(cluster) + " has no core points");
    }
    return cores;
}

}  // namespace dbcf

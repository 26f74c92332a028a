#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dbcf/cluster_graph.hpp"

namespace dbcf {

enum class Strategy {
    Greedy,
    GreedyPlusLocalSearch,
    Exact,
    Nearest,
    Furthest,
    Random,
};

std::string strategy_name(Strategy s);
Strategy strategy_from_name(const std::string& name);

/// Everything a selection strategy needs: the explained point, its metric
/// distance to every admissible core, and the (scaled) pairwise graph
/// distances between admissible cores. An infinite pair distance means "no
/// repulsion" (used for cross-cluster pairs in the any-target variant).
struct EnergyContext {
    std::vector<double> origin;
    std::vector<std::size_t> vertices;        // admissible core rows, ascending
    std::vector<double> spring_distances;     // parallel to vertices; each > epsilon
    std::vector<std::vector<double>> pair_distance;  // scaled graph distances
    int k = 1;

    std::size_t size() const { return vertices.size(); }
    void validate() const;
};

/// Ordered selection plus its energy. candidate_evaluations counts marginal
/// energy evaluations, used to check the selection-cost bound.
struct SelectionResult {
    std::vector<std::size_t> chosen;  // dataset rows, in selection order
    double energy = 0.0;
    Strategy strategy = Strategy::Greedy;
    std::size_t candidate_evaluations = 0;
};

/// Builds the context for one target cluster: constraint admissibility,
/// exclusion of cores within epsilon of the origin (the placement formula
/// needs d > epsilon), collapse of coincident cores, and graph-distance
/// scaling by d_c / mean-edge-weight. Throws NoAdmissibleCore when nothing
/// survives the filters.
EnergyContext make_energy_context(const DbscanModel& model, const ClusterGraph& graph,
                                  std::span<const double> origin, const ConstraintSpec& spec,
                                  int k);

/// Pooled context across all clusters for target-unspecified queries. Cores
/// of the origin's own cluster (when it has one) are excluded; cross-cluster
/// pairs carry no repulsion. Each cluster's graph distances are scaled with
/// the pool-wide d_c over that cluster's mean edge weight.
EnergyContext make_any_cluster_context(const DbscanModel& model,
                                       const std::vector<ClusterGraph>& graphs,
                                       std::span<const double> origin, const ConstraintSpec& spec,
                                       int k);

/// Energy of a subset (dataset rows): sum of inverse pairwise graph distances
/// plus squared spring distances; empty subset has zero energy.
double energy_of(const EnergyContext& ctx, const std::vector<std::size_t>& subset);

SelectionResult select_greedy(const EnergyContext& ctx);
SelectionResult select_local_search(const EnergyContext& ctx);
SelectionResult select_exact(const EnergyContext& ctx);
SelectionResult select_nearest(const EnergyContext& ctx);
SelectionResult select_furthest(const EnergyContext& ctx);
SelectionResult select_random(const EnergyContext& ctx, std::uint64_t seed);

SelectionResult select(const EnergyContext& ctx, Strategy strategy, std::uint64_t seed = 0);

/// Target-unspecified selection over the pooled candidate set.
SelectionResult select_any_cluster(const DbscanModel& model,
                                   const std::vector<ClusterGraph>& graphs,
                                   std::span<const double> origin, int k, std::uint64_t seed,
                                   Strategy strategy, const ConstraintSpec& spec = {});

}  // namespace dbcf

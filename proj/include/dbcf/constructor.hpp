#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dbcf/selector.hpp"

namespace dbcf {

struct Counterfactual {
    std::vector<double> coords;
    std::size_t reference_core = 0;  // dataset row of the hosting core
    Label target = kNoiseLabel;      // cluster of the reference core
    double distance_to_origin = 0.0;
    double distance_to_core = 0.0;
    bool valid = false;              // post-hoc assign(coords) == target
};

struct CounterfactualSet {
    std::vector<Counterfactual> items;
    std::optional<Label> target;  // empty for target-unspecified queries
    Strategy strategy = Strategy::Greedy;
    double selection_energy = 0.0;
};

struct ExplanationQuery {
    std::vector<double> point;
    std::optional<Label> target;  // empty: any cluster
    int k = 1;
    Strategy strategy = Strategy::Greedy;
    ConstraintSpec constraints;
    std::uint64_t seed = 0;
};

/// Places the counterfactual on the segment from origin toward core, exactly
/// epsilon away from the core: p' = p + (d_pq - eps) (q - p) / d_pq.
/// Requires d_pq > epsilon.
Counterfactual place_unconstrained(std::span<const double> origin, std::span<const double> core,
                                   double epsilon, std::size_t core_row = 0);

/// Constrained placement: freezes non-actionable coordinates, moves in the
/// actionable subspace toward the core until the full-space distance equals
/// epsilon, then clamps monotonic coordinates, slides back inside the epsilon
/// ball, and zeroes minority-sign deltas of violated correlated groups.
/// Throws InfeasiblePlacement when no point satisfies both the epsilon ball
/// and the valid region.
Counterfactual place_constrained(std::span<const double> origin, std::span<const double> core,
                                 double epsilon, const ConstraintSpec& spec,
                                 std::size_t core_row = 0);

/// Full pipeline for one query: admissibility filtering, strategy selection,
/// placement, and validity verification. Cores whose placement fails (either
/// infeasible under the constraints, or landing nearer to a foreign cluster's
/// core) are dropped and the selection re-run without them.
CounterfactualSet explain(const DbscanModel& model, const std::vector<ClusterGraph>& graphs,
                          const ExplanationQuery& query);

}  // namespace dbcf

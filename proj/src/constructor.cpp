#include "dbcf/constructor.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "dbcf/errors.hpp"

namespace dbcf {

namespace {

double euclidean(std::span<const double> a, std::span<const double> b) {
    return distance(a, b, MetricSpace{});
}

/// Shrinks the actionable offset toward the core until the full-space
/// distance is <= epsilon bit-for-bit. The analytic constructions land on
/// epsilon up to rounding; this removes any last-ulp overshoot.
void pull_inside(std::vector<double>& point, std::span<const double> core,
                 const std::set<std::size_t>& frozen, double epsilon) {
    for (int iter = 0; iter < 64; ++iter) {
        const double d = euclidean(point, core);
        if (d <= epsilon) return;
        double delta_sq = 0.0;
        for (std::size_t col : frozen) {
            const double dd = point[col] - core[col];
            delta_sq += dd * dd;
        }
        double act_sq = 0.0;
        for (std::size_t c = 0; c < point.size(); ++c) {
            if (frozen.count(c)) continue;
            const double dd = point[c] - core[c];
            act_sq += dd * dd;
        }
        if (act_sq == 0.0) {
            throw InfeasiblePlacement("frozen-subspace distance exceeds epsilon");
        }
        const double target_sq = epsilon * epsilon - delta_sq;
        if (target_sq < 0.0) {
            throw InfeasiblePlacement("frozen-subspace distance exceeds epsilon");
        }
        // contract slightly past the analytic ratio so rounding cannot leave
        // the point outside the ball
        const double ratio =
            std::sqrt(target_sq / act_sq) * (1.0 - static_cast<double>(iter + 1) * 1e-15);
        for (std::size_t c = 0; c < point.size(); ++c) {
            if (frozen.count(c)) continue;
            point[c] = core[c] + (point[c] - core[c]) * ratio;
        }
    }
    if (euclidean(point, core) > epsilon) {
        throw InfeasiblePlacement("could not pull placement inside the epsilon ball");
    }
}

Counterfactual finish(std::vector<double> coords, std::span<const double> origin,
                      std::span<const double> core, std::size_t core_row) {
    Counterfactual cf;
    cf.distance_to_origin = euclidean(coords, origin);
    cf.distance_to_core = euclidean(coords, core);
    cf.coords = std::move(coords);
    cf.reference_core = core_row;
    return cf;
}

}  // namespace

Counterfactual place_unconstrained(std::span<const double> origin, std::span<const double> core,
                                   double epsilon, std::size_t core_row) {
    if (origin.size() != core.size()) throw DimensionMismatch(origin.size(), core.size());
    if (epsilon <= 0.0) throw InvalidParameter("epsilon must be > 0");
    const double d_pq = euclidean(origin, core);
    if (d_pq <= epsilon) {
        throw InfeasiblePlacement("origin is within epsilon of the reference core (d_pq=" +
                                  std::to_string(d_pq) + " <= eps)");
    }
    // p + (d_pq - eps)(q - p)/d_pq, computed anchored at the core (the
    // algebraically identical q + eps (p - q)/d_pq) so the distance-to-core
    // lands on eps to the last ulp
    std::vector<double> coords(origin.size());
    for (std::size_t c = 0; c < origin.size(); ++c) {
        coords[c] = core[c] + epsilon * (origin[c] - core[c]) / d_pq;
    }
    pull_inside(coords, core, {}, epsilon);
    return finish(std::move(coords), origin, core, core_row);
}

Counterfactual place_constrained(std::span<const double> origin, std::span<const double> core,
                                 double epsilon, const ConstraintSpec& spec,
                                 std::size_t core_row) {
    if (spec.empty()) return place_unconstrained(origin, core, epsilon, core_row);
    if (origin.size() != core.size()) throw DimensionMismatch(origin.size(), core.size());
    if (epsilon <= 0.0) throw InvalidParameter("epsilon must be > 0");
    spec.validate(origin.size());

    const std::size_t n = origin.size();
    const double d_pq = euclidean(origin, core);
    if (d_pq <= epsilon) {
        throw InfeasiblePlacement("origin is within epsilon of the reference core");
    }
    const double eps_sq = epsilon * epsilon;

    // Staged construction. "Pinned" coordinates are held at a fixed value:
    // non-actionable columns at the origin, monotonic columns clamped at
    // their halfspace boundary when the core lies outside it, and
    // minority-sign columns of violated correlated groups zeroed back to the
    // origin. Free coordinates move from the origin toward the core until
    // the full-space distance is epsilon. A column can tighten at most twice
    // (free -> boundary -> origin), so the loop settles within 2n rounds.
    std::map<std::size_t, double> pinned;
    for (std::size_t col : spec.non_actionable) pinned.emplace(col, origin[col]);

    std::vector<double> coords(origin.begin(), origin.end());
    for (std::size_t round = 0; round <= 2 * n + 1; ++round) {
        double fixed_sq = 0.0;
        for (const auto& [col, value] : pinned) {
            const double d = value - core[col];
            fixed_sq += d * d;
        }
        if (fixed_sq > eps_sq) {
            throw InfeasiblePlacement("epsilon ball unreachable under the pinned coordinates");
        }

        double free_sq = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
            if (pinned.count(c)) continue;
            const double d = origin[c] - core[c];
            free_sq += d * d;
        }
        const double free_dist = std::sqrt(free_sq);
        const double target = std::sqrt(eps_sq - fixed_sq);
        // stay on the segment: never move past the origin away from the core
        const double ratio = free_dist > 0.0 ? std::min(target / free_dist, 1.0) : 0.0;

        for (std::size_t c = 0; c < n; ++c) {
            auto it = pinned.find(c);
            coords[c] = it != pinned.end() ? it->second
                                           : core[c] + (origin[c] - core[c]) * ratio;
        }

        // monotonic clamps: a violated column is pinned at its boundary (the
        // placed coordinate lies between origin and core, so a violation
        // means the core itself is outside the halfspace)
        bool repinned = false;
        for (const auto& [col, bound] : spec.monotonic) {
            if (pinned.count(col)) continue;
            if (bound.direction == MonotonicDirection::IncreaseOnly) {
                if (coords[col] < origin[col] - bound.slack) {
                    pinned.emplace(col, origin[col] - bound.slack);
                    repinned = true;
                }
            } else {
                if (coords[col] > origin[col] + bound.slack) {
                    pinned.emplace(col, origin[col] + bound.slack);
                    repinned = true;
                }
            }
        }
        if (repinned) continue;

        // correlated groups: zero the minority-sign deltas of each violated
        // group (ties resolved by total displacement, then keep the
        // positive side)
        for (const auto& group : spec.correlated_groups) {
            std::vector<std::size_t> pos;
            std::vector<std::size_t> neg;
            double pos_mag = 0.0;
            double neg_mag = 0.0;
            for (std::size_t col : group.columns) {
                const double delta = coords[col] - origin[col];
                if (delta > 0.0) {
                    pos.push_back(col);
                    pos_mag += delta;
                } else if (delta < 0.0) {
                    neg.push_back(col);
                    neg_mag -= delta;
                }
            }
            std::vector<std::size_t> to_zero;
            if (group.sign == CorrelationSign::Positive) {
                if (!pos.empty() && !neg.empty()) {
                    // zero the minority-sign side; ties by displacement, then
                    // keep the positive side
                    if (pos.size() < neg.size()) {
                        to_zero = pos;
                    } else if (neg.size() < pos.size()) {
                        to_zero = neg;
                    } else if (pos_mag < neg_mag) {
                        to_zero = pos;
                    } else {
                        to_zero = neg;
                    }
                }
            } else {
                // at most one strict delta per sign: keep the largest-
                // magnitude member of each side, zero the rest
                auto keep_largest = [&](std::vector<std::size_t>& side) {
                    if (side.size() <= 1) return;
                    std::size_t best = side[0];
                    for (std::size_t col : side) {
                        if (std::abs(coords[col] - origin[col]) >
                            std::abs(coords[best] - origin[best])) {
                            best = col;
                        }
                    }
                    for (std::size_t col : side) {
                        if (col != best) to_zero.push_back(col);
                    }
                };
                keep_largest(pos);
                keep_largest(neg);
            }
            // insert_or_assign: a boundary-pinned monotonic column may move to
            // an origin pin (zero delta satisfies both constraint kinds)
            for (std::size_t col : to_zero) {
                if (auto it = pinned.find(col); it == pinned.end() || it->second != origin[col]) {
                    pinned.insert_or_assign(col, origin[col]);
                    repinned = true;
                }
            }
        }
        if (repinned) continue;

        std::set<std::size_t> immobile;
        for (const auto& [col, value] : pinned) immobile.insert(col);
        pull_inside(coords, core, immobile, epsilon);
        if (valid_region_contains(coords, origin, spec) && euclidean(coords, core) <= epsilon) {
            return finish(std::move(coords), origin, core, core_row);
        }
        break;
    }
    throw InfeasiblePlacement("no placement satisfies both the epsilon ball and the valid region");
}

CounterfactualSet explain(const DbscanModel& model, const std::vector<ClusterGraph>& graphs,
                          const ExplanationQuery& query) {
    if (query.k < 1) throw InvalidParameter("k must be >= 1");
    if (query.point.size() != model.data.cols) {
        throw DimensionMismatch(model.data.cols, query.point.size());
    }
    query.constraints.validate(model.data.cols);

    if (query.target) {
        if (*query.target < 0 || *query.target >= model.num_clusters) {
            throw UnknownCluster(*query.target);
        }
        if (assign(model, query.point) == *query.target) throw AlreadyInTarget(*query.target);
    } else if (graphs.empty()) {
        throw NoClusters();
    }

    EnergyContext ctx =
        query.target
            ? make_energy_context(model, graphs[*query.target], query.point, query.constraints,
                                  query.k)
            : make_any_cluster_context(model, graphs, query.point, query.constraints, query.k);

    CounterfactualSet set;
    set.target = query.target;
    set.strategy = query.strategy;

    // Rejected cores (infeasible placement or landing nearer a foreign core)
    // are removed from the context and the selection re-run, so the query
    // degrades through replacements instead of failing outright.
    const std::size_t initial = ctx.size();
    for (std::size_t attempt = 0; attempt <= initial; ++attempt) {
        if (ctx.size() < static_cast<std::size_t>(query.k)) {
            throw InsufficientCores(static_cast<std::size_t>(query.k), ctx.size());
        }
        SelectionResult selection = select(ctx, query.strategy, query.seed);

        std::vector<Counterfactual> placed;
        std::vector<std::size_t> rejected;
        for (std::size_t core_row : selection.chosen) {
            const Label core_cluster = model.labels[core_row];
            try {
                Counterfactual cf = place_constrained(query.point, model.data.row(core_row),
                                                      model.epsilon, query.constraints, core_row);
                cf.target = core_cluster;
                cf.valid = assign(model, cf.coords) == core_cluster;
                if (!cf.valid) {
                    rejected.push_back(core_row);  // a foreign core sits closer to p'
                } else {
                    placed.push_back(std::move(cf));
                }
            } catch (const InfeasiblePlacement&) {
                rejected.push_back(core_row);
            }
        }
        if (rejected.empty()) {
            set.items = std::move(placed);
            set.selection_energy = selection.energy;
            return set;
        }
        // drop the rejected vertices and retry
        EnergyContext next;
        next.origin = ctx.origin;
        next.k = ctx.k;
        std::vector<std::size_t> kept_locals;
        for (std::size_t i = 0; i < ctx.size(); ++i) {
            if (std::find(rejected.begin(), rejected.end(), ctx.vertices[i]) == rejected.end()) {
                kept_locals.push_back(i);
            }
        }
        for (std::size_t i : kept_locals) {
            next.vertices.push_back(ctx.vertices[i]);
            next.spring_distances.push_back(ctx.spring_distances[i]);
        }
        next.pair_distance.assign(kept_locals.size(),
                                  std::vector<double>(kept_locals.size(), 0.0));
        for (std::size_t a = 0; a < kept_locals.size(); ++a) {
            for (std::size_t b = 0; b < kept_locals.size(); ++b) {
                next.pair_distance[a][b] = ctx.pair_distance[kept_locals[a]][kept_locals[b]];
            }
        }
        ctx = std::move(next);
        if (ctx.size() == 0) break;
    }
    throw NoAdmissibleCore("every admissible core was rejected during placement");
}

}  // namespace dbcf

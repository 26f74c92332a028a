#include "dbcf/selector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dbcf/errors.hpp"
#include "dbcf/rng.hpp"

namespace dbcf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSwapTolerance = 1e-12;

double inverse_distance(double d, std::size_t row_u, std::size_t row_v) {
    if (d == 0.0) throw ZeroGraphDistance(row_u, row_v);
    return 1.0 / d;  // 1/inf == 0: cross-cluster pairs contribute no repulsion
}

/// Local-index subset energy, counting one evaluation per call.
double energy_local(const EnergyContext& ctx, std::span<const std::size_t> locals) {
    double e = 0.0;
    for (std::size_t a = 0; a < locals.size(); ++a) {
        const std::size_t i = locals[a];
        e += ctx.spring_distances[i] * ctx.spring_distances[i];
        for (std::size_t b = a + 1; b < locals.size(); ++b) {
            const std::size_t j = locals[b];
            e += inverse_distance(ctx.pair_distance[i][j], ctx.vertices[i], ctx.vertices[j]);
        }
    }
    return e;
}

std::vector<std::size_t> rows_of(const EnergyContext& ctx, std::span<const std::size_t> locals) {
    std::vector<std::size_t> rows;
    rows.reserve(locals.size());
    for (std::size_t i : locals) rows.push_back(ctx.vertices[i]);
    return rows;
}

void require_enough(const EnergyContext& ctx) {
    if (ctx.k < 1) throw InvalidParameter("k must be >= 1");
    if (static_cast<std::size_t>(ctx.k) > ctx.size()) {
        throw InsufficientCores(static_cast<std::size_t>(ctx.k), ctx.size());
    }
}

/// Greedy minimization with pluggable marginal cost. Ties go to the smaller
/// vertex row index via the ascending candidate scan.
SelectionResult greedy_by_marginal(const EnergyContext& ctx, bool with_spring,
                                   Strategy strategy) {
    require_enough(ctx);
    const std::size_t n = ctx.size();
    const std::size_t k = static_cast<std::size_t>(ctx.k);

    std::vector<double> marginal(n);
    for (std::size_t i = 0; i < n; ++i) {
        marginal[i] = with_spring ? ctx.spring_distances[i] * ctx.spring_distances[i] : 0.0;
    }

    SelectionResult result;
    result.strategy = strategy;
    std::vector<bool> taken(n, false);
    std::vector<std::size_t> chosen_locals;

    for (std::size_t step = 0; step < k; ++step) {
        std::size_t best = n;
        double best_marginal = kInf;
        for (std::size_t i = 0; i < n; ++i) {
            if (taken[i]) continue;
            ++result.candidate_evaluations;
            if (marginal[i] < best_marginal) {
                best_marginal = marginal[i];
                best = i;
            }
        }
        taken[best] = true;
        chosen_locals.push_back(best);
        for (std::size_t i = 0; i < n; ++i) {
            if (!taken[i]) {
                marginal[i] +=
                    inverse_distance(ctx.pair_distance[best][i], ctx.vertices[best], ctx.vertices[i]);
            }
        }
    }

    result.chosen = rows_of(ctx, chosen_locals);
    result.energy = energy_local(ctx, chosen_locals);  // full energy of the chosen set
    ++result.candidate_evaluations;
    return result;
}

std::vector<std::size_t> locals_of_rows(const EnergyContext& ctx,
                                        const std::vector<std::size_t>& rows) {
    std::vector<std::size_t> locals;
    locals.reserve(rows.size());
    for (std::size_t row : rows) {
        auto it = std::lower_bound(ctx.vertices.begin(), ctx.vertices.end(), row);
        if (it == ctx.vertices.end() || *it != row) throw UnknownVertex(row);
        locals.push_back(static_cast<std::size_t>(it - ctx.vertices.begin()));
    }
    return locals;
}

std::uint64_t binomial_capped(std::size_t n, std::size_t k, std::uint64_t cap) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t c = 1;
    for (std::size_t i = 1; i <= k; ++i) {
        if (c > cap) return cap + 1;
        c = c * (n - k + i) / i;
    }
    return c;
}

}  // namespace

std::string strategy_name(Strategy s) {
    switch (s) {
        case Strategy::Greedy: return "greedy";
        case Strategy::GreedyPlusLocalSearch: return "local_search";
        case Strategy::Exact: return "exact";
        case Strategy::Nearest: return "nearest";
        case Strategy::Furthest: return "furthest";
        case Strategy::Random: return "random";
    }
    throw InvalidParameter("unknown strategy");
}

Strategy strategy_from_name(const std::string& name) {
    if (name == "greedy") return Strategy::Greedy;
    if (name == "local_search") return Strategy::GreedyPlusLocalSearch;
    if (name == "exact") return Strategy::Exact;
    if (name == "nearest") return Strategy::Nearest;
    if (name == "furthest") return Strategy::Furthest;
    if (name == "random") return Strategy::Random;
    throw InvalidParameter("unknown strategy name: " + name);
}

void EnergyContext::validate() const {
    if (vertices.size() != spring_distances.size() || vertices.size() != pair_distance.size()) {
        throw InvalidParameter("energy context arrays have mismatched sizes");
    }
    if (!std::is_sorted(vertices.begin(), vertices.end())) {
        throw InvalidParameter("energy context vertices must be ascending");
    }
    for (const auto& row : pair_distance) {
        if (row.size() != vertices.size()) {
            throw InvalidParameter("pair distance matrix must be square");
        }
    }
}

EnergyContext make_energy_context(const DbscanModel& model, const ClusterGraph& graph,
                                  std::span<const double> origin, const ConstraintSpec& spec,
                                  int k) {
    std::vector<std::size_t> rows = admissible_vertices(graph, origin, spec, graph.epsilon());

    // Placement needs d(p, q) > epsilon; cores inside the origin's epsilon
    // ball cannot host a counterfactual for it.
    std::vector<std::size_t> filtered;
    std::vector<double> springs;
    for (std::size_t row : rows) {
        const double d = distance(origin, model.data.row(row), model.space);
        if (d > graph.epsilon()) {
            filtered.push_back(row);
            springs.push_back(d);
        }
    }

    // Collapse coincident cores (identical coordinates give zero graph
    // distance); the smallest row index represents the group.
    std::vector<std::size_t> keep;
    std::vector<double> keep_springs;
    for (std::size_t i = 0; i < filtered.size(); ++i) {
        bool duplicate = false;
        for (std::size_t j : keep) {
            if (std::equal(model.data.row(filtered[i]).begin(), model.data.row(filtered[i]).end(),
                           model.data.row(j).begin())) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) {
            keep.push_back(filtered[i]);
            keep_springs.push_back(springs[i]);
        }
    }
    if (keep.empty()) {
        throw NoAdmissibleCore("no admissible core for cluster " +
                               std::to_string(graph.cluster()));
    }

    EnergyContext ctx;
    ctx.origin.assign(origin.begin(), origin.end());
    ctx.vertices = std::move(keep);
    ctx.spring_distances = std::move(keep_springs);
    ctx.k = k;

    const double d_c = *std::min_element(ctx.spring_distances.begin(), ctx.spring_distances.end());
    const double scale = normalization_scale(graph, d_c);
    const std::size_t n = ctx.vertices.size();
    std::vector<std::size_t> locals(n);
    for (std::size_t i = 0; i < n; ++i) locals[i] = *graph.local_index(ctx.vertices[i]);
    ctx.pair_distance.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        const PathDistanceTable table = shortest_path_from(graph, ctx.vertices[i], scale);
        for (std::size_t j = i + 1; j < n; ++j) {
            ctx.pair_distance[i][j] = table.dist[locals[j]];
            ctx.pair_distance[j][i] = table.dist[locals[j]];
        }
    }
    return ctx;
}

EnergyContext make_any_cluster_context(const DbscanModel& model,
                                       const std::vector<ClusterGraph>& graphs,
                                       std::span<const double> origin, const ConstraintSpec& spec,
                                       int k) {
    if (graphs.empty()) throw NoClusters();
    const Label own = assign(model, origin);

    struct Candidate {
        std::size_t row;
        double spring;
        Label cluster;
    };
    std::vector<Candidate> pool;
    for (const ClusterGraph& graph : graphs) {
        if (graph.cluster() == own) continue;  // staying put is not a counterfactual
        for (std::size_t row : admissible_vertices(graph, origin, spec, graph.epsilon())) {
            const double d = distance(origin, model.data.row(row), model.space);
            if (d > graph.epsilon()) pool.push_back({row, d, graph.cluster()});
        }
    }
    std::sort(pool.begin(), pool.end(),
              [](const Candidate& a, const Candidate& b) { return a.row < b.row; });

    std::vector<Candidate> keep;
    for (const Candidate& c : pool) {
        bool duplicate = false;
        for (const Candidate& kc : keep) {
            if (std::equal(model.data.row(c.row).begin(), model.data.row(c.row).end(),
                           model.data.row(kc.row).begin())) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) keep.push_back(c);
    }
    if (keep.empty()) throw NoAdmissibleCore("no admissible core in any cluster");

    EnergyContext ctx;
    ctx.origin.assign(origin.begin(), origin.end());
    ctx.k = k;
    for (const Candidate& c : keep) {
        ctx.vertices.push_back(c.row);
        ctx.spring_distances.push_back(c.spring);
    }

    const double d_c = *std::min_element(ctx.spring_distances.begin(), ctx.spring_distances.end());
    std::vector<double> scale_by_cluster(graphs.size(), 1.0);
    for (const ClusterGraph& graph : graphs) {
        scale_by_cluster[graph.cluster()] = normalization_scale(graph, d_c);
    }

    const std::size_t n = keep.size();
    ctx.pair_distance.assign(n, std::vector<double>(n, kInf));
    for (std::size_t i = 0; i < n; ++i) ctx.pair_distance[i][i] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const ClusterGraph& graph = graphs[keep[i].cluster];
        const PathDistanceTable table =
            shortest_path_from(graph, keep[i].row, scale_by_cluster[keep[i].cluster]);
        for (std::size_t j = i + 1; j < n; ++j) {
            if (keep[j].cluster != keep[i].cluster) continue;  // already diverse
            const double d = table.dist[*graph.local_index(keep[j].row)];
            ctx.pair_distance[i][j] = d;
            ctx.pair_distance[j][i] = d;
        }
    }
    return ctx;
}

double energy_of(const EnergyContext& ctx, const std::vector<std::size_t>& subset) {
    std::vector<std::size_t> locals = locals_of_rows(ctx, subset);
    std::vector<std::size_t> sorted = locals;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i] == sorted[i - 1]) throw DuplicateVertex(ctx.vertices[sorted[i]]);
    }
    return energy_local(ctx, locals);
}

SelectionResult select_greedy(const EnergyContext& ctx) {
    return greedy_by_marginal(ctx, /*with_spring=*/true, Strategy::Greedy);
}

SelectionResult select_furthest(const EnergyContext& ctx) {
    // Repulsion-only energy; any singleton has energy zero, so the first pick
    // defaults to the smallest vertex index (the ascending scan's tie rule).
    return greedy_by_marginal(ctx, /*with_spring=*/false, Strategy::Furthest);
}

SelectionResult select_nearest(const EnergyContext& ctx) {
    require_enough(ctx);
    std::vector<std::size_t> order(ctx.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return ctx.spring_distances[a] < ctx.spring_distances[b];
    });
    std::vector<std::size_t> locals(order.begin(), order.begin() + ctx.k);
    SelectionResult result;
    result.strategy = Strategy::Nearest;
    result.chosen = rows_of(ctx, locals);
    result.energy = energy_local(ctx, locals);
    result.candidate_evaluations = 1;
    return result;
}

SelectionResult select_random(const EnergyContext& ctx, std::uint64_t seed) {
    require_enough(ctx);
    std::vector<std::size_t> all(ctx.size());
    std::iota(all.begin(), all.end(), 0);
    Rng rng(seed);
    std::vector<std::size_t> locals =
        rng.sample_without_replacement(std::move(all), static_cast<std::size_t>(ctx.k));
    SelectionResult result;
    result.strategy = Strategy::Random;
    result.chosen = rows_of(ctx, locals);
    result.energy = energy_local(ctx, locals);
    result.candidate_evaluations = 1;
    return result;
}

SelectionResult select_local_search(const EnergyContext& ctx) {
    SelectionResult result = select_greedy(ctx);
    result.strategy = Strategy::GreedyPlusLocalSearch;
    std::vector<std::size_t> locals = locals_of_rows(ctx, result.chosen);
    std::vector<bool> selected(ctx.size(), false);
    for (std::size_t i : locals) selected[i] = true;

    double energy = result.energy;
    const std::size_t max_iterations = 100 * static_cast<std::size_t>(ctx.k);
    for (std::size_t iter = 0; iter < max_iterations; ++iter) {
        double best_energy = energy;
        std::size_t best_pos = ctx.size();
        std::size_t best_in = ctx.size();
        for (std::size_t pos = 0; pos < locals.size(); ++pos) {
            for (std::size_t in = 0; in < ctx.size(); ++in) {
                if (selected[in]) continue;
                std::vector<std::size_t> trial = locals;
                trial[pos] = in;
                ++result.candidate_evaluations;
                const double e = energy_local(ctx, trial);
                if (e < best_energy - kSwapTolerance) {
                    best_energy = e;
                    best_pos = pos;
                    best_in = in;
                }
            }
        }
        if (best_pos == ctx.size()) break;  // no improving swap
        selected[locals[best_pos]] = false;
        selected[best_in] = true;
        locals[best_pos] = best_in;
        energy = best_energy;
    }

    result.chosen = rows_of(ctx, locals);
    result.energy = energy_local(ctx, locals);
    return result;
}

SelectionResult select_exact(const EnergyContext& ctx) {
    require_enough(ctx);
    const std::size_t n = ctx.size();
    const std::size_t k = static_cast<std::size_t>(ctx.k);
    constexpr std::uint64_t kGuard = 1'000'000;
    if (binomial_capped(n, k, kGuard) > kGuard) {
        throw SearchSpaceTooLarge("C(" + std::to_string(n) + "," + std::to_string(k) +
                                  ") exceeds the enumeration guard");
    }

    std::vector<std::size_t> combo(k);
    std::iota(combo.begin(), combo.end(), 0);
    std::vector<std::size_t> best = combo;
    double best_energy = kInf;
    SelectionResult result;
    result.strategy = Strategy::Exact;

    while (true) {
        ++result.candidate_evaluations;
        const double e = energy_local(ctx, combo);
        if (e < best_energy) {  // strict: ties keep the lexicographically first subset
            best_energy = e;
            best = combo;
        }
        // next combination in lexicographic order
        std::size_t i = k;
        while (i > 0 && combo[i - 1] == n - k + i - 1) --i;
        if (i == 0) break;
        ++combo[i - 1];
        for (std::size_t j = i; j < k; ++j) combo[j] = combo[j - 1] + 1;
    }

    result.chosen = rows_of(ctx, best);
    result.energy = best_energy;
    return result;
}

SelectionResult select(const EnergyContext& ctx, Strategy strategy, std::uint64_t seed) {
    switch (strategy) {
        case Strategy::Greedy: return select_greedy(ctx);
        case Strategy::GreedyPlusLocalSearch: return select_local_search(ctx);
        case Strategy::Exact: return select_exact(ctx);
        case Strategy::Nearest: return select_nearest(ctx);
        case Strategy::Furthest: return select_furthest(ctx);
        case Strategy::Random: return select_random(ctx, seed);
    }
    throw InvalidParameter("unknown strategy");
}

SelectionResult select_any_cluster(const DbscanModel& model,
                                   const std::vector<ClusterGraph>& graphs,
                                   std::span<const double> origin, int k, std::uint64_t seed,
                                   Strategy strategy, const ConstraintSpec& spec) {
    const EnergyContext ctx = make_any_cluster_context(model, graphs, origin, spec, k);
    return select(ctx, strategy, seed);
}

}  // namespace dbcf

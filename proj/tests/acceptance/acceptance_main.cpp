// Acceptance suite: runs every release criterion at its stated tolerance and
// prints one pass/fail line per criterion. Exit code is the number of
// failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dbcf/constructor.hpp"
#include "dbcf/errors.hpp"
#include "dbcf/experiment.hpp"
#include "dbcf/metrics.hpp"
#include "dbcf/rng.hpp"
#include "support/generators.hpp"
#include "support/reference.hpp"
#include "support/tmpdir.hpp"

using namespace dbcf;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;
};

double mean_nn_distance(const DatasetMatrix& data) {
    double total = 0.0;
    for (std::size_t i = 0; i < data.rows; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < data.rows; ++j) {
            if (i == j) continue;
            best = std::min(best, distance(data.row(i), data.row(j)));
        }
        total += best;
    }
    return total / static_cast<double>(data.rows);
}

struct SynthDataset {
    DatasetMatrix data;
    DbscanModel model;
    std::vector<ClusterGraph> graphs;
};

/// Builds a dataset of the given kind and accepts it only when DBSCAN finds
/// at least two clusters with a reasonable number of cores each.
std::optional<SynthDataset> try_make_dataset(int kind, std::uint64_t seed,
                                             std::size_t min_cores_per_cluster) {
    DatasetMatrix data;
    switch (kind % 3) {
        case 0: {
            Rng r(seed);
            const std::size_t dim = 2 + r.next_below(7);    // n <= 8
            const std::size_t blobs = 2 + r.next_below(2);  // 2..3 clusters
            const std::size_t per = 40 + r.next_below(40);
            data = gen::blobs(seed * 31 + 7, per, blobs, dim, 0.55, 6);
            break;
        }
        case 1:
            data = gen::half_moons(seed * 17 + 3, 90, 0.06);
            break;
        default:
            data = gen::rings(seed * 13 + 1, 100, 0.05);
            break;
    }
    if (data.rows > 500 || data.cols > 8) return std::nullopt;

    const double eps = 2.2 * mean_nn_distance(data);
    SynthDataset out;
    out.model = fit(data, eps, 4);
    if (out.model.num_clusters < 2 || out.model.num_clusters > 6) return std::nullopt;
    for (Label c = 0; c < out.model.num_clusters; ++c) {
        if (core_points_of(out.model, c).size() < min_cores_per_cluster) return std::nullopt;
    }
    out.data = std::move(data);
    out.graphs = build_all_graphs(out.model);
    return out;
}

/// Random constraint spec with up to n/2 frozen columns plus optional
/// monotonic and pairwise-correlation directives on the remaining ones.
ConstraintSpec random_spec(Rng& rng, std::size_t n) {
    ConstraintSpec spec;
    const std::size_t max_frozen = std::max<std::size_t>(1, n / 2);
    const std::size_t frozen = 1 + rng.next_below(max_frozen);
    while (spec.non_actionable.size() < frozen) {
        spec.non_actionable.insert(rng.next_below(n));
    }
    std::vector<std::size_t> free_cols;
    for (std::size_t c = 0; c < n; ++c) {
        if (!spec.non_actionable.count(c)) free_cols.push_back(c);
    }
    if (!free_cols.empty() && rng.next_below(2) == 0) {
        const std::size_t col = free_cols[rng.next_below(free_cols.size())];
        spec.monotonic[col] = {rng.next_below(2) ? MonotonicDirection::IncreaseOnly
                                                 : MonotonicDirection::DecreaseOnly,
                               0.5 * rng.next_double()};
    }
    if (free_cols.size() >= 2 && rng.next_below(2) == 0) {
        const std::size_t a = rng.next_below(free_cols.size());
        std::size_t b = rng.next_below(free_cols.size());
        while (b == a) b = rng.next_below(free_cols.size());
        spec.correlated_groups.push_back(
            {{free_cols[a], free_cols[b]},
             rng.next_below(2) ? CorrelationSign::Positive : CorrelationSign::Negative});
    }
    spec.validate(n);
    return spec;
}

std::string fmt(double v) { return format_double(v); }

// ---------------------------------------------------------------------------
// C1: validity guarantee across randomized datasets and strategies
// ---------------------------------------------------------------------------
Outcome criterion_1() {
    const std::vector<Strategy> strategies{Strategy::Greedy, Strategy::Nearest,
                                           Strategy::Furthest, Strategy::Random};
    std::map<Strategy, std::size_t> queries_per_strategy;
    std::size_t datasets = 0;
    std::size_t counterfactuals = 0;
    std::size_t violations = 0;
    Rng rng(0xC1);

    for (std::uint64_t seed = 1; datasets < 20 && seed < 200; ++seed) {
        const auto ds = try_make_dataset(static_cast<int>(seed), seed, 6);
        if (!ds) continue;
        ++datasets;

        std::size_t made = 0;
        for (std::size_t attempt = 0; attempt < 200 && made < 36; ++attempt) {
            const std::size_t row = rng.next_below(ds->data.rows);
            const Label target = static_cast<Label>(rng.next_below(ds->model.num_clusters));
            if (ds->model.labels[row] == target) continue;
            ++made;

            ExplanationQuery query;
            const auto src = ds->data.row(row);
            query.point.assign(src.begin(), src.end());
            query.target = target;
            query.k = 3;
            query.seed = rng.next_u64();
            const bool constrained = made % 2 == 0;
            if (constrained) query.constraints = random_spec(rng, ds->data.cols);

            for (Strategy strategy : strategies) {
                query.strategy = strategy;
                ++queries_per_strategy[strategy];
                try {
                    const CounterfactualSet set = explain(ds->model, ds->graphs, query);
                    for (const Counterfactual& cf : set.items) {
                        ++counterfactuals;
                        if (assign(ds->model, cf.coords) != target) ++violations;
                        if (constrained &&
                            !valid_region_contains(cf.coords, query.point, query.constraints)) {
                            ++violations;
                        }
                    }
                } catch (const NoAdmissibleCore&) {
                } catch (const InsufficientCores&) {
                }
            }
        }
    }

    std::size_t min_queries = std::numeric_limits<std::size_t>::max();
    for (Strategy s : strategies) min_queries = std::min(min_queries, queries_per_strategy[s]);

    Outcome out;
    out.ok = violations == 0 && datasets >= 20 && min_queries >= 500 && counterfactuals > 2000;
    out.detail = std::to_string(datasets) + " datasets, " + std::to_string(min_queries) +
                 " queries/strategy, " + std::to_string(counterfactuals) +
                 " counterfactuals, " + std::to_string(violations) + " violations";
    return out;
}

// ---------------------------------------------------------------------------
// C2: placement geometry for 1e4 random triples
// ---------------------------------------------------------------------------
Outcome criterion_2() {
    Rng rng(0xC2);
    std::size_t done = 0;
    std::size_t failures = 0;
    double worst = 0.0;
    while (done < 10000) {
        const std::size_t dim = 1 + rng.next_below(8);
        std::vector<double> p(dim), q(dim);
        for (std::size_t c = 0; c < dim; ++c) {
            p[c] = 20.0 * rng.next_gaussian();
            q[c] = 20.0 * rng.next_gaussian();
        }
        const double eps = 0.05 + 3.0 * rng.next_double();
        const double d_pq = distance(p, q);
        if (d_pq <= eps) continue;
        ++done;
        const Counterfactual cf = place_unconstrained(p, q, eps);
        const double err_core = std::abs(cf.distance_to_core - eps) / eps;
        const double err_origin =
            std::abs(cf.distance_to_origin - (d_pq - eps)) / std::max(1e-30, d_pq - eps);
        worst = std::max({worst, err_core, err_origin});
        if (err_core > 1e-9 || err_origin > 1e-9) ++failures;
    }
    Outcome out;
    out.ok = failures == 0;
    out.detail = "10000 triples, worst relative error " + fmt(worst);
    return out;
}

// ---------------------------------------------------------------------------
// C3: attraction-only selection equals k nearest neighbours
// ---------------------------------------------------------------------------
Outcome criterion_3() {
    Rng rng(0xC3);
    std::size_t mismatches = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 4 + rng.next_below(14);
        const int k = 1 + static_cast<int>(rng.next_below(std::min<std::size_t>(n, 8)));
        EnergyContext ctx;
        ctx.k = k;
        for (std::size_t i = 0; i < n; ++i) {
            ctx.vertices.push_back(i);
            ctx.spring_distances.push_back(1.0 + 9.0 * rng.next_double());
        }
        ctx.pair_distance.assign(
            n, std::vector<double>(n, std::numeric_limits<double>::infinity()));
        for (std::size_t i = 0; i < n; ++i) ctx.pair_distance[i][i] = 0.0;

        const auto greedy = select_greedy(ctx).chosen;
        const auto nearest = select_nearest(ctx).chosen;
        if (std::set<std::size_t>(greedy.begin(), greedy.end()) !=
            std::set<std::size_t>(nearest.begin(), nearest.end())) {
            ++mismatches;
        }
    }
    Outcome out;
    out.ok = mismatches == 0;
    out.detail = "100 instances, " + std::to_string(mismatches) + " set mismatches";
    return out;
}

// ---------------------------------------------------------------------------
// C4 + C5: greedy approximation quality against brute-force enumeration
// ---------------------------------------------------------------------------
struct ApproxStats {
    std::size_t instances = 0;
    double worst_ratio = 1.0;
    double ratio_sum = 0.0;
    std::size_t greedy_exact_sets = 0;
    std::size_t local_reaches_exact = 0;
    double jaccard_sum = 0.0;
    std::size_t k1_mismatches = 0;
};

ApproxStats run_approximation_study() {
    ApproxStats stats;
    Rng rng(0xC4);
    for (std::uint64_t seed = 1; stats.instances < 200 && seed < 8000; ++seed) {
        // alternate compact blobs and thin arcs; arcs make graph distances
        // diverge from chords, which is where the repulsion term bites
        DatasetMatrix data;
        if (seed % 2 == 0) {
            data = gen::blobs(seed * 101 + 5, 16 + seed % 10, 1, 2, 0.6, 0);
        } else {
            Rng arc(seed * 59 + 11);
            std::vector<double> values;
            const std::size_t points = 14 + arc.next_below(8);
            for (std::size_t i = 0; i < points; ++i) {
                const double t = kPi * arc.next_double();
                values.push_back(2.0 * std::cos(t) + 0.05 * arc.next_gaussian());
                values.push_back(2.0 * std::sin(t) + 0.05 * arc.next_gaussian());
            }
            data = make_dataset(points, 2, std::move(values));
        }
        const double eps = 2.0 * mean_nn_distance(data);
        DbscanModel model;
        try {
            model = fit(data, eps, 3);
        } catch (const Error&) {
            continue;
        }
        if (model.num_clusters != 1) continue;
        const auto cores = core_points_of(model, 0);
        if (cores.size() < 8 || cores.size() > 15) continue;

        // explained point just outside the cluster so attraction and
        // repulsion are on comparable scales
        std::vector<double> centroid(2, 0.0);
        for (std::size_t row : cores) {
            centroid[0] += model.data.at(row, 0);
            centroid[1] += model.data.at(row, 1);
        }
        centroid[0] /= static_cast<double>(cores.size());
        centroid[1] /= static_cast<double>(cores.size());
        const double angle = 2.0 * kPi * rng.next_double();
        const double radius = 2.0 + 4.0 * rng.next_double();
        const std::vector<double> p{centroid[0] + radius * std::cos(angle),
                                    centroid[1] + radius * std::sin(angle)};
        if (assign(model, p) == 0) continue;

        const ClusterGraph graph = build_graph(model, 0);
        EnergyContext ctx;
        try {
            ctx = make_energy_context(model, graph, p, ConstraintSpec{}, 4);
        } catch (const NoAdmissibleCore&) {
            continue;
        }
        if (ctx.size() < 5) continue;

        ++stats.instances;
        const SelectionResult greedy = select_greedy(ctx);
        const SelectionResult local = select_local_search(ctx);
        const SelectionResult exact = select_exact(ctx);

        const double ratio = greedy.energy / exact.energy;
        stats.worst_ratio = std::max(stats.worst_ratio, ratio);
        stats.ratio_sum += ratio;

        const std::set<std::size_t> gs(greedy.chosen.begin(), greedy.chosen.end());
        const std::set<std::size_t> es(exact.chosen.begin(), exact.chosen.end());
        if (gs == es) ++stats.greedy_exact_sets;
        if (local.energy <= exact.energy * (1.0 + 1e-9)) ++stats.local_reaches_exact;

        std::vector<std::size_t> inter;
        std::set_intersection(gs.begin(), gs.end(), es.begin(), es.end(),
                              std::back_inserter(inter));
        stats.jaccard_sum += static_cast<double>(inter.size()) /
                             static_cast<double>(gs.size() + es.size() - inter.size());

        EnergyContext ctx1 = ctx;
        ctx1.k = 1;
        if (select_greedy(ctx1).chosen != select_exact(ctx1).chosen) ++stats.k1_mismatches;
    }
    return stats;
}

Outcome criterion_4(const ApproxStats& stats) {
    const double n = static_cast<double>(stats.instances);
    const double mean_ratio = stats.ratio_sum / n;
    const double exact_share = static_cast<double>(stats.greedy_exact_sets) / n;
    const double local_share = static_cast<double>(stats.local_reaches_exact) / n;
    const double jaccard = stats.jaccard_sum / n;

    Outcome out;
    out.ok = stats.instances >= 200 && stats.worst_ratio <= 1.05 && mean_ratio <= 1.01 &&
             exact_share >= 0.80 && local_share >= 0.95 && jaccard >= 0.90;
    out.detail = std::to_string(stats.instances) + " instances, worst ratio " +
                 fmt(stats.worst_ratio) + ", mean ratio " + fmt(mean_ratio) +
                 ", greedy=exact " + fmt(100.0 * exact_share) + "%, local=exact " +
                 fmt(100.0 * local_share) + "%, mean Jaccard " + fmt(jaccard);
    return out;
}

Outcome criterion_5(const ApproxStats& stats) {
    Outcome out;
    out.ok = stats.instances >= 200 && stats.k1_mismatches == 0;
    out.detail = std::to_string(stats.instances) + " instances, " +
                 std::to_string(stats.k1_mismatches) + " k=1 mismatches";
    return out;
}

// ---------------------------------------------------------------------------
// C6: DBSCAN equivalence with the independent reference
// ---------------------------------------------------------------------------
Outcome criterion_6() {
    Rng rng(0xC6);
    std::size_t mismatched_datasets = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t rows = 5 + rng.next_below(46);
        const std::size_t dim = 1 + rng.next_below(4);
        std::vector<double> values(rows * dim);
        for (double& v : values) v = 4.0 * rng.next_gaussian();
        const DatasetMatrix data = make_dataset(rows, dim, values);
        const double eps = 0.4 + 1.8 * rng.next_double();
        const int min_pts = 2 + static_cast<int>(rng.next_below(4));

        const DbscanModel model = fit(data, eps, min_pts);
        const auto ref = refimpl::reference_dbscan(data, eps, min_pts);
        bool same = model.num_clusters == ref.num_clusters;
        for (std::size_t r = 0; same && r < rows; ++r) {
            same = model.labels[r] == ref.labels[r] && model.is_core[r] == ref.is_core[r];
        }
        if (!same) ++mismatched_datasets;
    }
    Outcome out;
    out.ok = mismatched_datasets == 0;
    out.detail = "100 datasets, " + std::to_string(mismatched_datasets) + " mismatches";
    return out;
}

// ---------------------------------------------------------------------------
// C7: half-circle arc, graph distance vs chord
// ---------------------------------------------------------------------------
Outcome criterion_7() {
    std::vector<double> values;
    for (int i = 0; i < 20; ++i) {
        const double t = kPi * i / 19.0;
        values.push_back(std::cos(t));
        values.push_back(std::sin(t));
    }
    const DbscanModel model = fit(make_dataset(20, 2, values), 0.2, 2);
    Outcome out;
    if (model.num_clusters != 1) {
        out.ok = false;
        out.detail = "arc did not form a single cluster";
        return out;
    }
    const ClusterGraph graph = build_graph(model, 0);
    const double path = graph.path_distance(0, 19);
    const double chord = distance(model.data.row(0), model.data.row(19));
    const double ratio = path / chord;
    out.ok = ratio >= 1.5;
    out.detail = "path " + fmt(path) + " vs chord " + fmt(chord) + ", ratio " + fmt(ratio) +
                 " (analytic pi/2 = " + fmt(kPi / 2.0) + ")";
    return out;
}

// ---------------------------------------------------------------------------
// C8: constraint soundness for 1e3 random constrained queries
// ---------------------------------------------------------------------------
Outcome criterion_8() {
    std::vector<SynthDataset> pool;
    for (std::uint64_t seed = 300; pool.size() < 8 && seed < 400; ++seed) {
        auto ds = try_make_dataset(0, seed, 6);  // blobs: mixed dimensionality
        if (ds && ds->data.cols >= 2) pool.push_back(std::move(*ds));
    }
    if (pool.empty()) return {false, "no datasets accepted"};

    Rng rng(0xC8);
    std::size_t queries = 0;
    std::size_t returned = 0;
    std::size_t violations = 0;
    const std::vector<Strategy> strategies{Strategy::Greedy, Strategy::Random};
    std::size_t attempts = 0;
    while (queries < 1000 && ++attempts < 100000) {
        const SynthDataset& ds = pool[queries % pool.size()];
        const std::size_t row = rng.next_below(ds.data.rows);
        const Label target = static_cast<Label>(rng.next_below(ds.model.num_clusters));
        if (ds.model.labels[row] == target) continue;

        ExplanationQuery query;
        const auto src = ds.data.row(row);
        query.point.assign(src.begin(), src.end());
        query.target = target;
        query.k = 1 + static_cast<int>(rng.next_below(3));
        query.strategy = strategies[queries % strategies.size()];
        query.seed = rng.next_u64();
        query.constraints = random_spec(rng, ds.data.cols);
        ++queries;

        try {
            const CounterfactualSet set = explain(ds.model, ds.graphs, query);
            for (const Counterfactual& cf : set.items) {
                ++returned;
                if (!valid_region_contains(cf.coords, query.point, query.constraints)) {
                    ++violations;
                }
                if (cf.distance_to_core > ds.model.epsilon) ++violations;
                if (distance(cf.coords, ds.model.data.row(cf.reference_core)) >
                    ds.model.epsilon) {
                    ++violations;
                }
                if (assign(ds.model, cf.coords) != target) ++violations;
                for (std::size_t col : query.constraints.non_actionable) {
                    if (cf.coords[col] != query.point[col]) ++violations;  // bit-equality
                }
            }
        } catch (const NoAdmissibleCore&) {
        } catch (const InsufficientCores&) {
        }
    }
    Outcome out;
    // the 300 floor guards against the check passing vacuously when harsh
    // constraint draws leave too few servable queries
    out.ok = queries >= 1000 && violations == 0 && returned >= 300;
    out.detail = std::to_string(queries) + " queries, " + std::to_string(returned) +
                 " counterfactuals, " + std::to_string(violations) + " violations";
    return out;
}

// ---------------------------------------------------------------------------
// C9: the 1-D fixture end-to-end plus the percentile-curve example
// ---------------------------------------------------------------------------
Outcome criterion_9() {
    testutil::TmpDir tmp("acc_fixture");
    const auto dataset = tmp.write_file("fixture.csv", "x\n0.0\n0.5\n1.0\n5.0\n");

    ExperimentConfig config;
    config.dataset_path = dataset.string();
    config.epsilon = 0.6;
    config.min_pts = 2;
    config.k = 2;
    config.standardize = false;
    config.strategies = {Strategy::Greedy};
    config.output_dir = (tmp.path() / "out").string();
    run_experiment(config);

    const std::string metrics = testutil::read_file(tmp.path() / "out" / "metrics.csv");
    std::istringstream in(metrics);
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    std::vector<std::string> cells;
    {
        std::istringstream rs(row);
        std::string cell;
        while (std::getline(rs, cell, ',')) cells.push_back(cell);
    }

    Outcome out;
    bool ok = cells.size() >= 10;
    ok = ok && std::stod(cells.at(5)) == 1.0;                          // validity
    ok = ok && std::abs(std::stod(cells.at(6)) - 3.65) <= 1e-9;        // proximity
    ok = ok && std::abs(std::stod(cells.at(7)) - 5.0 / 9.0) <= 1e-9;   // diversity
    ok = ok && std::stod(cells.at(8)) == 1.0;                          // sparsity

    const PercentileCurve curve = percentile_curve({3.0, 1.0, 2.0}, 4);
    ok = ok && curve.points.size() == 3;
    ok = ok && curve.points[0].percent == 25.0 && curve.points[0].value == 1.0;
    ok = ok && curve.points[1].percent == 50.0 && curve.points[1].value == 2.0;
    ok = ok && curve.points[2].percent == 75.0 && curve.points[2].value == 3.0;

    out.ok = ok;
    out.detail = "validity " + cells.at(5) + ", proximity " + cells.at(6) + ", diversity " +
                 cells.at(7) + ", sparsity " + cells.at(8) + ", curve points " +
                 std::to_string(curve.points.size());
    return out;
}

// ---------------------------------------------------------------------------
// C10: qualitative orderings with one-standard-error margins
// ---------------------------------------------------------------------------
Outcome criterion_10() {
    std::vector<SynthDataset> pool;
    for (std::uint64_t seed = 600; pool.size() < 6 && seed < 700; ++seed) {
        auto ds = try_make_dataset(0, seed, 12);
        if (ds) pool.push_back(std::move(*ds));
    }
    if (pool.empty()) return {false, "no datasets accepted"};

    Rng rng(0xCA);
    std::vector<double> prox_greedy, prox_random;
    std::vector<double> div_greedy, div_nearest, div_furthest;
    std::size_t paired = 0;

    for (std::size_t i = 0; paired < 300 && i < 5000; ++i) {
        const SynthDataset& ds = pool[i % pool.size()];
        const std::size_t row = rng.next_below(ds.data.rows);
        const Label target = static_cast<Label>(rng.next_below(ds.model.num_clusters));
        if (ds.model.labels[row] == target) continue;

        ExplanationQuery query;
        const auto src = ds.data.row(row);
        query.point.assign(src.begin(), src.end());
        query.target = target;
        query.k = 4;
        query.seed = rng.next_u64();

        std::map<Strategy, CounterfactualSet> sets;
        bool all_ok = true;
        for (Strategy s :
             {Strategy::Greedy, Strategy::Random, Strategy::Nearest, Strategy::Furthest}) {
            query.strategy = s;
            try {
                sets[s] = explain(ds.model, ds.graphs, query);
            } catch (const Error&) {
                all_ok = false;
                break;
            }
        }
        if (!all_ok) continue;
        ++paired;
        prox_greedy.push_back(proximity(sets[Strategy::Greedy], query.point));
        prox_random.push_back(proximity(sets[Strategy::Random], query.point));
        div_greedy.push_back(diversity(sets[Strategy::Greedy], ds.graphs[target]));
        div_nearest.push_back(diversity(sets[Strategy::Nearest], ds.graphs[target]));
        div_furthest.push_back(diversity(sets[Strategy::Furthest], ds.graphs[target]));
    }

    auto paired_margin = [](const std::vector<double>& hi, const std::vector<double>& lo) {
        // mean difference and its standard error over paired samples
        const std::size_t n = hi.size();
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += hi[i] - lo[i];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = hi[i] - lo[i] - mean;
            var += d * d;
        }
        var /= static_cast<double>(n - 1);
        const double se = std::sqrt(var / static_cast<double>(n));
        return std::make_pair(mean, se);
    };

    const auto [prox_margin, prox_se] = paired_margin(prox_random, prox_greedy);
    const auto [div_gn_margin, div_gn_se] = paired_margin(div_greedy, div_nearest);
    const auto [div_fn_margin, div_fn_se] = paired_margin(div_furthest, div_nearest);

    Outcome out;
    out.ok = paired >= 300 && prox_margin > prox_se && div_gn_margin > div_gn_se &&
             div_fn_margin > div_fn_se;
    out.detail = std::to_string(paired) + " paired queries; prox(random-greedy) " +
                 fmt(prox_margin) + " (se " + fmt(prox_se) + "); div(greedy-nearest) " +
                 fmt(div_gn_margin) + " (se " + fmt(div_gn_se) + "); div(furthest-nearest) " +
                 fmt(div_fn_margin) + " (se " + fmt(div_fn_se) + ")";
    return out;
}

// ---------------------------------------------------------------------------
// C11: byte-identical experiment outputs across parallelism degrees
// ---------------------------------------------------------------------------
Outcome criterion_11() {
    testutil::TmpDir tmp("acc_determinism");
    const DatasetMatrix data = gen::blobs(7777, 30, 3, 3, 0.55, 8);
    std::ostringstream csv;
    csv << "a,b,c\n";
    for (std::size_t r = 0; r < data.rows; ++r) {
        csv << format_double(data.at(r, 0)) << ',' << format_double(data.at(r, 1)) << ','
            << format_double(data.at(r, 2)) << '\n';
    }
    const auto dataset = tmp.write_file("blobs.csv", csv.str());

    ExperimentConfig config;
    config.dataset_path = dataset.string();
    config.standardize = true;
    config.epsilon = 0.35;
    config.min_pts = 4;
    config.k = 4;
    config.samples_per_partition = 5;
    config.strategies = {Strategy::Greedy, Strategy::Nearest, Strategy::Furthest,
                         Strategy::Random};
    config.seed = 4242;

    config.output_dir = (tmp.path() / "serial").string();
    config.threads = 1;
    run_experiment(config);
    config.output_dir = (tmp.path() / "parallel").string();
    config.threads = 4;
    run_experiment(config);
    config.output_dir = (tmp.path() / "serial2").string();
    config.threads = 1;
    run_experiment(config);

    std::size_t files = 0;
    bool identical = true;
    for (const auto& entry : std::filesystem::directory_iterator(tmp.path() / "serial")) {
        ++files;
        const auto name = entry.path().filename();
        const std::string a = testutil::read_file(entry.path());
        const std::string b = testutil::read_file(tmp.path() / "parallel" / name);
        const std::string c = testutil::read_file(tmp.path() / "serial2" / name);
        if (a != b || a != c || a.empty()) identical = false;
    }
    Outcome out;
    out.ok = identical && files >= 6;
    out.detail = std::to_string(files) + " files compared across threads 1/4/1-rerun";
    return out;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double budget_seconds;
        std::function<Outcome()> run;
    };

    // C4 and C5 share one enumeration study
    ApproxStats approx;
    bool approx_ran = false;
    auto ensure_approx = [&]() {
        if (!approx_ran) {
            approx = run_approximation_study();
            approx_ran = true;
        }
    };

    const std::vector<Criterion> criteria{
        {1, "validity guarantee across strategies and constraints", 60.0, criterion_1},
        {2, "placement geometry (eps to core, d-eps to origin)", 5.0, criterion_2},
        {3, "attraction-only selection equals k nearest neighbours", 10.0, criterion_3},
        {4, "greedy vs exact approximation quality", 120.0,
         [&]() {
             ensure_approx();
             return criterion_4(approx);
         }},
        {5, "greedy is exact for k=1", 120.0,
         [&]() {
             ensure_approx();
             return criterion_5(approx);
         }},
        {6, "dbscan equivalence with the O(l^2) reference", 30.0, criterion_6},
        {7, "half-circle: graph distance vs chord >= 1.5", 10.0, criterion_7},
        {8, "constraint soundness on random constrained queries", 60.0, criterion_8},
        {9, "1-D fixture metrics and percentile curve", 10.0, criterion_9},
        {10, "qualitative orderings with standard-error margins", 120.0, criterion_10},
        {11, "byte-identical outputs across parallelism", 60.0, criterion_11},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = c.run();
        } catch (const std::exception& e) {
            outcome.ok = false;
            outcome.detail = std::string("exception: ") + e.what();
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool within_budget = seconds < c.budget_seconds;
        const bool pass = outcome.ok && within_budget;
        if (!pass) ++failures;
        std::printf("[%s] C%-2d %s: %s (%.1fs%s)\n", pass ? "PASS" : "FAIL", c.id, c.name,
                    outcome.detail.c_str(), seconds, within_budget ? "" : " OVER BUDGET");
        std::fflush(stdout);
    }
    return failures;
}

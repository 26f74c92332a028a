#include "dbcf/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <thread>

#include "dbcf/errors.hpp"
#include "dbcf/rng.hpp"

namespace dbcf {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string part;
    std::istringstream in(s);
    while (std::getline(in, part, sep)) parts.push_back(trim(part));
    return parts;
}

double parse_double(const std::string& s, const std::string& key) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
        throw ParseError("cannot parse number for '" + key + "': " + s);
    }
    return v;
}

long parse_long(const std::string& s, const std::string& key) {
    long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
        throw ParseError("cannot parse integer for '" + key + "': " + s);
    }
    return v;
}

bool parse_bool(const std::string& s, const std::string& key) {
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ParseError("cannot parse boolean for '" + key + "': " + s);
}

std::size_t parse_col(const std::string& s, const std::string& key) {
    const long v = parse_long(s, key);
    if (v < 0) throw ParseError("column index must be >= 0 in '" + key + "'");
    return static_cast<std::size_t>(v);
}

// stream namespaces for the splitmix seed expansion
constexpr std::uint64_t kPartitionStream = 0x10000;
constexpr std::uint64_t kQueryStream = 0x20000;

}  // namespace

std::string format_double(double value) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, p);
}

void ExperimentConfig::validate() const {
    if (dataset_path.empty()) throw InvalidParameter("dataset path is required");
    if (epsilon <= 0.0) throw InvalidParameter("epsilon must be > 0");
    if (min_pts < 1) throw InvalidParameter("min_pts must be >= 1");
    if (k < 1) throw InvalidParameter("k must be >= 1");
    if (samples_per_partition < 1) throw InvalidParameter("samples_per_partition must be >= 1");
    if (strategies.empty()) throw InvalidParameter("at least one strategy is required");
    if (lof_k < 1) throw InvalidParameter("lof_k must be >= 1");
    if (threads < 1) throw InvalidParameter("threads must be >= 1");
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) try {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path.string());

    ExperimentConfig config;
    if (const char* env = std::getenv("DBSCAN_CF_OUTPUT_DIR")) config.output_dir = env;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "dataset") {
            config.dataset_path = value;
        } else if (key == "epsilon") {
            config.epsilon = parse_double(value, key);
        } else if (key == "min_pts") {
            config.min_pts = static_cast<int>(parse_long(value, key));
        } else if (key == "k") {
            config.k = static_cast<int>(parse_long(value, key));
        } else if (key == "samples_per_partition") {
            config.samples_per_partition = static_cast<int>(parse_long(value, key));
        } else if (key == "strategies") {
            config.strategies.clear();
            for (const std::string& name : split(value, ',')) {
                config.strategies.push_back(strategy_from_name(name));
            }
        } else if (key == "seed") {
            config.seed = static_cast<std::uint64_t>(parse_long(value, key));
        } else if (key == "standardize") {
            config.standardize = parse_bool(value, key);
        } else if (key == "constraints") {
            config.constraints_path = value;
        } else if (key == "lof_k") {
            config.lof_k = static_cast<int>(parse_long(value, key));
        } else if (key == "output_dir") {
            config.output_dir = value;
        } else if (key == "threads") {
            config.threads = static_cast<int>(parse_long(value, key));
        } else if (key == "with_timings") {
            config.with_timings = parse_bool(value, key);
        } else {
            throw ConfigError("unknown config key: " + key);
        }
    }
    config.validate();
    return config;
} catch (const ParseError& e) {
    throw ConfigError(e.what());
}

ConstraintSpec parse_constraints_file(const std::filesystem::path& path) try {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open constraints file: " + path.string());

    ConstraintSpec spec;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("constraints line " + std::to_string(line_no) +
                             ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "non_actionable") {
            for (const std::string& c : split(value, ',')) {
                spec.non_actionable.insert(parse_col(c, key));
            }
        } else if (key == "increase_only" || key == "decrease_only") {
            const std::vector<std::string> parts = split(value, ':');
            if (parts.empty() || parts.size() > 2) {
                throw ConfigError("constraints line " + std::to_string(line_no) +
                                 ": expected <col> [: <slack>]");
            }
            MonotonicBound bound;
            bound.direction = key == "increase_only" ? MonotonicDirection::IncreaseOnly
                                                     : MonotonicDirection::DecreaseOnly;
            bound.slack = parts.size() == 2 ? parse_double(parts[1], key) : 0.0;
            const std::size_t col = parse_col(parts[0], key);
            if (!spec.monotonic.emplace(col, bound).second) {
                throw ConfigError("column " + parts[0] + " has two monotonic directives");
            }
        } else if (key == "positive_group" || key == "negative_group") {
            CorrelatedGroup group;
            group.sign =
                key == "positive_group" ? CorrelationSign::Positive : CorrelationSign::Negative;
            for (const std::string& c : split(value, ',')) {
                group.columns.push_back(parse_col(c, key));
            }
            spec.correlated_groups.push_back(std::move(group));
        } else {
            throw ConfigError("unknown constraints key: " + key);
        }
    }
    return spec;
} catch (const ParseError& e) {
    throw ConfigError(e.what());
}

ConstraintSpec constraints_to_fitted_space(const ConstraintSpec& spec,
                                           const std::optional<ScalingTransform>& scaling) {
    if (!scaling) return spec;
    ConstraintSpec fitted = spec;
    for (auto& [col, bound] : fitted.monotonic) bound.slack /= scaling->stddev[col];
    return fitted;
}

QueryPlan build_query_plan(const DbscanModel& model, const ExperimentConfig& config) {
    if (model.num_clusters == 0) throw NoClusters();

    // members per partition: clusters 0..m-1, then noise
    std::vector<std::vector<std::size_t>> cluster_members(model.num_clusters);
    std::vector<std::size_t> noise_members;
    for (std::size_t i = 0; i < model.data.rows; ++i) {
        if (model.labels[i] == kNoiseLabel) {
            noise_members.push_back(i);
        } else {
            cluster_members[model.labels[i]].push_back(i);
        }
    }

    const auto sample_partition = [&](const std::vector<std::size_t>& members, Label partition) {
        Rng rng(derive_seed(config.seed,
                            kPartitionStream + static_cast<std::uint64_t>(partition + 1)));
        std::vector<std::size_t> sampled = rng.sample_without_replacement(
            members, static_cast<std::size_t>(config.samples_per_partition));
        std::sort(sampled.begin(), sampled.end());
        return sampled;
    };

    QueryPlan plan;
    const auto push = [&](std::size_t row, Label partition, Label target) {
        PlannedQuery q;
        q.query_id = plan.queries.size();
        q.source_row = row;
        q.source_partition = partition;
        q.target = target;
        q.seed = derive_seed(config.seed, kQueryStream + q.query_id);
        plan.queries.push_back(q);
    };

    for (Label c = 0; c < model.num_clusters; ++c) {
        for (std::size_t row : sample_partition(cluster_members[c], c)) {
            for (Label target = 0; target < model.num_clusters; ++target) {
                if (target != c) push(row, c, target);
            }
        }
    }
    if (!noise_members.empty()) {
        for (std::size_t row : sample_partition(noise_members, kNoiseLabel)) {
            for (Label target = 0; target < model.num_clusters; ++target) {
                push(row, kNoiseLabel, target);
            }
        }
    }
    return plan;
}

namespace {

struct QueryOutcome {
    QueryMetrics metrics;
    CounterfactualSet set;
    std::string reason;  // non-empty when the query produced no counterfactuals
};

/// Runs fn(0..jobs-1) on the requested number of threads; each job writes
/// only its own slot, so results are independent of scheduling.
void parallel_for(std::size_t jobs, int threads, const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || jobs <= 1) {
        for (std::size_t j = 0; j < jobs; ++j) fn(j);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const int n = std::min<std::size_t>(static_cast<std::size_t>(threads), jobs);
    pool.reserve(n);
    for (int t = 0; t < n; ++t) {
        pool.emplace_back([&]() {
            for (std::size_t j = next.fetch_add(1); j < jobs; j = next.fetch_add(1)) fn(j);
        });
    }
    for (std::thread& t : pool) t.join();
}

std::string optional_cell(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
}

struct Summary {
    double mean = 0.0;
    double sem = 0.0;
    std::size_t count = 0;
};

Summary summarize(const std::vector<double>& values) {
    Summary s;
    s.count = values.size();
    if (values.empty()) return s;
    for (double v : values) s.mean += v;
    s.mean /= static_cast<double>(values.size());
    if (values.size() >= 2) {
        double sq = 0.0;
        for (double v : values) sq += (v - s.mean) * (v - s.mean);
        const double sample_var = sq / static_cast<double>(values.size() - 1);
        s.sem = std::sqrt(sample_var / static_cast<double>(values.size()));
    }
    return s;
}

}  // namespace

void run_experiment(const ExperimentConfig& config) {
    config.validate();

    const DatasetMatrix raw = load_csv(config.dataset_path);
    std::optional<ScalingTransform> scaling;
    DatasetMatrix fitted = raw;
    if (config.standardize) {
        scaling = fit_scaling(raw);
        fitted = scaling->apply(raw);
    }

    ConstraintSpec constraints;
    if (config.constraints_path) {
        constraints = parse_constraints_file(*config.constraints_path);
        constraints.validate(raw.cols);
        constraints = constraints_to_fitted_space(constraints, scaling);
    }

    const DbscanModel model = fit(std::move(fitted), config.epsilon, config.min_pts);
    const std::vector<ClusterGraph> graphs = build_all_graphs(model);
    const QueryPlan plan = build_query_plan(model, config);
    std::optional<LofTable> lof;
    if (!plan.queries.empty()) {
        const int k = static_cast<int>(std::min<std::size_t>(
            static_cast<std::size_t>(config.lof_k), model.data.rows - 1));
        lof.emplace(model.data, k, model.space);
    }

    const std::size_t num_queries = plan.queries.size();
    const std::size_t jobs = num_queries * config.strategies.size();
    std::vector<QueryOutcome> outcomes(jobs);

    parallel_for(jobs, config.threads, [&](std::size_t job) {
        const std::size_t strategy_idx = job / num_queries;
        const PlannedQuery& pq = plan.queries[job % num_queries];
        QueryOutcome& out = outcomes[job];

        ExplanationQuery query;
        const auto src = model.data.row(pq.source_row);
        query.point.assign(src.begin(), src.end());
        query.target = pq.target;
        query.k = config.k;
        query.strategy = config.strategies[strategy_idx];
        query.constraints = constraints;
        query.seed = pq.seed;

        const auto start = std::chrono::steady_clock::now();
        try {
            out.set = explain(model, graphs, query);
            out.metrics = compute_query_metrics(out.set, model, graphs, query.point, *lof);
        } catch (const Error& e) {
            out.metrics = QueryMetrics{};  // validity 0, metrics undefined
            out.reason = e.what();
        }
        const auto stop = std::chrono::steady_clock::now();
        out.metrics.runtime_seconds = std::chrono::duration<double>(stop - start).count();
    });

    // gather and write, single-threaded, in plan order
    const std::filesystem::path dir(config.output_dir);
    std::filesystem::create_directories(dir);

    std::ofstream cf_out(dir / "counterfactuals.csv");
    if (!cf_out) throw IoError("cannot write counterfactuals.csv");
    cf_out << "query_id,strategy,cf_index,source_row,target,ref_core_row,distance_to_origin";
    for (const std::string& name : raw.column_names) cf_out << ',' << name;
    cf_out << '\n';

    std::ofstream metrics_out(dir / "metrics.csv");
    if (!metrics_out) throw IoError("cannot write metrics.csv");
    metrics_out << "query_id,strategy,source_row,source_partition,target,validity,proximity,"
                   "diversity,sparsity,plausibility,reason";
    if (config.with_timings) metrics_out << ",runtime_seconds";
    metrics_out << '\n';

    for (std::size_t s = 0; s < config.strategies.size(); ++s) {
        const std::string name = strategy_name(config.strategies[s]);
        for (std::size_t q = 0; q < num_queries; ++q) {
            const PlannedQuery& pq = plan.queries[q];
            const QueryOutcome& out = outcomes[s * num_queries + q];

            for (std::size_t i = 0; i < out.set.items.size(); ++i) {
                const Counterfactual& cf = out.set.items[i];
                cf_out << pq.query_id << ',' << name << ',' << i << ',' << pq.source_row << ','
                       << pq.target << ',' << cf.reference_core << ','
                       << format_double(cf.distance_to_origin);
                // coordinates are reported in original units; frozen columns
                // keep the origin's exact values
                std::vector<double> coords =
                    scaling ? scaling->invert_row(cf.coords) : cf.coords;
                for (std::size_t col : constraints.non_actionable) {
                    coords[col] = raw.at(pq.source_row, col);
                }
                for (double v : coords) cf_out << ',' << format_double(v);
                cf_out << '\n';
            }

            metrics_out << pq.query_id << ',' << name << ',' << pq.source_row << ','
                        << pq.source_partition << ',' << pq.target << ','
                        << format_double(out.metrics.validity) << ','
                        << optional_cell(out.metrics.proximity) << ','
                        << optional_cell(out.metrics.diversity) << ','
                        << optional_cell(out.metrics.sparsity) << ','
                        << optional_cell(out.metrics.plausibility) << ',' << out.reason;
            if (config.with_timings) {
                metrics_out << ',' << format_double(out.metrics.runtime_seconds);
            }
            metrics_out << '\n';
        }
    }
    cf_out.close();
    metrics_out.close();

    // percentile curves and summary
    std::ofstream summary_out(dir / "summary.csv");
    if (!summary_out) throw IoError("cannot write summary.csv");
    summary_out << "strategy,metric,mean,sem,count\n";

    for (std::size_t s = 0; s < config.strategies.size(); ++s) {
        const std::string name = strategy_name(config.strategies[s]);
        std::map<std::string, std::vector<double>> defined;
        std::vector<double> validities;
        for (std::size_t q = 0; q < num_queries; ++q) {
            const QueryMetrics& m = outcomes[s * num_queries + q].metrics;
            validities.push_back(m.validity);
            if (m.proximity) defined["proximity"].push_back(*m.proximity);
            if (m.diversity) defined["diversity"].push_back(*m.diversity);
            if (m.sparsity) defined["sparsity"].push_back(*m.sparsity);
            if (m.plausibility) defined["plausibility"].push_back(*m.plausibility);
        }

        const Summary sv = summarize(validities);
        summary_out << name << ",validity," << format_double(sv.mean) << ','
                    << format_double(sv.sem) << ',' << sv.count << '\n';
        for (const std::string metric : {"proximity", "diversity", "sparsity", "plausibility"}) {
            const Summary sm = summarize(defined[metric]);
            summary_out << name << ',' << metric << ',' << format_double(sm.mean) << ','
                        << format_double(sm.sem) << ',' << sm.count << '\n';

            const CurveOrder order =
                metric == std::string("diversity") ? CurveOrder::Descending : CurveOrder::Ascending;
            const PercentileCurve curve = percentile_curve(defined[metric], num_queries, order);
            std::ofstream curve_out(dir / ("curve_" + metric + "_" + name + ".csv"));
            if (!curve_out) throw IoError("cannot write curve file");
            curve_out << "percent," << metric << '\n';
            for (const PercentilePoint& p : curve.points) {
                curve_out << format_double(p.percent) << ',' << format_double(p.value) << '\n';
            }
        }
    }
}

void save_model(const DbscanModel& model, bool standardized, const std::string& dataset_path,
                const std::filesystem::path& out_path) {
    std::ofstream out(out_path);
    if (!out) throw IoError("cannot write model file: " + out_path.string());
    out << "epsilon=" << format_double(model.epsilon) << " min_pts=" << model.min_pts
        << " num_clusters=" << model.num_clusters << " cols=" << model.data.cols
        << " rows=" << model.data.rows << " standardize=" << (standardized ? 1 : 0)
        << " dataset=" << dataset_path << '\n';
    for (std::size_t i = 0; i < model.data.rows; ++i) {
        out << i << ',' << model.labels[i] << ',' << (model.is_core[i] ? 1 : 0) << '\n';
    }
}

LoadedModel load_model(const std::filesystem::path& model_path,
                       std::optional<std::string> dataset_override) {
    std::ifstream in(model_path);
    if (!in) throw IoError("cannot open model file: " + model_path.string());

    std::string header;
    if (!std::getline(in, header)) throw ParseError("empty model file");

    LoadedModel loaded;
    double epsilon = 0.0;
    int min_pts = 0;
    Label num_clusters = 0;
    std::size_t cols = 0;
    std::size_t rows = 0;
    // "dataset=" is last so the path may contain spaces
    const std::string dataset_key = " dataset=";
    const std::size_t ds = header.find(dataset_key);
    if (ds == std::string::npos) throw ParseError("model header is missing the dataset path");
    loaded.dataset_path = header.substr(ds + dataset_key.size());
    for (const std::string& field : split(header.substr(0, ds), ' ')) {
        const std::size_t eq = field.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = field.substr(0, eq);
        const std::string value = field.substr(eq + 1);
        if (key == "epsilon") epsilon = parse_double(value, key);
        else if (key == "min_pts") min_pts = static_cast<int>(parse_long(value, key));
        else if (key == "num_clusters") num_clusters = static_cast<Label>(parse_long(value, key));
        else if (key == "cols") cols = static_cast<std::size_t>(parse_long(value, key));
        else if (key == "rows") rows = static_cast<std::size_t>(parse_long(value, key));
        else if (key == "standardize") loaded.standardized = parse_long(value, key) != 0;
    }
    if (epsilon <= 0.0 || min_pts < 1) throw ParseError("model header has invalid parameters");

    if (dataset_override) loaded.dataset_path = *dataset_override;
    loaded.raw_data = load_csv(loaded.dataset_path);
    if (loaded.raw_data.rows != rows || loaded.raw_data.cols != cols) {
        throw ParseError("dataset shape does not match the model file (expected " +
                         std::to_string(rows) + "x" + std::to_string(cols) + ")");
    }

    DbscanModel model;
    model.epsilon = epsilon;
    model.min_pts = min_pts;
    model.num_clusters = num_clusters;
    model.labels.assign(rows, kNoiseLabel);
    model.is_core.assign(rows, false);

    std::string line;
    std::size_t seen = 0;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        const std::vector<std::string> cells = split(line, ',');
        if (cells.size() != 3) throw ParseError("model row line must have 3 cells: " + line);
        const std::size_t row = static_cast<std::size_t>(parse_long(cells[0], "row"));
        if (row >= rows) throw ParseError("model row index out of range: " + cells[0]);
        model.labels[row] = static_cast<Label>(parse_long(cells[1], "label"));
        model.is_core[row] = parse_long(cells[2], "is_core") != 0;
        ++seen;
    }
    if (seen != rows) throw ParseError("model file row count does not match header");

    if (loaded.standardized) {
        loaded.scaling = fit_scaling(loaded.raw_data);
        model.data = loaded.scaling->apply(loaded.raw_data);
    } else {
        model.data = loaded.raw_data;
    }
    loaded.model = std::move(model);
    return loaded;
}

}  // namespace dbcf

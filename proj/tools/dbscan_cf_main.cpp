// Command-line front end: fit / explain / evaluate subcommands.
//
// Exit codes: 0 success, 1 configuration error, 2 I/O error, 3 internal
// invariant violation, 4 explain-level failure (no admissible core, already
// in target, insufficient cores).

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dbcf/constructor.hpp"
#include "dbcf/experiment.hpp"
#include "dbcf/errors.hpp"

namespace {

int run_fit(const std::string& dataset, double epsilon, int min_pts, bool standardize,
            const std::string& out_path) {
    const dbcf::DatasetMatrix raw = dbcf::load_csv(dataset);
    dbcf::DatasetMatrix fitted = raw;
    if (standardize) fitted = dbcf::fit_scaling(raw).apply(raw);
    const dbcf::DbscanModel model = dbcf::fit(std::move(fitted), epsilon, min_pts);
    dbcf::save_model(model, standardize, dataset, out_path);
    std::cout << "clusters=" << model.num_clusters << " rows=" << model.data.rows << '\n';
    return 0;
}

int run_explain(const std::string& model_path, const std::vector<double>& point,
                const std::string& target, int k, const std::string& strategy,
                const std::optional<std::string>& constraint_file, std::uint64_t seed,
                const std::optional<std::string>& dataset_override) {
    const dbcf::LoadedModel loaded = dbcf::load_model(model_path, dataset_override);

    dbcf::ExplanationQuery query;
    query.point = loaded.scaling ? loaded.scaling->apply_row(point) : point;
    if (target != "any") {
        query.target = static_cast<dbcf::Label>(std::stol(target));
    }
    query.k = k;
    query.strategy = dbcf::strategy_from_name(strategy);
    query.seed = seed;
    if (constraint_file) {
        query.constraints = dbcf::parse_constraints_file(*constraint_file);
        query.constraints.validate(loaded.raw_data.cols);
        query.constraints = dbcf::constraints_to_fitted_space(query.constraints, loaded.scaling);
    }

    const std::vector<dbcf::ClusterGraph> graphs = dbcf::build_all_graphs(loaded.model);
    const dbcf::CounterfactualSet set = dbcf::explain(loaded.model, graphs, query);

    for (const dbcf::Counterfactual& cf : set.items) {
        std::vector<double> coords =
            loaded.scaling ? loaded.scaling->invert_row(cf.coords) : cf.coords;
        for (std::size_t col : query.constraints.non_actionable) coords[col] = point[col];
        for (std::size_t c = 0; c < coords.size(); ++c) {
            if (c > 0) std::cout << ',';
            std::cout << dbcf::format_double(coords[c]);
        }
        std::cout << ',' << cf.reference_core << ','
                  << dbcf::format_double(cf.distance_to_origin) << '\n';
    }
    return 0;
}

int run_evaluate(const std::string& config_path, const std::optional<std::string>& output_dir,
                 std::optional<int> threads) {
    dbcf::ExperimentConfig config = dbcf::parse_config_file(config_path);
    if (output_dir) config.output_dir = *output_dir;
    if (threads) config.threads = *threads;
    dbcf::run_experiment(config);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Counterfactual explanations for DBSCAN cluster assignments"};
    app.require_subcommand(1);

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "Fit DBSCAN and write a model file");
    std::string fit_dataset;
    double fit_epsilon = 0.0;
    int fit_min_pts = 0;
    bool fit_no_standardize = false;
    std::string fit_out = "model.txt";
    fit_cmd->add_option("--dataset", fit_dataset, "CSV dataset path")->required();
    fit_cmd->add_option("--epsilon", fit_epsilon, "neighbourhood radius")->required();
    fit_cmd->add_option("--min-pts", fit_min_pts, "minimum neighbourhood size")->required();
    fit_cmd->add_flag("--no-standardize", fit_no_standardize,
                      "fit in raw feature units instead of z-scores");
    fit_cmd->add_option("--out", fit_out, "output model file");

    // explain
    auto* explain_cmd = app.add_subcommand("explain", "Generate counterfactuals for one point");
    std::string ex_model;
    std::vector<double> ex_point;
    std::string ex_target;
    int ex_k = 1;
    std::string ex_strategy = "greedy";
    std::string ex_constraints;
    std::string ex_dataset;
    std::uint64_t ex_seed = 0;
    explain_cmd->add_option("--model", ex_model, "model file from 'fit'")->required();
    explain_cmd->add_option("--point", ex_point, "point coordinates (original units)")
        ->required()
        ->expected(-1)
        ->delimiter(',');
    explain_cmd->add_option("--target", ex_target, "target cluster label, or 'any'")->required();
    explain_cmd->add_option("--k", ex_k, "number of counterfactuals");
    explain_cmd->add_option("--strategy", ex_strategy,
                            "greedy|local_search|exact|nearest|furthest|random");
    explain_cmd->add_option("--constraints", ex_constraints, "constraint file");
    explain_cmd->add_option("--dataset", ex_dataset, "override the dataset path in the model");
    explain_cmd->add_option("--seed", ex_seed, "seed for the random strategy");

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "Run the benchmark described by a config file");
    std::string ev_config;
    std::string ev_output;
    int ev_threads = 0;
    eval_cmd->add_option("--config", ev_config, "key = value config file")->required();
    eval_cmd->add_option("--output-dir", ev_output, "override output directory");
    eval_cmd->add_option("--threads", ev_threads, "override worker thread count");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*fit_cmd) {
            return run_fit(fit_dataset, fit_epsilon, fit_min_pts, !fit_no_standardize, fit_out);
        }
        if (*explain_cmd) {
            return run_explain(
                ex_model, ex_point, ex_target, ex_k, ex_strategy,
                ex_constraints.empty() ? std::nullopt : std::make_optional(ex_constraints),
                ex_seed, ex_dataset.empty() ? std::nullopt : std::make_optional(ex_dataset));
        }
        if (*eval_cmd) {
            return run_evaluate(ev_config,
                                ev_output.empty() ? std::nullopt : std::make_optional(ev_output),
                                ev_threads > 0 ? std::make_optional(ev_threads) : std::nullopt);
        }
    } catch (const dbcf::NoAdmissibleCore& e) {
        std::cerr << "error: NoAdmissibleCore: " << e.what() << '\n';
        return 4;
    } catch (const dbcf::AlreadyInTarget& e) {
        std::cerr << "error: AlreadyInTarget: " << e.what() << '\n';
        return 4;
    } catch (const dbcf::InsufficientCores& e) {
        std::cerr << "error: InsufficientCores: " << e.what() << '\n';
        return 4;
    } catch (const dbcf::ConfigError& e) {
        std::cerr << "error: config: " << e.what() << '\n';
        return 1;
    } catch (const dbcf::IoError& e) {
        std::cerr << "error: io: " << e.what() << '\n';
        return 2;
    } catch (const dbcf::ParseError& e) {
        std::cerr << "error: parse: " << e.what() << '\n';
        return 2;
    } catch (const dbcf::InvalidParameter& e) {
        std::cerr << "error: config: " << e.what() << '\n';
        return 1;
    } catch (const dbcf::NoClusters& e) {
        std::cerr << "error: config: " << e.what() << '\n';
        return 1;
    } catch (const dbcf::Error& e) {
        std::cerr << "error: internal: " << e.what() << '\n';
        return 3;
    }
    return 0;
}

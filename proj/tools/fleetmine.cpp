#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fleetmine/config.hpp"
#include "fleetmine/io.hpp"
#include "fleetmine/pipeline.hpp"

// fleetmine: fleet-maintenance analytics over vehicle/maintenance tables.
//   gen            synthesize a fleet with planted structure
//   decompose      vehicle x system x time tensor -> nonnegative CP model
//   prism          characteristic subsequences per factor (Bayesian)
//   dsm            frequentist differential sequence mining baseline
//   forecast-cost  rolling-origin ARIMA cost forecasts per grouping
//   forecast-seq   next-repair sequence models scored by perplexity
//   spec-search    AIC grid search for the ARIMA orders

namespace {

void add_config_flags(CLI::App* cmd, fleetmine::RunConfig& cfg, std::string& config_path) {
    cmd->add_option("--config", config_path, "JSON config file; flags override its fields");
    cmd->add_option("--vehicles_csv", cfg.vehicles_csv, "vehicles table (CSV)");
    cmd->add_option("--maintenance_csv", cfg.maintenance_csv, "maintenance table (CSV)");
    cmd->add_option("--out_dir", cfg.out_dir, "output directory");
    cmd->add_option("--cutoff_year", cfg.cutoff_year, "drop records completed before this year");
    cmd->add_option("--time_encoding", cfg.time_encoding, "absolute_month | lifetime_year");
    cmd->add_option("--transform", cfg.transform, "log1p | raw");
    cmd->add_option("--rank", cfg.rank, "number of factors R");
    cmd->add_option("--tol", cfg.tol, "fit-change convergence tolerance");
    cmd->add_option("--max_iter", cfg.max_iter, "maximum update iterations");
    cmd->add_option("--rope", cfg.rope, "region of practical equivalence half-width");
    cmd->add_option("--max_len", cfg.max_len, "maximum n-gram length");
    cmd->add_option("--bdpt_draws", cfg.bdpt_draws, "posterior draws per test");
    cmd->add_option("--prism_threshold", cfg.prism_threshold,
                    "minimum P(outside ROPE) to report");
    cmd->add_option("--min_support", cfg.min_support, "minimum in-group n-gram occurrences");
    cmd->add_option("--restrict_time", cfg.restrict_time,
                    "restrict records to in-group time bins");
    cmd->add_option("--gamma", cfg.gamma, "mixture weight concentration prior");
    cmd->add_option("--arima_p", cfg.arima_p, "autoregressive terms");
    cmd->add_option("--arima_d", cfg.arima_d, "differencing degree");
    cmd->add_option("--arima_q", cfg.arima_q, "moving-average terms");
    cmd->add_option("--initial_window", cfg.initial_window, "training months before first forecast");
    cmd->add_option("--horizons", cfg.horizons, "forecast horizons (months)");
    cmd->add_option("--group_kind", cfg.group_kind, "department | makemodel");
    cmd->add_option("--group_code", cfg.group_code, "department code (default: most active)");
    cmd->add_option("--group_make", cfg.group_make, "vehicle make for makemodel grouping");
    cmd->add_option("--group_model", cfg.group_model, "vehicle model for makemodel grouping");
    cmd->add_option("--markov_order", cfg.markov_order, "Markov context length");
    cmd->add_option("--markov_alpha", cfg.markov_alpha, "add-alpha smoothing");
    cmd->add_option("--normalize_plots", cfg.normalize_plots,
                    "max-normalize loadings in plot files");
    cmd->add_option("--export_tensor", cfg.export_tensor, "also write tensor.json");
    cmd->add_option("--export_dataset", cfg.export_dataset, "also write the cleaned dataset JSON");
    cmd->add_option("--master_seed", cfg.master_seed, "master seed for all stages");
}

// config file first, then flags override
void finalize_config(CLI::App* cmd, fleetmine::RunConfig& cfg, const std::string& config_path) {
    if (config_path.empty()) return;
    fleetmine::RunConfig from_file;
    fleetmine::apply_config_json(from_file, fleetmine::io::read_json_file(config_path));
    // flags the user actually passed win over the file
    fleetmine::RunConfig merged = from_file;
    const auto passed = [&](const std::string& name) {
        const auto* opt = cmd->get_option_no_throw(name);
        return opt != nullptr && opt->count() > 0;
    };
    if (passed("--vehicles_csv")) merged.vehicles_csv = cfg.vehicles_csv;
    if (passed("--maintenance_csv")) merged.maintenance_csv = cfg.maintenance_csv;
    if (passed("--out_dir")) merged.out_dir = cfg.out_dir;
    if (passed("--cutoff_year")) merged.cutoff_year = cfg.cutoff_year;
    if (passed("--time_encoding")) merged.time_encoding = cfg.time_encoding;
    if (passed("--transform")) merged.transform = cfg.transform;
    if (passed("--rank")) merged.rank = cfg.rank;
    if (passed("--tol")) merged.tol = cfg.tol;
    if (passed("--max_iter")) merged.max_iter = cfg.max_iter;
    if (passed("--rope")) merged.rope = cfg.rope;
    if (passed("--max_len")) merged.max_len = cfg.max_len;
    if (passed("--bdpt_draws")) merged.bdpt_draws = cfg.bdpt_draws;
    if (passed("--prism_threshold")) merged.prism_threshold = cfg.prism_threshold;
    if (passed("--min_support")) merged.min_support = cfg.min_support;
    if (passed("--restrict_time")) merged.restrict_time = cfg.restrict_time;
    if (passed("--gamma")) merged.gamma = cfg.gamma;
    if (passed("--arima_p")) merged.arima_p = cfg.arima_p;
    if (passed("--arima_d")) merged.arima_d = cfg.arima_d;
    if (passed("--arima_q")) merged.arima_q = cfg.arima_q;
    if (passed("--initial_window")) merged.initial_window = cfg.initial_window;
    if (passed("--horizons")) merged.horizons = cfg.horizons;
    if (passed("--group_kind")) merged.group_kind = cfg.group_kind;
    if (passed("--group_code")) merged.group_code = cfg.group_code;
    if (passed("--group_make")) merged.group_make = cfg.group_make;
    if (passed("--group_model")) merged.group_model = cfg.group_model;
    if (passed("--markov_order")) merged.markov_order = cfg.markov_order;
    if (passed("--markov_alpha")) merged.markov_alpha = cfg.markov_alpha;
    if (passed("--normalize_plots")) merged.normalize_plots = cfg.normalize_plots;
    if (passed("--export_tensor")) merged.export_tensor = cfg.export_tensor;
    if (passed("--export_dataset")) merged.export_dataset = cfg.export_dataset;
    if (passed("--master_seed")) merged.master_seed = cfg.master_seed;
    cfg = merged;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fleet-maintenance analytics toolkit"};
    app.require_subcommand(1);

    // gen
    std::string gen_spec, gen_out = ".";
    auto* gen = app.add_subcommand("gen", "generate a synthetic fleet from a planted spec");
    gen->add_option("spec", gen_spec, "planted spec (JSON)")->required();
    gen->add_option("--out_dir", gen_out, "output directory");

    fleetmine::RunConfig cfg_decompose, cfg_prism, cfg_dsm, cfg_cost, cfg_seq;
    std::string cp_decompose, cp_prism, cp_dsm, cp_cost, cp_seq;
    auto* decompose =
        app.add_subcommand("decompose", "fit the nonnegative CP model and export plot data");
    add_config_flags(decompose, cfg_decompose, cp_decompose);
    auto* prism = app.add_subcommand("prism", "mine characteristic subsequences per factor");
    add_config_flags(prism, cfg_prism, cp_prism);
    auto* dsm = app.add_subcommand("dsm", "frequentist differential sequence mining baseline");
    add_config_flags(dsm, cfg_dsm, cp_dsm);
    auto* cost = app.add_subcommand("forecast-cost", "rolling-origin ARIMA cost forecasts");
    add_config_flags(cost, cfg_cost, cp_cost);
    auto* seq = app.add_subcommand("forecast-seq", "sequence models scored by perplexity");
    add_config_flags(seq, cfg_seq, cp_seq);
    fleetmine::RunConfig cfg_search;
    std::string cp_search;
    int search_max_p = 8, search_max_q = 6;
    auto* search = app.add_subcommand("spec-search", "AIC grid search for the cost model orders");
    add_config_flags(search, cfg_search, cp_search);
    search->add_option("--max_p", search_max_p, "largest AR order tried");
    search->add_option("--max_q", search_max_q, "largest MA order tried");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            fleetmine::pipeline::run_gen(gen_spec, gen_out);
        } else if (decompose->parsed()) {
            finalize_config(decompose, cfg_decompose, cp_decompose);
            fleetmine::pipeline::run_decompose(cfg_decompose);
        } else if (prism->parsed()) {
            finalize_config(prism, cfg_prism, cp_prism);
            fleetmine::pipeline::run_prism(cfg_prism);
        } else if (dsm->parsed()) {
            finalize_config(dsm, cfg_dsm, cp_dsm);
            fleetmine::pipeline::run_dsm(cfg_dsm);
        } else if (cost->parsed()) {
            finalize_config(cost, cfg_cost, cp_cost);
            fleetmine::pipeline::run_forecast_cost(cfg_cost);
        } else if (seq->parsed()) {
            finalize_config(seq, cfg_seq, cp_seq);
            fleetmine::pipeline::run_forecast_seq(cfg_seq);
        } else if (search->parsed()) {
            finalize_config(search, cfg_search, cp_search);
            fleetmine::pipeline::run_spec_search(cfg_search, search_max_p, search_max_q);
        }
    } catch (const std::exception& e) {
        std::cerr << "fleetmine: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

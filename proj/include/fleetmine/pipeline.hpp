#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fleetmine/config.hpp"
#include "fleetmine/io.hpp"
#include "fleetmine/seqmodel.hpp"

// End-to-end stage drivers behind the CLI subcommands. Each stage derives
// its own seed from the master seed, writes machine-readable outputs plus a
// run log with the fully resolved config, and reports files by basename so
// repeated runs into different directories stay byte-identical.

namespace fleetmine::pipeline {

namespace detail {

inline std::string basename_of(const std::string& path) {
    return std::filesystem::path(path).filename().string();
}

inline io::json logged_config(const RunConfig& cfg) {
    io::json j = config_to_json(cfg);
    for (const char* key : {"vehicles_csv", "maintenance_csv"})
        j[key] = basename_of(j[key].get<std::string>());
    // outputs are listed by basename; the directory itself is run-local
    j["out_dir"] = ".";
    return j;
}

inline std::string out_path(const RunConfig& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.out_dir);
    return (std::filesystem::path(cfg.out_dir) / name).string();
}

inline void write_log(const RunConfig& cfg, const std::string& stage, io::json details,
                      const std::vector<std::string>& outputs) {
    details["stage"] = stage;
    details["config"] = logged_config(cfg);
    details["outputs"] = outputs;
    io::write_json_file(out_path(cfg, stage + "_log.json"), details);
}

inline FleetDataset load_dataset(const RunConfig& cfg) {
    if (cfg.vehicles_csv.empty() || cfg.maintenance_csv.empty())
        throw std::invalid_argument("config: vehicles_csv and maintenance_csv are required");
    auto vehicles = parse_vehicles(cfg.vehicles_csv);
    auto records = parse_maintenance(cfg.maintenance_csv);
    return clean_and_filter(std::move(records), std::move(vehicles), cfg.cutoff_year);
}

inline std::string factor_file_name(int r) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "factor_%03d.csv", r);
    return buf;
}

inline CostGrouping resolve_grouping(const RunConfig& cfg, const FleetDataset& ds) {
    CostGrouping grouping;
    if (cfg.group_kind == "department") {
        grouping.kind = CostGroupKind::Department;
        grouping.dept_code = cfg.group_code;
    } else if (cfg.group_kind == "makemodel") {
        grouping.kind = CostGroupKind::MakeModel;
        grouping.make = cfg.group_make;
        grouping.model = cfg.group_model;
    } else {
        throw std::invalid_argument("config: unknown group_kind '" + cfg.group_kind + "'");
    }
    const bool unresolved = grouping.kind == CostGroupKind::Department
                                ? grouping.dept_code.empty()
                                : grouping.make.empty() && grouping.model.empty();
    if (!unresolved) return grouping;

    // default to the grouping with the most records; ties break by name
    std::map<std::string, std::size_t> counts;
    for (const auto& r : ds.records) {
        const auto vit = ds.vehicles.find(r.unit_id);
        if (vit == ds.vehicles.end()) continue;
        counts[grouping.kind == CostGroupKind::Department
                   ? vit->second.dept_code
                   : vit->second.make + "\x1f" + vit->second.model] += 1;
    }
    if (counts.empty()) throw std::invalid_argument("no records with known vehicles to group");
    const auto best = std::max_element(counts.begin(), counts.end(),
                                       [](const auto& a, const auto& b) {
                                           if (a.second != b.second) return a.second < b.second;
                                           return a.first > b.first;
                                       });
    if (grouping.kind == CostGroupKind::Department) {
        grouping.dept_code = best->first;
    } else {
        const auto sep = best->first.find('\x1f');
        grouping.make = best->first.substr(0, sep);
        grouping.model = best->first.substr(sep + 1);
    }
    return grouping;
}

} // namespace detail

// gen: planted spec -> vehicles.csv, maintenance.csv, ground_truth.json
inline void run_gen(const std::string& spec_path, const std::string& out_dir) {
    const PlantedSpec spec = io::planted_spec_from_json(io::read_json_file(spec_path));
    const GeneratedFleet fleet = generate_fleet(spec);

    std::filesystem::create_directories(out_dir);
    const auto path = [&](const char* name) {
        return (std::filesystem::path(out_dir) / name).string();
    };
    {
        std::ostringstream os;
        std::vector<VehicleRecord> vehicles;
        vehicles.reserve(fleet.dataset.vehicles.size());
        for (const auto& [unit, v] : fleet.dataset.vehicles) vehicles.push_back(v);
        write_vehicles_csv(os, vehicles);
        io::write_text_file(path("vehicles.csv"), os.str());
    }
    {
        std::ostringstream os;
        write_maintenance_csv(os, fleet.dataset.records);
        io::write_text_file(path("maintenance.csv"), os.str());
    }
    io::write_json_file(path("ground_truth.json"), io::ground_truth_to_json(fleet.truth));
}

inline void run_decompose(const RunConfig& cfg) {
    const FleetDataset ds = detail::load_dataset(cfg);
    const TensorBuild build = build_tensor(ds, cfg.encoding(), cfg.count_transform());
    const auto seed = rng::derive_seed(cfg.master_seed, "decompose");
    const CpFitResult fit = cp_nmu_fit(build.tensor, cfg.rank, cfg.tol, cfg.max_iter, seed);

    std::vector<std::string> outputs;
    io::write_json_file(detail::out_path(cfg, "model.json"),
                        io::model_to_json(fit.model, fit.trace));
    outputs.push_back("model.json");

    const auto plots = three_way_export(fit.model, build.maps, cfg.normalize_plots);
    for (const auto& plot : plots) {
        std::ostringstream os;
        io::write_factor_plot_csv(os, plot);
        const auto name = detail::factor_file_name(plot.factor_index);
        io::write_text_file(detail::out_path(cfg, name), os.str());
        outputs.push_back(name);
    }
    if (cfg.export_tensor) {
        io::write_json_file(detail::out_path(cfg, "tensor.json"),
                            io::tensor_to_json(build.tensor, build.maps));
        outputs.push_back("tensor.json");
    }
    if (cfg.export_dataset) {
        io::write_json_file(detail::out_path(cfg, "dataset.json"), io::dataset_to_json(ds));
        outputs.push_back("dataset.json");
    }

    io::json details{{"seed", seed},
                     {"dims", {build.tensor.dim(0), build.tensor.dim(1), build.tensor.dim(2)}},
                     {"records_used", ds.records.size()},
                     {"excluded_jobs", build.excluded_jobs},
                     {"orphans", ds.orphan_units},
                     {"final_fit", fit.trace.fit.empty() ? 0.0 : fit.trace.fit.back()},
                     {"iterations_run", fit.trace.iterations_run},
                     {"converged", fit.trace.converged}};
    detail::write_log(cfg, "decompose", std::move(details), outputs);
}

inline void run_prism(const RunConfig& cfg) {
    const FleetDataset ds = detail::load_dataset(cfg);
    const TensorBuild build = build_tensor(ds, cfg.encoding(), cfg.count_transform());
    const FactorModel model =
        io::model_from_json(io::read_json_file(detail::out_path(cfg, "model.json")));
    if (static_cast<std::size_t>(model.A.rows()) != build.maps.vehicles.size() ||
        static_cast<std::size_t>(model.B.rows()) != build.maps.systems.size() ||
        static_cast<std::size_t>(model.C.rows()) != build.maps.time_bins.size())
        throw std::invalid_argument(
            "model.json does not match the tensor built from this config (stale upstream "
            "artifact?)");

    const auto sequences = extract_sequences(ds);
    PrismOptions opts;
    opts.rope = cfg.rope;
    opts.max_len = cfg.max_len;
    opts.draws = cfg.bdpt_draws;
    opts.threshold = cfg.prism_threshold;
    opts.min_in_support = cfg.min_support;
    opts.restrict_time = cfg.restrict_time;
    opts.gamma = cfg.gamma;
    opts.seed = rng::derive_seed(cfg.master_seed, "prism");

    const auto reports = prism_run(model, sequences, build.maps, ds, opts);
    io::write_json_file(detail::out_path(cfg, "prism_report.json"),
                        io::prism_report_to_json(reports, build.maps));

    std::size_t total = 0, degenerate = 0;
    for (const auto& r : reports) {
        total += r.subsequences.size();
        degenerate += r.degenerate ? 1 : 0;
    }
    io::json details{{"seed", opts.seed},
                     {"factors", reports.size()},
                     {"degenerate_factors", degenerate},
                     {"characteristic_subsequences", total}};
    detail::write_log(cfg, "prism", std::move(details), {"prism_report.json"});
}

inline void run_dsm(const RunConfig& cfg) {
    const FleetDataset ds = detail::load_dataset(cfg);
    const TensorBuild build = build_tensor(ds, cfg.encoding(), cfg.count_transform());
    const FactorModel model =
        io::model_from_json(io::read_json_file(detail::out_path(cfg, "model.json")));
    if (static_cast<std::size_t>(model.A.rows()) != build.maps.vehicles.size())
        throw std::invalid_argument("model.json does not match this dataset");
    const auto sequences = extract_sequences(ds);

    // group split identical to prism S1/S2, then the frequentist test
    std::map<std::string, std::size_t> vehicle_index;
    for (std::size_t i = 0; i < build.maps.vehicles.size(); ++i)
        vehicle_index[build.maps.vehicles[i]] = i;
    const int base_month = prism_detail::base_month_of(build.maps);

    std::vector<std::pair<int, DsmResult>> rows;
    int degenerate = 0;
    for (int r = 0; r < model.rank; ++r) {
        const auto va = bgmm_in_group(prism_detail::column(model.A, r), cfg.gamma);
        if (va.degenerate) {
            ++degenerate;
            continue;
        }
        const auto vc = bgmm_in_group(prism_detail::column(model.C, r), cfg.gamma);
        const bool restrict = cfg.restrict_time && !vc.degenerate;
        std::vector<std::vector<std::string>> in_seqs, out_seqs;
        for (const auto& seq : sequences) {
            const auto vit = vehicle_index.find(seq.unit_id);
            if (vit == vehicle_index.end()) continue;
            std::vector<std::string> codes;
            for (const auto& item : seq.items) {
                const int bin =
                    prism_detail::time_bin_of(item, seq.unit_id, build.maps, ds, base_month);
                if (bin < 0) continue;
                if (restrict && !vc.mask[static_cast<std::size_t>(bin)]) continue;
                codes.push_back(item.system_code);
            }
            if (codes.empty()) continue;
            (va.mask[vit->second] ? in_seqs : out_seqs).push_back(std::move(codes));
        }
        if (in_seqs.empty() || out_seqs.empty()) {
            ++degenerate;
            continue;
        }
        for (auto& res : dsm_baseline(in_seqs, out_seqs, cfg.max_len))
            rows.emplace_back(r, std::move(res));
    }

    std::ostringstream os;
    io::write_dsm_csv(os, rows);
    io::write_text_file(detail::out_path(cfg, "dsm_report.csv"), os.str());
    io::json details{{"factors", model.rank},
                     {"degenerate_or_empty_factors", degenerate},
                     {"rows", rows.size()}};
    detail::write_log(cfg, "dsm", std::move(details), {"dsm_report.csv"});
}

inline void run_forecast_cost(const RunConfig& cfg) {
    const FleetDataset ds = detail::load_dataset(cfg);
    const CostGrouping grouping = detail::resolve_grouping(cfg, ds);
    const CostSeries series = build_cost_series(ds, grouping);
    const ArimaSpec spec{cfg.arima_p, cfg.arima_d, cfg.arima_q};
    const auto seed = rng::derive_seed(cfg.master_seed, "forecast-cost");
    const RollingOriginResult eval =
        rolling_origin_eval(series.values, spec, cfg.initial_window, cfg.horizons, seed);

    {
        std::ostringstream os;
        io::write_cost_series_csv(os, series);
        io::write_text_file(detail::out_path(cfg, "cost_series.csv"), os.str());
    }
    {
        std::ostringstream os;
        io::write_cost_forecast_csv(os, series, eval);
        io::write_text_file(detail::out_path(cfg, "cost_forecasts.csv"), os.str());
    }
    io::json rmse = io::json::object();
    for (const auto& [h, v] : eval.rmse) rmse[std::to_string(h)] = v;
    io::json eval_json{{"grouping", grouping.label()},
                       {"months", series.months.size()},
                       {"initial_window", cfg.initial_window},
                       {"spec", {{"p", spec.p}, {"d", spec.d}, {"q", spec.q}}},
                       {"rmse", rmse},
                       {"forecasts", eval.steps.size()}};
    io::write_json_file(detail::out_path(cfg, "cost_eval.json"), eval_json);
    io::json details{{"seed", seed}, {"grouping", grouping.label()}};
    detail::write_log(cfg, "forecast_cost", std::move(details),
                      {"cost_series.csv", "cost_forecasts.csv", "cost_eval.json"});
}

// spec-search: AIC grid over p <= max_p, q <= max_q at the configured d,
// on the resolved grouping's cost series.
inline void run_spec_search(const RunConfig& cfg, int max_p = 8, int max_q = 6) {
    const FleetDataset ds = detail::load_dataset(cfg);
    const CostGrouping grouping = detail::resolve_grouping(cfg, ds);
    const CostSeries series = build_cost_series(ds, grouping);
    const auto seed = rng::derive_seed(cfg.master_seed, "spec-search");
    const ArimaSpec best = arima_spec_search(series.values, cfg.arima_d, max_p, max_q, seed);
    const ArimaFit fit = arima_fit(series.values, best, seed);
    io::json result{{"grouping", grouping.label()},
                    {"months", series.months.size()},
                    {"grid", {{"max_p", max_p}, {"max_q", max_q}, {"d", cfg.arima_d}}},
                    {"best", {{"p", best.p}, {"d", best.d}, {"q", best.q}}},
                    {"aic", fit.aic},
                    {"bic", fit.bic}};
    io::write_json_file(detail::out_path(cfg, "spec_search.json"), result);
    io::json details{{"seed", seed}, {"grouping", grouping.label()}};
    detail::write_log(cfg, "spec_search", std::move(details), {"spec_search.json"});
}

inline void run_forecast_seq(const RunConfig& cfg) {
    const FleetDataset ds = detail::load_dataset(cfg);
    const auto sequences = extract_sequences(ds);
    if (sequences.empty()) throw std::invalid_argument("no sequences to model");

    // 50/25/25 split by vehicle, seed-derived
    std::vector<std::size_t> order(sequences.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto engine = rng::make_engine(rng::derive_seed(cfg.master_seed, "split"));
    for (std::size_t i = order.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng::uniform01(engine) * static_cast<double>(i));
        std::swap(order[i - 1], order[j]);
    }
    const std::size_t n_train = order.size() / 2;
    const std::size_t n_val = order.size() / 4;

    std::vector<std::vector<std::string>> train, val, test;
    std::vector<std::string> train_units, val_units, test_units;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        const auto& seq = sequences[order[pos]];
        std::vector<std::string> codes;
        codes.reserve(seq.items.size());
        for (const auto& item : seq.items) codes.push_back(item.system_code);
        if (pos < n_train) {
            train.push_back(std::move(codes));
            train_units.push_back(seq.unit_id);
        } else if (pos < n_train + n_val) {
            val.push_back(std::move(codes));
            val_units.push_back(seq.unit_id);
        } else {
            test.push_back(std::move(codes));
            test_units.push_back(seq.unit_id);
        }
    }
    if (train.empty() || val.empty() || test.empty())
        throw std::invalid_argument("too few vehicles for a 50/25/25 split");
    std::sort(train_units.begin(), train_units.end());
    std::sort(val_units.begin(), val_units.end());
    std::sort(test_units.begin(), test_units.end());

    // vocabulary over the whole dataset so held-out systems stay scoreable
    std::set<std::string> vocab_set;
    for (const auto& r : ds.records) vocab_set.insert(r.system_code);
    const std::vector<std::string> vocabulary(vocab_set.begin(), vocab_set.end());

    const auto freq = fit_sequence_model(
        train, {SequenceModelKind::FrequencyMatched, 0, cfg.markov_alpha}, vocabulary);
    const auto markov = fit_sequence_model(
        train, {SequenceModelKind::Markov, cfg.markov_order, cfg.markov_alpha}, vocabulary);

    const auto items_of = [](const std::vector<std::vector<std::string>>& seqs) {
        std::size_t n = 0;
        for (const auto& s : seqs) n += s.size();
        return n;
    };
    io::json eval{{"vocabulary_size", vocabulary.size()},
                  {"split",
                   {{"train_vehicles", train.size()},
                    {"val_vehicles", val.size()},
                    {"test_vehicles", test.size()},
                    {"train_items", items_of(train)},
                    {"val_items", items_of(val)},
                    {"test_items", items_of(test)}}},
                  {"frequency_matched",
                   {{"alpha", cfg.markov_alpha},
                    {"val_perplexity", perplexity(freq, val)},
                    {"test_perplexity", perplexity(freq, test)}}},
                  {"markov",
                   {{"order", cfg.markov_order},
                    {"alpha", cfg.markov_alpha},
                    {"val_perplexity", perplexity(markov, val)},
                    {"test_perplexity", perplexity(markov, test)}}}};
    io::write_json_file(detail::out_path(cfg, "seq_eval.json"), eval);

    io::json details{{"seed", rng::derive_seed(cfg.master_seed, "split")},
                     {"split_assignment",
                      {{"train", train_units}, {"val", val_units}, {"test", test_units}}}};
    detail::write_log(cfg, "forecast_seq", std::move(details), {"seq_eval.json"});
}

} // namespace fleetmine::pipeline

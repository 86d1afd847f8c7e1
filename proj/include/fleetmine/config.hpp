#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "fleetmine/error.hpp"
#include "fleetmine/tensor.hpp"

namespace fleetmine {

// Fully resolved run configuration; every field can come from the JSON
// config file or be overridden by a long-form CLI flag of the same name.
// Every stage writes the resolved values into its run log.
struct RunConfig {
    std::string vehicles_csv;
    std::string maintenance_csv;
    std::string out_dir = ".";

    int cutoff_year = 2010;
    std::string time_encoding = "absolute_month"; // or "lifetime_year"
    std::string transform = "log1p";              // or "raw"

    int rank = 25;
    double tol = 1e-4;
    int max_iter = 500;

    double rope = 0.01;
    int max_len = 5;
    int bdpt_draws = 4000;
    double prism_threshold = 0.95;
    long long min_support = 5;
    bool restrict_time = true;
    double gamma = 0.5;

    int arima_p = 6;
    int arima_d = 2;
    int arima_q = 4;
    int initial_window = 24;
    std::vector<int> horizons = {1, 6};
    std::string group_kind = "department"; // or "makemodel"
    std::string group_code;                // empty: most active department
    std::string group_make;
    std::string group_model;

    int markov_order = 2;
    double markov_alpha = 0.1;

    bool normalize_plots = false;
    bool export_tensor = false;
    bool export_dataset = false;
    std::uint64_t master_seed = 0;

    TimeEncoding encoding() const {
        if (time_encoding == "absolute_month") return TimeEncoding::AbsoluteMonth;
        if (time_encoding == "lifetime_year") return TimeEncoding::LifetimeYear;
        throw std::invalid_argument("config: unknown time_encoding '" + time_encoding + "'");
    }
    CountTransform count_transform() const {
        if (transform == "log1p") return CountTransform::Log1p;
        if (transform == "raw") return CountTransform::Raw;
        throw std::invalid_argument("config: unknown transform '" + transform + "'");
    }
};

inline void apply_config_json(RunConfig& cfg, const nlohmann::json& j) {
    const auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("vehicles_csv", cfg.vehicles_csv);
    get("maintenance_csv", cfg.maintenance_csv);
    get("out_dir", cfg.out_dir);
    get("cutoff_year", cfg.cutoff_year);
    get("time_encoding", cfg.time_encoding);
    get("transform", cfg.transform);
    get("rank", cfg.rank);
    get("tol", cfg.tol);
    get("max_iter", cfg.max_iter);
    get("rope", cfg.rope);
    get("max_len", cfg.max_len);
    get("bdpt_draws", cfg.bdpt_draws);
    get("prism_threshold", cfg.prism_threshold);
    get("min_support", cfg.min_support);
    get("restrict_time", cfg.restrict_time);
    get("gamma", cfg.gamma);
    get("arima_p", cfg.arima_p);
    get("arima_d", cfg.arima_d);
    get("arima_q", cfg.arima_q);
    get("initial_window", cfg.initial_window);
    get("horizons", cfg.horizons);
    get("group_kind", cfg.group_kind);
    get("group_code", cfg.group_code);
    get("group_make", cfg.group_make);
    get("group_model", cfg.group_model);
    get("markov_order", cfg.markov_order);
    get("markov_alpha", cfg.markov_alpha);
    get("normalize_plots", cfg.normalize_plots);
    get("export_tensor", cfg.export_tensor);
    get("export_dataset", cfg.export_dataset);
    get("master_seed", cfg.master_seed);
}

inline nlohmann::json config_to_json(const RunConfig& cfg) {
    return {{"vehicles_csv", cfg.vehicles_csv},
            {"maintenance_csv", cfg.maintenance_csv},
            {"out_dir", cfg.out_dir},
            {"cutoff_year", cfg.cutoff_year},
            {"time_encoding", cfg.time_encoding},
            {"transform", cfg.transform},
            {"rank", cfg.rank},
            {"tol", cfg.tol},
            {"max_iter", cfg.max_iter},
            {"rope", cfg.rope},
            {"max_len", cfg.max_len},
            {"bdpt_draws", cfg.bdpt_draws},
            {"prism_threshold", cfg.prism_threshold},
            {"min_support", cfg.min_support},
            {"restrict_time", cfg.restrict_time},
            {"gamma", cfg.gamma},
            {"arima_p", cfg.arima_p},
            {"arima_d", cfg.arima_d},
            {"arima_q", cfg.arima_q},
            {"initial_window", cfg.initial_window},
            {"horizons", cfg.horizons},
            {"group_kind", cfg.group_kind},
            {"group_code", cfg.group_code},
            {"group_make", cfg.group_make},
            {"group_model", cfg.group_model},
            {"markov_order", cfg.markov_order},
            {"markov_alpha", cfg.markov_alpha},
            {"normalize_plots", cfg.normalize_plots},
            {"export_tensor", cfg.export_tensor},
            {"export_dataset", cfg.export_dataset},
            {"master_seed", cfg.master_seed}};
}

} // namespace fleetmine

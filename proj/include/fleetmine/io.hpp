#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fleetmine/arima.hpp"
#include "fleetmine/cost.hpp"
#include "fleetmine/cp.hpp"
#include "fleetmine/error.hpp"
#include "fleetmine/prism.hpp"
#include "fleetmine/records.hpp"
#include "fleetmine/synthgen.hpp"
#include "fleetmine/tensor.hpp"

// JSON and CSV serialization for every artifact the pipeline reads or
// writes. Money is serialized as decimal strings (cent-exact), dates as
// "YYYY-MM-DD". Object keys come out sorted, so identical inputs produce
// byte-identical documents.

namespace fleetmine::io {

using json = nlohmann::json;

inline json dataset_to_json(const FleetDataset& ds) {
    json vehicles = json::array();
    for (const auto& [unit, v] : ds.vehicles) {
        vehicles.push_back({{"unit_id", v.unit_id},
                            {"dept_code", v.dept_code},
                            {"dept_desc", v.dept_desc},
                            {"make", v.make},
                            {"model", v.model},
                            {"model_year", v.model_year},
                            {"purchase_cost", format_money(v.purchase_cost)},
                            {"status", v.status == VehicleStatus::Active ? "A" : "S"},
                            {"ltd_maint_cost", format_money(v.ltd_maint_cost)},
                            {"ltd_fuel_cost", format_money(v.ltd_fuel_cost)}});
    }
    json records = json::array();
    for (const auto& r : ds.records) {
        records.push_back({{"job_id", r.job_id},
                           {"unit_id", r.unit_id},
                           {"work_order_id", r.work_order_id},
                           {"open_date", format_date(r.open_date)},
                           {"completed_date", format_date(r.completed_date)},
                           {"system_code", r.system_code},
                           {"system_desc", r.system_desc},
                           {"job_reason", r.job_reason},
                           {"labor_cost", format_money(r.labor_cost)},
                           {"commercial_cost", format_money(r.commercial_cost)},
                           {"part_cost", format_money(r.part_cost)},
                           {"job_cost", format_money(r.job_cost)},
                           {"odometer", r.odometer}});
    }
    return {{"cutoff_year", ds.cutoff_year},
            {"vehicles", std::move(vehicles)},
            {"records", std::move(records)},
            {"orphans", ds.orphan_units},
            {"inconsistent_date_jobs", ds.inconsistent_date_jobs}};
}

inline json tensor_to_json(const Tensor3& t, const AxisMaps& maps) {
    return {{"dims", {t.dim(0), t.dim(1), t.dim(2)}},
            {"encoding",
             maps.encoding == TimeEncoding::AbsoluteMonth ? "absolute_month" : "lifetime_year"},
            {"vehicles", maps.vehicles},
            {"systems", maps.systems},
            {"time_bins", maps.time_bins},
            // mode-1 major: index (i * J + j) * K + k
            {"values", t.values()}};
}

namespace detail {

inline json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Matrix matrix_from_json(const json& rows) {
    if (!rows.is_array() || rows.empty())
        throw ParseError("model: expected a non-empty matrix");
    const auto r = static_cast<Eigen::Index>(rows.size());
    const auto c = static_cast<Eigen::Index>(rows[0].size());
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != c)
            throw ParseError("model: ragged matrix rows");
        for (Eigen::Index j = 0; j < c; ++j)
            m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]
                          .get<double>();
    }
    return m;
}

} // namespace detail

inline json model_to_json(const FactorModel& m, const ConvergenceTrace& trace) {
    return {{"rank", m.rank},
            {"dims", {m.A.rows(), m.B.rows(), m.C.rows()}},
            {"weights", std::vector<double>(m.weights.data(), m.weights.data() + m.weights.size())},
            {"A", detail::matrix_to_json(m.A)},
            {"B", detail::matrix_to_json(m.B)},
            {"C", detail::matrix_to_json(m.C)},
            {"trace",
             {{"fit", trace.fit},
              {"iterations_run", trace.iterations_run},
              {"converged", trace.converged},
              {"tolerance", trace.tolerance},
              {"max_iterations", trace.max_iterations}}}};
}

inline FactorModel model_from_json(const json& j) {
    FactorModel m;
    m.rank = j.at("rank").get<int>();
    m.A = detail::matrix_from_json(j.at("A"));
    m.B = detail::matrix_from_json(j.at("B"));
    m.C = detail::matrix_from_json(j.at("C"));
    const auto weights = j.at("weights").get<std::vector<double>>();
    m.weights = Eigen::Map<const Vector>(weights.data(), static_cast<Eigen::Index>(weights.size()));
    if (m.A.cols() != m.rank || m.B.cols() != m.rank || m.C.cols() != m.rank ||
        m.weights.size() != m.rank)
        throw ParseError("model: rank/column mismatch");
    return m;
}

inline json prism_report_to_json(const std::vector<FactorPrismReport>& reports,
                                 const AxisMaps& maps) {
    json factors = json::array();
    for (const auto& report : reports) {
        const auto& g = report.groups;
        const auto labels_for = [](const std::vector<bool>& mask,
                                   const std::vector<std::string>& labels) {
            std::vector<std::string> out;
            for (std::size_t i = 0; i < mask.size(); ++i)
                if (mask[i]) out.push_back(labels[i]);
            return out;
        };
        json subsequences = json::array();
        for (const auto& cs : report.subsequences) {
            subsequences.push_back({{"ngram", cs.ngram},
                                    {"in_support", cs.in_support},
                                    {"out_support", cs.out_support},
                                    {"in_total", cs.in_total},
                                    {"out_total", cs.out_total},
                                    {"in_proportion", cs.in_proportion},
                                    {"out_proportion", cs.out_proportion},
                                    {"delta_theta_mean", cs.bdpt.delta_theta_mean},
                                    {"ci95", {cs.bdpt.ci_lo, cs.bdpt.ci_hi}},
                                    {"p_outside_rope", cs.bdpt.p_outside_rope},
                                    {"samples_used", cs.bdpt.samples_used}});
        }
        factors.push_back(
            {{"factor_index", g.factor_index},
             {"degenerate", report.degenerate},
             {"modes",
              {{"vehicle",
                {{"degenerate", g.vehicle_degenerate},
                 {"posterior_means", {g.vehicle_means[0], g.vehicle_means[1]}},
                 {"in_group", labels_for(g.vehicle_mask, maps.vehicles)}}},
               {"system",
                {{"degenerate", g.system_degenerate},
                 {"posterior_means", {g.system_means[0], g.system_means[1]}},
                 {"in_group", labels_for(g.system_mask, maps.systems)}}},
               {"time",
                {{"degenerate", g.time_degenerate},
                 {"posterior_means", {g.time_means[0], g.time_means[1]}},
                 {"in_group", labels_for(g.time_mask, maps.time_bins)}}}}},
             {"characteristic_subsequences", std::move(subsequences)}});
    }
    return {{"factors", std::move(factors)}};
}

inline void write_dsm_csv(std::ostream& os, const std::vector<std::pair<int, DsmResult>>& rows) {
    csv::write_row(os, {"factor", "ngram", "i_ratio", "t_statistic", "p_value", "in_support",
                        "out_support"});
    char buf[32];
    for (const auto& [factor, r] : rows) {
        std::string ratio;
        if (std::isinf(r.i_ratio)) {
            ratio = "inf";
        } else {
            std::snprintf(buf, sizeof(buf), "%.10g", r.i_ratio);
            ratio = buf;
        }
        std::snprintf(buf, sizeof(buf), "%.10g", r.t_statistic);
        std::string t_stat = buf;
        std::snprintf(buf, sizeof(buf), "%.10g", r.p_value);
        std::string p = buf;
        csv::write_row(os, {std::to_string(factor), ngram_to_string(r.ngram), ratio, t_stat, p,
                            std::to_string(r.in_support), std::to_string(r.out_support)});
    }
}

inline void write_factor_plot_csv(std::ostream& os, const FactorPlotData& plot) {
    csv::write_row(os, {"mode", "index", "label", "loading"});
    char buf[32];
    const auto emit = [&](const char* mode, const std::vector<FactorPlotData::Point>& points) {
        for (std::size_t i = 0; i < points.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", points[i].loading);
            csv::write_row(os, {mode, std::to_string(i), points[i].label, buf});
        }
    };
    emit("vehicle", plot.vehicle);
    emit("system", plot.system);
    emit("time", plot.time);
}

inline void write_cost_series_csv(std::ostream& os, const CostSeries& series) {
    csv::write_row(os, {"month", "avg_cost_per_vehicle", "active_vehicles"});
    char buf[32];
    for (std::size_t i = 0; i < series.months.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.10g", series.values[i]);
        csv::write_row(os, {series.months[i], buf, std::to_string(series.denominators[i])});
    }
}

inline void write_cost_forecast_csv(std::ostream& os, const CostSeries& series,
                                    const RollingOriginResult& eval) {
    csv::write_row(os, {"month", "actual", "forecast_mean", "lo68", "hi68", "horizon"});
    char buf[32];
    for (const auto& step : eval.steps) {
        const auto target = static_cast<std::size_t>(step.origin + step.horizon - 1);
        std::string cells[4];
        const double vals[4] = {step.actual, step.forecast, step.lo68, step.hi68};
        for (int i = 0; i < 4; ++i) {
            std::snprintf(buf, sizeof(buf), "%.10g", vals[i]);
            cells[i] = buf;
        }
        csv::write_row(os, {series.months[target], cells[0], cells[1], cells[2], cells[3],
                            std::to_string(step.horizon)});
    }
}

inline std::vector<int> index_group_from_json(const json& j, const char* what) {
    std::vector<int> out;
    if (j.is_array()) {
        for (const auto& v : j) out.push_back(v.get<int>());
    } else if (j.is_object() && j.contains("first") && j.contains("count")) {
        const int first = j.at("first").get<int>();
        const int count = j.at("count").get<int>();
        for (int i = 0; i < count; ++i) out.push_back(first + i);
    } else {
        throw ParseError(std::string("planted spec: ") + what +
                         " must be an index array or {first, count}");
    }
    return out;
}

inline PlantedSpec planted_spec_from_json(const json& j) {
    PlantedSpec spec;
    spec.n_vehicles = j.at("n_vehicles").get<int>();
    spec.n_systems = j.at("n_systems").get<int>();
    spec.n_months = j.at("n_months").get<int>();
    spec.background_noise_rate = j.value("background_noise_rate", 0.0);
    spec.seed = j.value("seed", 0ULL);
    spec.base_year = j.value("base_year", 2015);
    spec.mean_job_cost = j.value("mean_job_cost", 150.0);
    for (const auto& f : j.value("factors", json::array())) {
        PlantedFactor factor;
        factor.vehicle_group = index_group_from_json(f.at("vehicle_group"), "vehicle_group");
        factor.system_group = index_group_from_json(f.at("system_group"), "system_group");
        factor.time_profile = f.at("time_profile").get<std::vector<double>>();
        factor.intensity = f.value("intensity", 1.0);
        spec.factors.push_back(std::move(factor));
    }
    for (const auto& g : j.value("ngrams", json::array())) {
        PlantedNgram gram;
        gram.ngram = g.at("ngram").get<std::vector<std::string>>();
        gram.in_rate = g.at("in_rate").get<double>();
        gram.out_rate = g.at("out_rate").get<double>();
        gram.factor_index = g.value("factor_index", 0);
        spec.ngrams.push_back(std::move(gram));
    }
    return spec;
}

inline json ground_truth_to_json(const GroundTruth& truth) {
    json factors = json::array();
    for (const auto& f : truth.factors) {
        factors.push_back({{"vehicle_loadings", f.vehicle_loadings},
                           {"system_loadings", f.system_loadings},
                           {"time_loadings", f.time_loadings},
                           {"vehicle_mask", f.vehicle_mask},
                           {"system_mask", f.system_mask},
                           {"time_mask", f.time_mask}});
    }
    json ngrams = json::array();
    for (const auto& g : truth.ngrams)
        ngrams.push_back({{"ngram", g.ngram},
                          {"in_rate", g.in_rate},
                          {"out_rate", g.out_rate},
                          {"factor_index", g.factor_index}});
    return {{"vehicles", truth.vehicles},
            {"systems", truth.systems},
            {"time_bins", truth.time_bins},
            {"factors", std::move(factors)},
            {"ngrams", std::move(ngrams)}};
}

inline GroundTruth ground_truth_from_json(const json& j) {
    GroundTruth truth;
    truth.vehicles = j.at("vehicles").get<std::vector<std::string>>();
    truth.systems = j.at("systems").get<std::vector<std::string>>();
    truth.time_bins = j.at("time_bins").get<std::vector<std::string>>();
    for (const auto& f : j.at("factors")) {
        GroundTruth::TrueFactor tf;
        tf.vehicle_loadings = f.at("vehicle_loadings").get<std::vector<double>>();
        tf.system_loadings = f.at("system_loadings").get<std::vector<double>>();
        tf.time_loadings = f.at("time_loadings").get<std::vector<double>>();
        tf.vehicle_mask = f.at("vehicle_mask").get<std::vector<bool>>();
        tf.system_mask = f.at("system_mask").get<std::vector<bool>>();
        tf.time_mask = f.at("time_mask").get<std::vector<bool>>();
        truth.factors.push_back(std::move(tf));
    }
    for (const auto& g : j.at("ngrams")) {
        PlantedNgram gram;
        gram.ngram = g.at("ngram").get<std::vector<std::string>>();
        gram.in_rate = g.at("in_rate").get<double>();
        gram.out_rate = g.at("out_rate").get<double>();
        gram.factor_index = g.value("factor_index", 0);
        truth.ngrams.push_back(std::move(gram));
    }
    return truth;
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return j;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
}

inline void write_json_file(const std::string& path, const json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

} // namespace fleetmine::io

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "fleetmine/cp.hpp"
#include "fleetmine/ngram.hpp"
#include "fleetmine/prism.hpp"
#include "fleetmine/records.hpp"
#include "fleetmine/rng.hpp"
#include "fleetmine/tensor.hpp"

// Schema-compatible synthetic fleets with known multilinear structure and
// planted characteristic subsequences, plus scoring of how well an analysis
// recovers what was planted. The generator is the ground-truth oracle for
// the decomposition and mining pipeline.

namespace fleetmine {

struct PlantedFactor {
    std::vector<int> vehicle_group;   // vehicle indices
    std::vector<int> system_group;    // system indices
    std::vector<double> time_profile; // length n_months, nonnegative
    double intensity = 1.0;           // mean jobs per (vehicle, system) cell at profile 1
};

struct PlantedNgram {
    NGram ngram; // system codes, e.g. {"S03", "S07", "S01"}
    double in_rate = 0.0;  // target n-gram window rate inside the factor's vehicle group
    double out_rate = 0.0; // and outside it
    int factor_index = 0;  // whose vehicle group defines "inside"
};

struct PlantedSpec {
    int n_vehicles = 0;
    int n_systems = 0;
    int n_months = 0;
    std::vector<PlantedFactor> factors;
    std::vector<PlantedNgram> ngrams;
    double background_noise_rate = 0.0; // Poisson mean per off-structure cell
    std::uint64_t seed = 0;
    int base_year = 2015;        // first month is base_year-01
    double mean_job_cost = 150.0; // USD, lognormal
};

struct GroundTruth {
    std::vector<std::string> vehicles; // unit ids in tensor axis order
    std::vector<std::string> systems;
    std::vector<std::string> time_bins;
    struct TrueFactor {
        std::vector<double> vehicle_loadings;
        std::vector<double> system_loadings;
        std::vector<double> time_loadings;
        std::vector<bool> vehicle_mask;
        std::vector<bool> system_mask;
        std::vector<bool> time_mask;
    };
    std::vector<TrueFactor> factors;
    std::vector<PlantedNgram> ngrams;
};

namespace synth_detail {

inline std::string unit_name(int i) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "V%04d", i);
    return buf;
}

inline std::string system_name(int j) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "S%02d", j);
    return buf;
}

inline void validate(const PlantedSpec& spec) {
    if (spec.n_vehicles < 1 || spec.n_systems < 1 || spec.n_months < 1)
        throw std::invalid_argument("generate_fleet: dimensions must be positive");
    for (const auto& f : spec.factors) {
        if (f.vehicle_group.empty() || f.system_group.empty())
            throw std::invalid_argument("generate_fleet: planted factor group is empty");
        if (static_cast<int>(f.time_profile.size()) != spec.n_months)
            throw std::invalid_argument("generate_fleet: time profile length != n_months");
        if (f.intensity < 0.0)
            throw std::invalid_argument("generate_fleet: negative intensity");
        for (double v : f.time_profile)
            if (v < 0.0) throw std::invalid_argument("generate_fleet: negative time profile");
        for (int v : f.vehicle_group)
            if (v < 0 || v >= spec.n_vehicles)
                throw std::invalid_argument("generate_fleet: vehicle index out of range");
        for (int s : f.system_group)
            if (s < 0 || s >= spec.n_systems)
                throw std::invalid_argument("generate_fleet: system index out of range");
    }
    double occupancy_in = 0.0, occupancy_out = 0.0;
    for (const auto& g : spec.ngrams) {
        if (g.ngram.empty()) throw std::invalid_argument("generate_fleet: empty planted n-gram");
        if (g.in_rate < 0.0 || g.in_rate > 1.0 || g.out_rate < 0.0 || g.out_rate > 1.0)
            throw std::invalid_argument("generate_fleet: n-gram rates must lie in [0, 1]");
        if (g.factor_index < 0 || g.factor_index >= static_cast<int>(spec.factors.size()))
            throw std::invalid_argument("generate_fleet: n-gram factor_index out of range");
        const auto span = static_cast<double>(g.ngram.size() - 1);
        occupancy_in += span * g.in_rate;
        occupancy_out += span * g.out_rate;
    }
    if (occupancy_in >= 1.0 || occupancy_out >= 1.0)
        throw std::invalid_argument("generate_fleet: planted n-gram rates occupy whole sequences");
    if (spec.background_noise_rate < 0.0)
        throw std::invalid_argument("generate_fleet: negative background rate");
}

inline Money lognormal_cost(rng::Engine& g, double mean_dollars) {
    // median at mean_dollars, sigma 0.5 on the log scale
    const double dollars = mean_dollars * std::exp(0.5 * rng::normal(g));
    return Money{static_cast<std::int64_t>(std::llround(std::max(dollars, 1.0) * 100.0))};
}

} // namespace synth_detail

// Expected (noise-free) count tensor of a spec: the Poisson means before
// sampling. With zero background this is exactly rank (number of factors).
inline Tensor3 expected_tensor(const PlantedSpec& spec) {
    synth_detail::validate(spec);
    Tensor3 t(static_cast<std::size_t>(spec.n_vehicles), static_cast<std::size_t>(spec.n_systems),
              static_cast<std::size_t>(spec.n_months));
    for (double& v : t.values()) v = spec.background_noise_rate;
    for (const auto& f : spec.factors)
        for (int v : f.vehicle_group)
            for (int s : f.system_group)
                for (int m = 0; m < spec.n_months; ++m)
                    t.at(static_cast<std::size_t>(v), static_cast<std::size_t>(s),
                         static_cast<std::size_t>(m)) +=
                        f.intensity * f.time_profile[static_cast<std::size_t>(m)];
    return t;
}

inline GroundTruth ground_truth_of(const PlantedSpec& spec) {
    GroundTruth truth;
    for (int i = 0; i < spec.n_vehicles; ++i)
        truth.vehicles.push_back(synth_detail::unit_name(i));
    for (int j = 0; j < spec.n_systems; ++j)
        truth.systems.push_back(synth_detail::system_name(j));
    const int base_month = spec.base_year * 12;
    for (int m = 0; m < spec.n_months; ++m) truth.time_bins.push_back(month_label(base_month + m));
    for (const auto& f : spec.factors) {
        GroundTruth::TrueFactor tf;
        tf.vehicle_loadings.assign(static_cast<std::size_t>(spec.n_vehicles), 0.0);
        tf.system_loadings.assign(static_cast<std::size_t>(spec.n_systems), 0.0);
        tf.vehicle_mask.assign(static_cast<std::size_t>(spec.n_vehicles), false);
        tf.system_mask.assign(static_cast<std::size_t>(spec.n_systems), false);
        for (int v : f.vehicle_group) {
            tf.vehicle_loadings[static_cast<std::size_t>(v)] = 1.0;
            tf.vehicle_mask[static_cast<std::size_t>(v)] = true;
        }
        for (int s : f.system_group) {
            tf.system_loadings[static_cast<std::size_t>(s)] = 1.0;
            tf.system_mask[static_cast<std::size_t>(s)] = true;
        }
        tf.time_loadings = f.time_profile;
        tf.time_mask.resize(f.time_profile.size());
        for (std::size_t m = 0; m < f.time_profile.size(); ++m)
            tf.time_mask[m] = f.time_profile[m] > 0.0;
        truth.factors.push_back(std::move(tf));
    }
    truth.ngrams = spec.ngrams;
    return truth;
}

struct GeneratedFleet {
    FleetDataset dataset;
    GroundTruth truth;
};

// Poisson-sampled jobs on the planted structure plus background, expanded to
// schema-compatible records; planted n-grams are then written over the
// per-vehicle sequences at their target window rates. Deterministic per
// seed.
inline GeneratedFleet generate_fleet(const PlantedSpec& spec) {
    synth_detail::validate(spec);
    auto engine = rng::make_engine(rng::derive_seed(spec.seed, "synthgen"));

    std::vector<VehicleRecord> vehicles;
    vehicles.reserve(static_cast<std::size_t>(spec.n_vehicles));
    for (int i = 0; i < spec.n_vehicles; ++i) {
        VehicleRecord v;
        v.unit_id = synth_detail::unit_name(i);
        v.dept_code = i < spec.n_vehicles / 2 ? "37" : "19";
        v.dept_desc = v.dept_code == "37" ? "POLICE" : "FIRE";
        v.make = i % 3 == 0 ? "FORD" : (i % 3 == 1 ? "CHEVROLET" : "DODGE");
        v.model = i % 3 == 0 ? "CROWN VICTORIA" : (i % 3 == 1 ? "IMPALA" : "CHARGER");
        v.model_year = spec.base_year - 3;
        v.purchase_cost = synth_detail::lognormal_cost(engine, 25000.0);
        v.status = VehicleStatus::Active;
        v.ltd_maint_cost = Money{0};
        v.ltd_fuel_cost = Money{0};
        vehicles.push_back(std::move(v));
    }

    // Poisson means per cell
    const Tensor3 mean = expected_tensor(spec);
    const int base_month = spec.base_year * 12;

    std::vector<MaintenanceRecord> records;
    long long job_counter = 0;
    for (int v = 0; v < spec.n_vehicles; ++v) {
        for (int s = 0; s < spec.n_systems; ++s) {
            for (int m = 0; m < spec.n_months; ++m) {
                const auto count = rng::poisson(
                    engine, mean.at(static_cast<std::size_t>(v), static_cast<std::size_t>(s),
                                    static_cast<std::size_t>(m)));
                for (std::int64_t c = 0; c < count; ++c) {
                    MaintenanceRecord r;
                    char buf[24];
                    std::snprintf(buf, sizeof(buf), "J%08lld", ++job_counter);
                    r.job_id = buf;
                    r.unit_id = synth_detail::unit_name(v);
                    std::snprintf(buf, sizeof(buf), "W%08lld", job_counter);
                    r.work_order_id = buf;
                    const int month_index = base_month + m;
                    const int day = 1 + static_cast<int>(rng::uniform01(engine) * 28.0);
                    r.completed_date = {month_index / 12, month_index % 12 + 1, day};
                    r.open_date = r.completed_date;
                    if (day > 3 && rng::uniform01(engine) < 0.5)
                        r.open_date.day = day - 1 - static_cast<int>(rng::uniform01(engine) * 2.0);
                    r.system_code = synth_detail::system_name(s);
                    r.system_desc = "System " + r.system_code;
                    r.job_reason = "B";
                    r.labor_cost = synth_detail::lognormal_cost(engine, spec.mean_job_cost);
                    r.commercial_cost = Money{0};
                    r.part_cost = rng::uniform01(engine) < 0.4
                                      ? synth_detail::lognormal_cost(engine, spec.mean_job_cost / 3.0)
                                      : Money{0};
                    r.job_cost = r.labor_cost + r.commercial_cost + r.part_cost;
                    r.odometer = 1000 + 900LL * m + job_counter % 97;
                    records.push_back(std::move(r));
                }
            }
        }
    }

    // Plant n-grams by overwriting system codes along each vehicle's
    // sequence. Injecting a length-L gram at window rate w with total
    // occupancy O = sum (L_g - 1) w_g needs per-step probability w / (1 - O).
    if (!spec.ngrams.empty()) {
        std::set<std::string> valid_codes;
        for (int j = 0; j < spec.n_systems; ++j)
            valid_codes.insert(synth_detail::system_name(j));
        for (const auto& g : spec.ngrams)
            for (const auto& code : g.ngram)
                if (!valid_codes.contains(code))
                    throw std::invalid_argument("generate_fleet: planted n-gram code " + code +
                                                " not among generated systems");

        std::map<std::string, std::vector<std::size_t>> by_unit;
        for (std::size_t i = 0; i < records.size(); ++i)
            by_unit[records[i].unit_id].push_back(i);

        for (int v = 0; v < spec.n_vehicles; ++v) {
            auto it = by_unit.find(synth_detail::unit_name(v));
            if (it == by_unit.end()) continue;
            auto& idx = it->second;
            std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
                if (records[a].completed_date != records[b].completed_date)
                    return records[a].completed_date < records[b].completed_date;
                return records[a].job_id < records[b].job_id;
            });

            std::vector<double> q(spec.ngrams.size());
            double occupancy = 0.0;
            for (std::size_t gi = 0; gi < spec.ngrams.size(); ++gi) {
                const auto& g = spec.ngrams[gi];
                const auto& group = spec.factors[static_cast<std::size_t>(g.factor_index)]
                                        .vehicle_group;
                const bool in_group = std::find(group.begin(), group.end(), v) != group.end();
                const double w = in_group ? g.in_rate : g.out_rate;
                occupancy += static_cast<double>(g.ngram.size() - 1) * w;
                q[gi] = w;
            }
            const double denom = 1.0 - occupancy;
            for (double& w : q) w /= denom;

            std::size_t pos = 0;
            while (pos < idx.size()) {
                const double u = rng::uniform01(engine);
                double acc = 0.0;
                std::size_t advanced = 0;
                for (std::size_t gi = 0; gi < spec.ngrams.size(); ++gi) {
                    acc += q[gi];
                    if (u < acc) {
                        const auto& gram = spec.ngrams[gi].ngram;
                        if (pos + gram.size() <= idx.size()) {
                            for (std::size_t k = 0; k < gram.size(); ++k) {
                                auto& r = records[idx[pos + k]];
                                r.system_code = gram[k];
                                r.system_desc = "System " + gram[k];
                            }
                            advanced = gram.size();
                        } else {
                            advanced = 1;
                        }
                        break;
                    }
                }
                pos += advanced == 0 ? 1 : advanced;
            }
        }
    }

    GeneratedFleet out;
    out.dataset = clean_and_filter(std::move(records), std::move(vehicles));
    out.truth = ground_truth_of(spec);
    return out;
}

// ARMA simulation with burn-in, integrated d times (running cumulative sum,
// so d = 1 over pure innovations is exactly their cumulative sum).
inline std::vector<double> generate_arima_series(const std::vector<double>& phi,
                                                 const std::vector<double>& theta, int d, int n,
                                                 double sigma, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("generate_arima_series: n must be >= 1");
    if (d < 0) throw std::invalid_argument("generate_arima_series: d must be >= 0");
    if (sigma < 0.0) throw std::invalid_argument("generate_arima_series: sigma must be >= 0");

    // stationarity / invertibility: companion-matrix eigenvalues inside the
    // unit circle
    const auto check_roots = [](const std::vector<double>& coeffs, const char* what) {
        if (coeffs.empty()) return;
        const auto p = static_cast<Eigen::Index>(coeffs.size());
        Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
        for (Eigen::Index i = 0; i < p; ++i) companion(0, i) = coeffs[static_cast<std::size_t>(i)];
        for (Eigen::Index i = 1; i < p; ++i) companion(i, i - 1) = 1.0;
        const auto eigenvalues = companion.eigenvalues();
        for (Eigen::Index i = 0; i < p; ++i)
            if (std::abs(eigenvalues(i)) >= 1.0 - 1e-12)
                throw std::invalid_argument(std::string("generate_arima_series: ") + what +
                                            " polynomial root on/inside unit circle");
    };
    check_roots(phi, "AR");
    check_roots(theta, "MA");

    auto engine = rng::make_engine(rng::derive_seed(seed, "arima_series"));
    const auto p = phi.size(), q = theta.size();
    const int burn = 200 + 10 * static_cast<int>(p + q);
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(n));
    std::vector<double> w_hist(p, 0.0), e_hist(q, 0.0);
    for (int t = -burn; t < n; ++t) {
        const double e = sigma * rng::normal(engine);
        double value = e;
        for (std::size_t i = 0; i < p; ++i) value += phi[i] * w_hist[i];
        for (std::size_t j = 0; j < q; ++j) value += theta[j] * e_hist[j];
        for (std::size_t i = p; i > 1; --i) w_hist[i - 1] = w_hist[i - 2];
        if (p > 0) w_hist[0] = value;
        for (std::size_t j = q; j > 1; --j) e_hist[j - 1] = e_hist[j - 2];
        if (q > 0) e_hist[0] = e;
        if (t >= 0) w.push_back(value);
    }
    for (int rep = 0; rep < d; ++rep)
        for (std::size_t t = 1; t < w.size(); ++t) w[t] += w[t - 1];
    return w;
}

struct RecoveryScore {
    struct FactorMatch {
        int truth_index = 0;
        int model_column = -1;
        double cosine = 0.0; // mean of per-mode cosines against the planted loadings
        // in-group masks vs. truth (set when a prism report is supplied)
        double vehicle_precision = 1.0, vehicle_recall = 1.0;
        double system_precision = 1.0, system_recall = 1.0;
        double time_precision = 1.0, time_recall = 1.0;
    };
    std::vector<FactorMatch> matches;
    // fraction of planted n-grams (in_rate > out_rate) present in the matched
    // factor's report; 1.0 when nothing qualifies or no report was given
    double ngram_detection_rate = 1.0;
};

namespace synth_detail {

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline std::vector<double> column_vec(const Matrix& m, int c) {
    std::vector<double> v(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) v[static_cast<std::size_t>(i)] = m(i, c);
    return v;
}

inline std::pair<double, double> precision_recall(const std::vector<bool>& predicted,
                                                  const std::vector<bool>& truth) {
    std::size_t tp = 0, pred = 0, pos = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i]) ++pred;
        if (truth[i]) ++pos;
        if (predicted[i] && truth[i]) ++tp;
    }
    const double precision =
        pred == 0 ? (pos == 0 ? 1.0 : 0.0) : static_cast<double>(tp) / static_cast<double>(pred);
    const double recall = pos == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(pos);
    return {precision, recall};
}

} // namespace synth_detail

// Greedy best-match of recovered factors to planted factors by mean
// per-mode cosine (per-mode normalization removes the decomposition's scale
// indeterminacy). With a prism report, also scores in-group masks against
// the truth masks and the planted-n-gram detection rate.
inline RecoveryScore score_recovery(const GroundTruth& truth, const FactorModel& model,
                                    const std::vector<FactorPrismReport>* prism = nullptr) {
    if (static_cast<std::size_t>(model.A.rows()) != truth.vehicles.size() ||
        static_cast<std::size_t>(model.B.rows()) != truth.systems.size() ||
        static_cast<std::size_t>(model.C.rows()) != truth.time_bins.size())
        throw std::invalid_argument("score_recovery: model/truth dimension mismatch");
    if (prism && static_cast<int>(prism->size()) != model.rank)
        throw std::invalid_argument("score_recovery: prism report count != model rank");

    RecoveryScore score;
    std::vector<bool> used(static_cast<std::size_t>(model.rank), false);
    int qualifying_ngrams = 0, found_ngrams = 0;

    for (std::size_t f = 0; f < truth.factors.size(); ++f) {
        const auto& tf = truth.factors[f];
        RecoveryScore::FactorMatch match;
        match.truth_index = static_cast<int>(f);
        for (int r = 0; r < model.rank; ++r) {
            if (used[static_cast<std::size_t>(r)]) continue;
            const double c = (synth_detail::cosine(tf.vehicle_loadings,
                                                   synth_detail::column_vec(model.A, r)) +
                              synth_detail::cosine(tf.system_loadings,
                                                   synth_detail::column_vec(model.B, r)) +
                              synth_detail::cosine(tf.time_loadings,
                                                   synth_detail::column_vec(model.C, r))) /
                             3.0;
            if (match.model_column < 0 || c > match.cosine) {
                match.model_column = r;
                match.cosine = c;
            }
        }
        if (match.model_column >= 0) used[static_cast<std::size_t>(match.model_column)] = true;

        if (prism && match.model_column >= 0) {
            const auto& report = (*prism)[static_cast<std::size_t>(match.model_column)];
            std::tie(match.vehicle_precision, match.vehicle_recall) =
                synth_detail::precision_recall(report.groups.vehicle_mask, tf.vehicle_mask);
            std::tie(match.system_precision, match.system_recall) =
                synth_detail::precision_recall(report.groups.system_mask, tf.system_mask);
            std::tie(match.time_precision, match.time_recall) =
                synth_detail::precision_recall(report.groups.time_mask, tf.time_mask);
        }
        score.matches.push_back(match);
    }

    if (prism) {
        for (const auto& g : truth.ngrams) {
            if (!(g.in_rate > g.out_rate)) continue;
            ++qualifying_ngrams;
            const auto mit =
                std::find_if(score.matches.begin(), score.matches.end(),
                             [&](const RecoveryScore::FactorMatch& m) {
                                 return m.truth_index == g.factor_index;
                             });
            if (mit == score.matches.end() || mit->model_column < 0) continue;
            const auto& report = (*prism)[static_cast<std::size_t>(mit->model_column)];
            for (const auto& cs : report.subsequences)
                if (cs.ngram == g.ngram) {
                    ++found_ngrams;
                    break;
                }
        }
        if (qualifying_ngrams > 0)
            score.ngram_detection_rate =
                static_cast<double>(found_ngrams) / static_cast<double>(qualifying_ngrams);
    }
    return score;
}

} // namespace fleetmine

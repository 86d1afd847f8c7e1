#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fleetmine/bdpt.hpp"
#include "fleetmine/bgmm.hpp"
#include "fleetmine/cp.hpp"
#include "fleetmine/ngram.hpp"
#include "fleetmine/records.hpp"
#include "fleetmine/rng.hpp"
#include "fleetmine/stats.hpp"
#include "fleetmine/tensor.hpp"

// Factor-informed sequence mining. For each decomposition factor:
//   S1 split each mode's loading vector into in/out groups (BGMM),
//   S2 mine n-grams from in-group vs. out-group vehicle sequences
//      (records optionally restricted to in-group time bins), keeping
//      n-grams that contain at least one in-group system,
//   S3 test each surviving n-gram's proportion difference with BDPT and
//      report those whose probability of practical difference clears the
//      threshold.
// A frequentist baseline (i-ratio + Welch t-test) ships alongside.

namespace fleetmine {

struct InGroupAssignment {
    int factor_index = 0;
    std::vector<bool> vehicle_mask;
    std::vector<bool> system_mask;
    std::vector<bool> time_mask;
    // Per mode: posterior means of the out/in components.
    double vehicle_means[2] = {0, 0};
    double system_means[2] = {0, 0};
    double time_means[2] = {0, 0};
    bool vehicle_degenerate = false;
    bool system_degenerate = false;
    bool time_degenerate = false;
};

struct CharacteristicSubsequence {
    int factor_index = 0;
    NGram ngram;
    std::int64_t in_support = 0;
    std::int64_t out_support = 0;
    std::int64_t in_total = 0;  // length-matched n-gram totals (the m of the test)
    std::int64_t out_total = 0; // and its out-group counterpart n
    double in_proportion = 0.0;
    double out_proportion = 0.0;
    BdptResult bdpt;
};

struct FactorPrismReport {
    InGroupAssignment groups;
    std::vector<CharacteristicSubsequence> subsequences;
    // True when the vehicle mode is degenerate; the factor is skipped.
    bool degenerate = false;
};

struct PrismOptions {
    double rope = 0.01;
    int max_len = 5;
    int draws = 4000;
    double threshold = 0.95;
    double gamma = 0.5;
    // n-grams with fewer in-group occurrences carry too little signal for a
    // useful posterior and are skipped.
    std::int64_t min_in_support = 5;
    // Restrict records to in-group time bins before mining (skipped when the
    // time mode is degenerate).
    bool restrict_time = true;
    std::uint64_t seed = 0;
};

namespace prism_detail {

// Bin index of a record under the map's time encoding; -1 if out of range.
inline int time_bin_of(const MaintenanceSequence::Item& item, const std::string& unit_id,
                       const AxisMaps& maps, const FleetDataset& ds, int base_month) {
    if (maps.encoding == TimeEncoding::AbsoluteMonth) {
        const int bin = item.completed_date.month_index() - base_month;
        return bin >= 0 && bin < static_cast<int>(maps.time_bins.size()) ? bin : -1;
    }
    const auto it = ds.vehicles.find(unit_id);
    if (it == ds.vehicles.end()) return -1;
    const int bin = item.completed_date.year - it->second.model_year;
    return bin >= 0 && bin < static_cast<int>(maps.time_bins.size()) ? bin : -1;
}

inline int base_month_of(const AxisMaps& maps) {
    if (maps.encoding != TimeEncoding::AbsoluteMonth || maps.time_bins.empty()) return 0;
    return parse_date(maps.time_bins.front() + "-01").month_index();
}

inline std::vector<double> column(const Matrix& m, int r) {
    std::vector<double> v(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) v[static_cast<std::size_t>(i)] = m(i, r);
    return v;
}

} // namespace prism_detail

inline std::vector<FactorPrismReport> prism_run(const FactorModel& model,
                                                const std::vector<MaintenanceSequence>& sequences,
                                                const AxisMaps& maps, const FleetDataset& dataset,
                                                const PrismOptions& opts = {}) {
    if (static_cast<std::size_t>(model.A.rows()) != maps.vehicles.size() ||
        static_cast<std::size_t>(model.B.rows()) != maps.systems.size() ||
        static_cast<std::size_t>(model.C.rows()) != maps.time_bins.size())
        throw std::invalid_argument("prism_run: model/axis-map dimension mismatch");

    std::map<std::string, std::size_t> vehicle_index;
    for (std::size_t i = 0; i < maps.vehicles.size(); ++i) vehicle_index[maps.vehicles[i]] = i;
    const int base_month = prism_detail::base_month_of(maps);

    std::vector<FactorPrismReport> reports;
    reports.reserve(static_cast<std::size_t>(model.rank));

    for (int r = 0; r < model.rank; ++r) {
        FactorPrismReport report;
        auto& g = report.groups;
        g.factor_index = r;

        const auto va = bgmm_in_group(prism_detail::column(model.A, r), opts.gamma, opts.seed);
        const auto vb = bgmm_in_group(prism_detail::column(model.B, r), opts.gamma, opts.seed);
        const auto vc = bgmm_in_group(prism_detail::column(model.C, r), opts.gamma, opts.seed);
        g.vehicle_mask = va.mask;
        g.system_mask = vb.mask;
        g.time_mask = vc.mask;
        g.vehicle_means[0] = va.mean_low;
        g.vehicle_means[1] = va.mean_high;
        g.system_means[0] = vb.mean_low;
        g.system_means[1] = vb.mean_high;
        g.time_means[0] = vc.mean_low;
        g.time_means[1] = vc.mean_high;
        g.vehicle_degenerate = va.degenerate;
        g.system_degenerate = vb.degenerate;
        g.time_degenerate = vc.degenerate;

        if (va.degenerate) {
            report.degenerate = true;
            reports.push_back(std::move(report));
            continue;
        }

        std::set<std::string> in_systems;
        for (std::size_t j = 0; j < maps.systems.size(); ++j)
            if (vb.mask[j]) in_systems.insert(maps.systems[j]);

        const bool restrict = opts.restrict_time && !vc.degenerate;
        std::vector<std::vector<std::string>> in_seqs, out_seqs;
        for (const auto& seq : sequences) {
            const auto vit = vehicle_index.find(seq.unit_id);
            if (vit == vehicle_index.end()) continue; // not on the tensor's vehicle axis
            std::vector<std::string> codes;
            codes.reserve(seq.items.size());
            for (const auto& item : seq.items) {
                const int bin =
                    prism_detail::time_bin_of(item, seq.unit_id, maps, dataset, base_month);
                if (bin < 0) continue;
                if (restrict && !vc.mask[static_cast<std::size_t>(bin)]) continue;
                codes.push_back(item.system_code);
            }
            if (codes.empty()) continue;
            (va.mask[vit->second] ? in_seqs : out_seqs).push_back(std::move(codes));
        }

        const NGramTable in_table = mine_ngrams(in_seqs, opts.max_len);
        const NGramTable out_table = mine_ngrams(out_seqs, opts.max_len);

        for (const auto& [ngram, count] : in_table.counts) {
            if (count < opts.min_in_support) continue;
            const bool has_in_system =
                std::any_of(ngram.begin(), ngram.end(),
                            [&](const std::string& s) { return in_systems.contains(s); });
            if (!has_in_system) continue;
            const auto len = ngram.size();
            const std::int64_t in_total = in_table.totals[len - 1];
            const std::int64_t out_total = out_table.totals[len - 1];
            if (in_total < 1 || out_total < 1) continue;
            const auto out_it = out_table.counts.find(ngram);
            const std::int64_t out_count = out_it == out_table.counts.end() ? 0 : out_it->second;

            const std::uint64_t test_seed = rng::derive_seed(
                opts.seed, "prism:" + std::to_string(r) + ":" + ngram_to_string(ngram, '|'));
            const BdptResult res =
                bdpt(count, in_total, out_count, out_total, opts.rope, opts.draws, test_seed);
            if (res.p_outside_rope < opts.threshold) continue;

            CharacteristicSubsequence cs;
            cs.factor_index = r;
            cs.ngram = ngram;
            cs.in_support = count;
            cs.out_support = out_count;
            cs.in_total = in_total;
            cs.out_total = out_total;
            cs.in_proportion = static_cast<double>(count) / static_cast<double>(in_total);
            cs.out_proportion = static_cast<double>(out_count) / static_cast<double>(out_total);
            cs.bdpt = res;
            report.subsequences.push_back(std::move(cs));
        }

        std::sort(report.subsequences.begin(), report.subsequences.end(),
                  [](const CharacteristicSubsequence& a, const CharacteristicSubsequence& b) {
                      if (a.bdpt.delta_theta_mean != b.bdpt.delta_theta_mean)
                          return a.bdpt.delta_theta_mean > b.bdpt.delta_theta_mean;
                      return a.ngram < b.ngram;
                  });
        reports.push_back(std::move(report));
    }
    return reports;
}

struct DsmResult {
    NGram ngram;
    double i_ratio = 0.0; // +infinity when the out-group support is zero
    double t_statistic = 0.0;
    double p_value = 1.0;
    std::int64_t in_support = 0;
    std::int64_t out_support = 0;
};

// Frequentist differential sequence mining over the in-group's n-grams:
// i-ratio of normalized proportions plus a Welch t-test on per-sequence
// occurrence rates. Results are ranked by i-ratio descending, +infinity
// first.
inline std::vector<DsmResult> dsm_baseline(const std::vector<std::vector<std::string>>& in_seqs,
                                           const std::vector<std::vector<std::string>>& out_seqs,
                                           int max_len = 5) {
    if (in_seqs.empty() || out_seqs.empty())
        throw std::invalid_argument("dsm_baseline: both groups must be non-empty");

    const NGramTable in_table = mine_ngrams(in_seqs, max_len);
    const NGramTable out_table = mine_ngrams(out_seqs, max_len);

    const auto per_sequence_rates = [](const std::vector<std::vector<std::string>>& seqs,
                                       const NGram& g) {
        std::vector<double> rates;
        rates.reserve(seqs.size());
        const auto len = static_cast<std::int64_t>(g.size());
        for (const auto& seq : seqs) {
            const std::int64_t windows = static_cast<std::int64_t>(seq.size()) - len + 1;
            if (windows <= 0) {
                rates.push_back(0.0);
                continue;
            }
            std::int64_t hits = 0;
            for (std::int64_t s = 0; s < windows; ++s)
                if (std::equal(g.begin(), g.end(), seq.begin() + s)) ++hits;
            rates.push_back(static_cast<double>(hits) / static_cast<double>(windows));
        }
        return rates;
    };

    std::vector<DsmResult> out;
    out.reserve(in_table.counts.size());
    for (const auto& [ngram, count] : in_table.counts) {
        const auto len = ngram.size();
        const std::int64_t in_total = in_table.totals[len - 1];
        const std::int64_t out_total = out_table.totals[len - 1];
        if (in_total < 1 || out_total < 1) continue;
        const auto out_it = out_table.counts.find(ngram);
        const std::int64_t out_count = out_it == out_table.counts.end() ? 0 : out_it->second;

        DsmResult r;
        r.ngram = ngram;
        r.in_support = count;
        r.out_support = out_count;
        const double in_prop = static_cast<double>(count) / static_cast<double>(in_total);
        r.i_ratio = out_count == 0
                        ? std::numeric_limits<double>::infinity()
                        : in_prop / (static_cast<double>(out_count) / static_cast<double>(out_total));
        const auto welch =
            stats::welch_t_test(per_sequence_rates(in_seqs, ngram), per_sequence_rates(out_seqs, ngram));
        r.t_statistic = welch.t;
        r.p_value = welch.p;
        out.push_back(std::move(r));
    }

    std::sort(out.begin(), out.end(), [](const DsmResult& a, const DsmResult& b) {
        const bool a_inf = std::isinf(a.i_ratio), b_inf = std::isinf(b.i_ratio);
        if (a_inf != b_inf) return a_inf;
        if (a.i_ratio != b.i_ratio) return a.i_ratio > b.i_ratio;
        return a.ngram < b.ngram;
    });
    return out;
}

} // namespace fleetmine

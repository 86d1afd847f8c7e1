#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "fleetmine/prism.hpp"
#include "fleetmine/rng.hpp"

using namespace fleetmine;

namespace {

VehicleRecord veh(const std::string& unit, int year) {
    VehicleRecord v;
    v.unit_id = unit;
    v.dept_code = "37";
    v.make = "M";
    v.model = "X";
    v.model_year = year;
    return v;
}

MaintenanceRecord rec(const std::string& job, const std::string& unit, Date d,
                      const std::string& system) {
    MaintenanceRecord r;
    r.job_id = job;
    r.unit_id = unit;
    r.work_order_id = "w" + job;
    r.completed_date = d;
    r.open_date = d;
    r.system_code = system;
    r.labor_cost = {100};
    r.job_cost = {100};
    return r;
}

std::string unit_name(int i) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "v%02d", i);
    return buf;
}

// 40 vehicles; the first 10 are the planted in-group. Background items draw
// from {a..e}; "X Y Z" is injected at a 0.15 window rate in-group vs 0.02
// out; the control "X c d" is injected at 0.05 in both groups.
struct PlantedScenario {
    FleetDataset dataset;
    std::vector<MaintenanceSequence> sequences;
    AxisMaps maps;
    FactorModel model;
};

PlantedScenario build_scenario(std::uint64_t seed) {
    constexpr int n_vehicles = 40, n_in = 10, items_per_vehicle = 100;
    const std::vector<std::string> planted{"X", "Y", "Z"};
    const std::vector<std::string> control{"X", "c", "d"};
    const std::vector<std::string> background{"a", "b", "c", "d", "e"};
    // Per-step injection probabilities that land the target window rates.
    // Injecting a length-3 gram consumes 3 positions, so with window rates
    // w_p (planted) and w_c (control) the step occupancy is
    // D = 1 / (1 - 2 (w_p + w_c)) and q = w * D.
    const double w_ctl = 0.05;
    const double d_in = 1.0 / (1.0 - 2.0 * (0.15 + w_ctl));
    const double d_out = 1.0 / (1.0 - 2.0 * (0.02 + w_ctl));
    const double q_in = 0.15 * d_in;
    const double q_out = 0.02 * d_out;
    const double q_ctl_in = w_ctl * d_in;
    const double q_ctl_out = w_ctl * d_out;

    auto g = rng::make_engine(seed);
    std::vector<MaintenanceRecord> records;
    std::vector<VehicleRecord> vehicles;
    for (int v = 0; v < n_vehicles; ++v) {
        vehicles.push_back(veh(unit_name(v), 2012));
        const bool in_group = v < n_in;
        std::vector<std::string> codes;
        while (static_cast<int>(codes.size()) < items_per_vehicle) {
            const double u = rng::uniform01(g);
            const double q_planted = in_group ? q_in : q_out;
            const double q_ctl = in_group ? q_ctl_in : q_ctl_out;
            if (u < q_planted) {
                codes.insert(codes.end(), planted.begin(), planted.end());
            } else if (u < q_planted + q_ctl) {
                codes.insert(codes.end(), control.begin(), control.end());
            } else {
                codes.push_back(background[static_cast<std::size_t>(
                    rng::uniform01(g) * static_cast<double>(background.size()))]);
            }
        }
        codes.resize(items_per_vehicle);
        for (int p = 0; p < items_per_vehicle; ++p) {
            char job[16];
            std::snprintf(job, sizeof(job), "j%02d-%03d", v, p);
            records.push_back(rec(job, unit_name(v), {2015, 1 + p / 25, 1 + p % 25}, codes[p]));
        }
    }

    PlantedScenario s;
    s.dataset = clean_and_filter(records, vehicles);
    s.sequences = extract_sequences(s.dataset);
    auto build = build_tensor(s.dataset, TimeEncoding::AbsoluteMonth);
    s.maps = build.maps;

    const auto I = static_cast<Eigen::Index>(s.maps.vehicles.size());
    const auto J = static_cast<Eigen::Index>(s.maps.systems.size());
    const auto K = static_cast<Eigen::Index>(s.maps.time_bins.size());
    s.model.rank = 2;
    s.model.weights = Vector::Ones(2);
    s.model.A = Matrix::Constant(I, 2, 0.01);
    s.model.B = Matrix::Constant(J, 2, 0.05);
    s.model.C = Matrix::Constant(K, 2, 1.0);
    for (int v = 0; v < n_in; ++v) s.model.A(v, 0) = 1.0;
    s.model.A.col(1).setConstant(0.5); // factor 1: degenerate vehicle mode
    for (Eigen::Index j = 0; j < J; ++j)
        if (s.maps.systems[j] == "X" || s.maps.systems[j] == "Y" || s.maps.systems[j] == "Z")
            s.model.B(j, 0) = 1.0;
    return s;
}

const CharacteristicSubsequence* find_ngram(const FactorPrismReport& report, const NGram& g) {
    for (const auto& cs : report.subsequences)
        if (cs.ngram == g) return &cs;
    return nullptr;
}

} // namespace

TEST(Prism, DetectsPlantedNgramAndIgnoresControl) {
    const auto s = build_scenario(2024);
    PrismOptions opts;
    opts.seed = 11;
    const auto reports = prism_run(s.model, s.sequences, s.maps, s.dataset, opts);
    ASSERT_EQ(reports.size(), 2u);

    const auto& factor0 = reports[0];
    ASSERT_FALSE(factor0.degenerate);
    const auto* planted = find_ngram(factor0, {"X", "Y", "Z"});
    ASSERT_NE(planted, nullptr) << "planted 3-gram missing from report";
    EXPECT_GE(planted->bdpt.p_outside_rope, 0.95);
    EXPECT_GT(planted->bdpt.delta_theta_mean, 0.05);
    EXPECT_NEAR(planted->in_proportion, 0.15, 0.03);
    EXPECT_NEAR(planted->out_proportion, 0.02, 0.015);

    EXPECT_EQ(find_ngram(factor0, {"X", "c", "d"}), nullptr)
        << "equal-rate control n-gram must not be reported";

    for (const auto& cs : factor0.subsequences) {
        EXPECT_GE(cs.bdpt.p_outside_rope, opts.threshold);
        // every reported n-gram contains an in-group system
        bool has_in = false;
        for (const auto& code : cs.ngram)
            has_in |= code == "X" || code == "Y" || code == "Z";
        EXPECT_TRUE(has_in) << ngram_to_string(cs.ngram);
    }
    // sorted by posterior mean difference, descending
    for (std::size_t i = 1; i < factor0.subsequences.size(); ++i)
        EXPECT_GE(factor0.subsequences[i - 1].bdpt.delta_theta_mean,
                  factor0.subsequences[i].bdpt.delta_theta_mean);
}

TEST(Prism, DegenerateVehicleModeFlagsFactorEmpty) {
    const auto s = build_scenario(2024);
    const auto reports = prism_run(s.model, s.sequences, s.maps, s.dataset, {});
    ASSERT_EQ(reports.size(), 2u);
    EXPECT_TRUE(reports[1].degenerate);
    EXPECT_TRUE(reports[1].groups.vehicle_degenerate);
    EXPECT_TRUE(reports[1].subsequences.empty());
}

TEST(Prism, DeterministicGivenSeed) {
    const auto s = build_scenario(77);
    PrismOptions opts;
    opts.seed = 5;
    const auto r1 = prism_run(s.model, s.sequences, s.maps, s.dataset, opts);
    const auto r2 = prism_run(s.model, s.sequences, s.maps, s.dataset, opts);
    ASSERT_EQ(r1.size(), r2.size());
    ASSERT_EQ(r1[0].subsequences.size(), r2[0].subsequences.size());
    for (std::size_t i = 0; i < r1[0].subsequences.size(); ++i) {
        EXPECT_EQ(r1[0].subsequences[i].ngram, r2[0].subsequences[i].ngram);
        EXPECT_EQ(r1[0].subsequences[i].bdpt.delta_theta_mean,
                  r2[0].subsequences[i].bdpt.delta_theta_mean);
        EXPECT_EQ(r1[0].subsequences[i].bdpt.p_outside_rope,
                  r2[0].subsequences[i].bdpt.p_outside_rope);
    }
}

TEST(Prism, TimeRestrictionDropsOutOfGroupBins) {
    // Two vehicles, two months; only 2015-01 is in-group time.
    std::vector<MaintenanceRecord> records{
        rec("a1", "v00", {2015, 1, 5}, "X"), rec("a2", "v00", {2015, 2, 5}, "X"),
        rec("b1", "v01", {2015, 1, 6}, "q"), rec("b2", "v01", {2015, 2, 6}, "q"),
    };
    const auto ds = clean_and_filter(records, {veh("v00", 2012), veh("v01", 2012)});
    const auto seqs = extract_sequences(ds);
    const auto build = build_tensor(ds, TimeEncoding::AbsoluteMonth);

    FactorModel m;
    m.rank = 1;
    m.weights = Vector::Ones(1);
    m.A = Matrix::Zero(2, 1);
    m.A(0, 0) = 1.0;
    m.A(1, 0) = 0.0;
    m.B = Matrix::Zero(2, 1);
    m.B(static_cast<Eigen::Index>(build.maps.systems[0] == "X" ? 0 : 1), 0) = 1.0;
    m.C = Matrix::Zero(2, 1);
    m.C(0, 0) = 1.0; // 2015-01 in-group

    PrismOptions opts;
    opts.min_in_support = 1;
    opts.threshold = 0.0; // report everything surviving the filters
    const auto restricted = prism_run(m, seqs, build.maps, ds, opts);
    const auto* cs = find_ngram(restricted[0], {"X"});
    ASSERT_NE(cs, nullptr);
    EXPECT_EQ(cs->in_support, 1); // the 2015-02 occurrence was dropped

    opts.restrict_time = false;
    const auto unrestricted = prism_run(m, seqs, build.maps, ds, opts);
    const auto* cs2 = find_ngram(unrestricted[0], {"X"});
    ASSERT_NE(cs2, nullptr);
    EXPECT_EQ(cs2->in_support, 2);
}

TEST(Dsm, IdenticalGroupsGiveUnitRatioAndHighP) {
    const std::vector<std::vector<std::string>> group{
        {"A", "B", "C", "A"}, {"B", "B", "A"}, {"C", "A"}};
    const auto results = dsm_baseline(group, group, 3);
    ASSERT_FALSE(results.empty());
    for (const auto& r : results) {
        EXPECT_DOUBLE_EQ(r.i_ratio, 1.0);
        EXPECT_GT(r.p_value, 0.5);
    }
}

TEST(Dsm, RatioOfNormalizedProportions) {
    // in: X appears 3 times in 50 items; out: once in 50 -> i-ratio 3.
    std::vector<std::string> in_seq(50, "f"), out_seq(50, "f");
    in_seq[10] = in_seq[20] = in_seq[30] = "X";
    out_seq[25] = "X";
    const auto results = dsm_baseline({in_seq}, {out_seq}, 1);
    const DsmResult* x = nullptr;
    for (const auto& r : results)
        if (r.ngram == NGram{"X"}) x = &r;
    ASSERT_NE(x, nullptr);
    EXPECT_NEAR(x->i_ratio, 3.0, 1e-12);
}

TEST(Dsm, ExclusiveNgramGetsInfinityRankedFirst) {
    const std::vector<std::vector<std::string>> in{{"Q", "A", "B"}, {"A", "Q", "B"}};
    const std::vector<std::vector<std::string>> out{{"A", "B", "B"}, {"B", "A", "A"}};
    const auto results = dsm_baseline(in, out, 2);
    ASSERT_FALSE(results.empty());
    EXPECT_TRUE(std::isinf(results.front().i_ratio));
    bool seen_finite = false;
    for (const auto& r : results) {
        if (!std::isinf(r.i_ratio)) seen_finite = true;
        EXPECT_FALSE(seen_finite && std::isinf(r.i_ratio)) << "infinite ratio ranked after finite";
    }
}

TEST(Dsm, EmptyGroupIsError) {
    EXPECT_THROW(dsm_baseline({}, {{"A"}}), std::invalid_argument);
    EXPECT_THROW(dsm_baseline({{"A"}}, {}), std::invalid_argument);
}

TEST(Prism, LifetimeEncodingRestrictsByYearsSincePurchase) {
    // v00 purchased 2012: jobs in lifetime years 0 and 2; v01 likewise.
    std::vector<MaintenanceRecord> records{
        rec("a1", "v00", {2012, 3, 1}, "X"), rec("a2", "v00", {2014, 3, 1}, "X"),
        rec("b1", "v01", {2012, 4, 1}, "q"), rec("b2", "v01", {2014, 4, 1}, "q"),
    };
    const auto ds = clean_and_filter(records, {veh("v00", 2012), veh("v01", 2012)}, 2010);
    const auto seqs = extract_sequences(ds);
    const auto build = build_tensor(ds, TimeEncoding::LifetimeYear);
    ASSERT_EQ(build.maps.time_bins.size(), 3u);

    FactorModel m;
    m.rank = 1;
    m.weights = Vector::Ones(1);
    m.A = Matrix::Zero(2, 1);
    m.A(0, 0) = 1.0;
    m.B = Matrix::Zero(2, 1);
    m.B(static_cast<Eigen::Index>(build.maps.systems[0] == "X" ? 0 : 1), 0) = 1.0;
    m.C = Matrix::Zero(3, 1);
    m.C(0, 0) = 1.0; // only lifetime year 0 is in-group

    PrismOptions opts;
    opts.min_in_support = 1;
    opts.threshold = 0.0;
    const auto restricted = prism_run(m, seqs, build.maps, ds, opts);
    const auto* cs = find_ngram(restricted[0], {"X"});
    ASSERT_NE(cs, nullptr);
    EXPECT_EQ(cs->in_support, 1); // the year-2 job is outside the in-group bins
}

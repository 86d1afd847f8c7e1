#include <gtest/gtest.h>

#include <cmath>

#include "fleetmine/bdpt.hpp"
#include "fleetmine/ngram.hpp"
#include "fleetmine/rng.hpp"
#include "fleetmine/stats.hpp"

using namespace fleetmine;

namespace {

double beta_mean(double y, double n) { return (y + 1.0) / (n + 2.0); }

double beta_var(double y, double n) {
    const double a = y + 1.0, b = n - y + 1.0;
    return a * b / ((a + b) * (a + b) * (a + b + 1.0));
}

} // namespace

TEST(Ngram, EnumeratesAllContiguousSubsequences) {
    const auto table = mine_ngrams({{"A", "B", "A"}}, 2);
    EXPECT_EQ(table.counts.at({"A"}), 2);
    EXPECT_EQ(table.counts.at({"B"}), 1);
    EXPECT_EQ(table.counts.at({"A", "B"}), 1);
    EXPECT_EQ(table.counts.at({"B", "A"}), 1);
    EXPECT_EQ(table.totals[0], 3);
    EXPECT_EQ(table.totals[1], 2);
    EXPECT_EQ(table.counts.size(), 4u);
}

TEST(Ngram, CountsAreAdditiveAcrossSequences) {
    const auto table = mine_ngrams({{"A"}, {"A"}}, 5);
    EXPECT_EQ(table.counts.at({"A"}), 2);
    EXPECT_EQ(table.totals[0], 2);
    EXPECT_EQ(table.totals[4], 0);
}

TEST(Ngram, LongSequenceWindowCount) {
    const std::vector<std::string> seq{"a", "b", "c", "d", "e", "f"};
    const auto table = mine_ngrams({seq}, 5);
    EXPECT_EQ(table.totals[4], 2); // two distinct 5-gram positions
}

TEST(Ngram, TotalsMatchWindowFormula) {
    auto g = rng::make_engine(7);
    std::vector<std::vector<std::string>> seqs;
    for (int s = 0; s < 25; ++s) {
        std::vector<std::string> seq;
        const int t = static_cast<int>(rng::uniform01(g) * 12.0);
        for (int i = 0; i < t; ++i)
            seq.push_back(std::string(1, static_cast<char>('a' + static_cast<int>(rng::uniform01(g) * 4))));
        seqs.push_back(seq);
    }
    const int max_len = 5;
    const auto table = mine_ngrams(seqs, max_len);
    for (int len = 1; len <= max_len; ++len) {
        std::int64_t expected = 0;
        for (const auto& seq : seqs)
            expected += std::max<std::int64_t>(static_cast<std::int64_t>(seq.size()) - len + 1, 0);
        EXPECT_EQ(table.totals[len - 1], expected) << "len " << len;
        std::int64_t summed = 0;
        for (const auto& [gram, count] : table.counts)
            if (static_cast<int>(gram.size()) == len) summed += count;
        EXPECT_EQ(summed, expected) << "len " << len;
    }
}

TEST(Ngram, EmptyInputGivesEmptyTable) {
    const auto table = mine_ngrams({}, 3);
    EXPECT_TRUE(table.counts.empty());
    for (auto t : table.totals) EXPECT_EQ(t, 0);
}

TEST(Ngram, BadMaxLenIsError) {
    EXPECT_THROW(mine_ngrams({}, 0), std::invalid_argument);
}

TEST(Bdpt, AnalyticCheck30_100_10_200) {
    const auto res = bdpt(30, 100, 10, 200, 0.01, 4000, 99);
    const double mean_in = beta_mean(30, 100);   // 31/102
    const double mean_out = beta_mean(10, 200);  // 11/202
    const double se_in = std::sqrt(beta_var(30, 100) / 4000.0);
    const double se_out = std::sqrt(beta_var(10, 200) / 4000.0);
    EXPECT_NEAR(res.theta_in_mean, mean_in, 3.0 * se_in);
    EXPECT_NEAR(res.theta_out_mean, mean_out, 3.0 * se_out);
    const double se_delta = std::sqrt(beta_var(30, 100) / 4000.0 + beta_var(10, 200) / 4000.0);
    EXPECT_NEAR(res.delta_theta_mean, mean_in - mean_out, 3.0 * se_delta);
    EXPECT_GT(res.p_outside_rope, 0.999);
    EXPECT_LE(res.ci_lo, res.delta_theta_mean);
    EXPECT_GE(res.ci_hi, res.delta_theta_mean);
}

TEST(Bdpt, SymmetricDataCentersOnZero) {
    for (auto [k, n] : {std::pair{5, 50}, std::pair{40, 400}}) {
        const auto res = bdpt(k, n, k, n, 0.01, 4000, 7);
        const double se = std::sqrt(2.0 * beta_var(k, n) / 4000.0);
        EXPECT_NEAR(res.delta_theta_mean, 0.0, 3.0 * se);
        EXPECT_NEAR(res.ci_lo, -res.ci_hi, 6.0 * se);
    }
}

TEST(Bdpt, AntisymmetricUnderGroupSwap) {
    const auto fwd = bdpt(30, 100, 10, 200, 0.01, 4000, 1);
    const auto rev = bdpt(10, 200, 30, 100, 0.01, 4000, 2);
    const double se_delta =
        std::sqrt(beta_var(30, 100) / 4000.0 + beta_var(10, 200) / 4000.0);
    EXPECT_NEAR(fwd.delta_theta_mean, -rev.delta_theta_mean, 6.0 * se_delta);
    EXPECT_NEAR(fwd.p_outside_rope, rev.p_outside_rope, 0.01);
}

TEST(Bdpt, DeterministicForFixedSeed) {
    const auto a = bdpt(12, 80, 3, 90, 0.01, 4000, 42);
    const auto b = bdpt(12, 80, 3, 90, 0.01, 4000, 42);
    EXPECT_EQ(a.delta_theta_mean, b.delta_theta_mean);
    EXPECT_EQ(a.ci_lo, b.ci_lo);
    EXPECT_EQ(a.ci_hi, b.ci_hi);
    EXPECT_EQ(a.p_outside_rope, b.p_outside_rope);
}

TEST(Bdpt, POutsideRopeNonIncreasingInRope) {
    double prev = 1.1;
    for (double rope : {0.0, 0.01, 0.05, 0.1, 0.2, 0.5}) {
        const auto res = bdpt(30, 100, 20, 100, rope, 4000, 5);
        EXPECT_LE(res.p_outside_rope, prev);
        prev = res.p_outside_rope;
    }
}

TEST(Bdpt, ParameterValidation) {
    EXPECT_THROW(bdpt(5, 4, 0, 10), std::invalid_argument);   // support > total
    EXPECT_THROW(bdpt(-1, 4, 0, 10), std::invalid_argument);  // negative support
    EXPECT_THROW(bdpt(0, 0, 0, 10), std::invalid_argument);   // empty group
    EXPECT_THROW(bdpt(1, 4, 0, 10, 0.01, 1), std::invalid_argument); // too few draws
}

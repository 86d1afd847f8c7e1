#include <gtest/gtest.h>

#include <vector>

#include "fleetmine/bgmm.hpp"
#include "fleetmine/rng.hpp"

using namespace fleetmine;

namespace {

// Oracle for well-separated bimodal vectors: any threshold strictly between
// the low cluster's max and the high cluster's min yields the partition.
std::vector<bool> threshold_mask(const std::vector<double>& xs, double threshold) {
    std::vector<bool> mask(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) mask[i] = xs[i] > threshold;
    return mask;
}

// Two clusters with mean ratio >= 10x: low values near zero, high well away.
std::vector<double> bimodal_vector(std::uint64_t seed, std::size_t* n_high_out = nullptr) {
    auto g = rng::make_engine(seed);
    const std::size_t n = 20 + static_cast<std::size_t>(rng::uniform01(g) * 180);
    std::size_t n_high = 2 + static_cast<std::size_t>(rng::uniform01(g) * (n / 2 - 2));
    std::vector<double> xs(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i < n_high)
            xs[i] = rng::uniform(g, 0.8, 1.2);
        else
            xs[i] = rng::uniform(g, 0.0, 0.05);
    }
    // shuffle deterministically
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng::uniform01(g) * static_cast<double>(i));
        std::swap(xs[i - 1], xs[j]);
    }
    if (n_high_out) *n_high_out = n_high;
    return xs;
}

} // namespace

TEST(Bgmm, SeparatesNearZeroFromNonZero) {
    const std::vector<double> xs{0.0, 0.0, 0.0, 0.01, 0.9, 1.1, 0.95};
    const auto res = bgmm_in_group(xs);
    ASSERT_FALSE(res.degenerate);
    // oracle: any threshold in (0.01, 0.9) yields the same partition
    EXPECT_EQ(res.mask, threshold_mask(xs, 0.45));
}

TEST(Bgmm, AllZeroIsDegenerate) {
    const auto res = bgmm_in_group({0.0, 0.0, 0.0, 0.0});
    EXPECT_TRUE(res.degenerate);
    for (bool b : res.mask) EXPECT_FALSE(b);
}

TEST(Bgmm, AllEqualNonzeroIsDegenerate) {
    const auto res = bgmm_in_group({0.7, 0.7, 0.7});
    EXPECT_TRUE(res.degenerate);
}

TEST(Bgmm, TwoPointVector) {
    const auto res = bgmm_in_group({0.0, 1.0});
    ASSERT_FALSE(res.degenerate);
    EXPECT_FALSE(res.mask[0]);
    EXPECT_TRUE(res.mask[1]);
}

TEST(Bgmm, TooFewObservationsIsError) {
    EXPECT_THROW(bgmm_in_group({1.0}), std::invalid_argument);
    EXPECT_THROW(bgmm_in_group({}), std::invalid_argument);
}

TEST(Bgmm, InGroupMeanDominatesOutGroupMean) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto xs = bimodal_vector(seed);
        const auto res = bgmm_in_group(xs);
        ASSERT_FALSE(res.degenerate) << "seed " << seed;
        double in_sum = 0, out_sum = 0;
        std::size_t in_n = 0, out_n = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (res.mask[i]) {
                in_sum += xs[i];
                ++in_n;
            } else {
                out_sum += xs[i];
                ++out_n;
            }
        }
        ASSERT_GT(in_n, 0u);
        ASSERT_GT(out_n, 0u);
        EXPECT_GE(in_sum / in_n, out_sum / out_n);
    }
}

TEST(Bgmm, MatchesThresholdOracleOnBimodalVectors) {
    for (std::uint64_t seed = 100; seed < 140; ++seed) {
        const auto xs = bimodal_vector(seed);
        const auto res = bgmm_in_group(xs);
        ASSERT_FALSE(res.degenerate) << "seed " << seed;
        EXPECT_EQ(res.mask, threshold_mask(xs, 0.4)) << "seed " << seed;
    }
}

TEST(Bgmm, MaskInvariantUnderPositiveRescaling) {
    for (std::uint64_t seed = 200; seed < 220; ++seed) {
        const auto xs = bimodal_vector(seed);
        const auto base = bgmm_in_group(xs);
        for (double scale : {7.3e-3, 1e4}) {
            auto scaled = xs;
            for (double& x : scaled) x *= scale;
            const auto res = bgmm_in_group(scaled);
            EXPECT_EQ(res.mask, base.mask) << "seed " << seed << " scale " << scale;
            EXPECT_EQ(res.degenerate, base.degenerate);
        }
    }
}

TEST(Bgmm, GammaOutOfRangeIsError) {
    EXPECT_THROW(bgmm_in_group({0.0, 1.0}, 0.0), std::invalid_argument);
    EXPECT_THROW(bgmm_in_group({0.0, 1.0}, 1.0), std::invalid_argument);
}

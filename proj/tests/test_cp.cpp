#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fleetmine/cp.hpp"
#include "fleetmine/rng.hpp"

using namespace fleetmine;

namespace {

// Independent triple-loop oracle for reconstruction.
Tensor3 reconstruct_brute_force(const FactorModel& m) {
    Tensor3 out(m.A.rows(), m.B.rows(), m.C.rows());
    for (Eigen::Index i = 0; i < m.A.rows(); ++i)
        for (Eigen::Index j = 0; j < m.B.rows(); ++j)
            for (Eigen::Index k = 0; k < m.C.rows(); ++k) {
                double s = 0.0;
                for (int r = 0; r < m.rank; ++r)
                    s += m.weights(r) * m.A(i, r) * m.B(j, r) * m.C(k, r);
                out.at(i, j, k) = s;
            }
    return out;
}

// Independent oracle: 1 - ||X - P|| / ||X|| via the explicit residual.
double fit_direct(const Tensor3& x, const FactorModel& m) {
    const Tensor3 p = reconstruct_brute_force(m);
    double res_sq = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) {
        const double d = x.values()[n] - p.values()[n];
        res_sq += d * d;
    }
    return 1.0 - std::sqrt(res_sq) / tensor_norm(x);
}

FactorModel random_model(Eigen::Index i, Eigen::Index j, Eigen::Index k, int rank,
                         std::uint64_t seed) {
    auto g = rng::make_engine(seed);
    FactorModel m;
    m.rank = rank;
    m.weights = Vector::Ones(rank);
    const auto fill = [&](Matrix& mat, Eigen::Index rows) {
        mat.resize(rows, rank);
        for (Eigen::Index a = 0; a < rows; ++a)
            for (int b = 0; b < rank; ++b) mat(a, b) = rng::uniform01(g);
    };
    fill(m.A, i);
    fill(m.B, j);
    fill(m.C, k);
    return m;
}

Tensor3 random_tensor(std::size_t i, std::size_t j, std::size_t k, std::uint64_t seed) {
    auto g = rng::make_engine(seed);
    Tensor3 t(i, j, k);
    for (double& v : t.values()) v = rng::uniform01(g);
    return t;
}

Tensor3 rank1_tensor(const Vector& a, const Vector& b, const Vector& c) {
    Tensor3 t(a.size(), b.size(), c.size());
    for (Eigen::Index i = 0; i < a.size(); ++i)
        for (Eigen::Index j = 0; j < b.size(); ++j)
            for (Eigen::Index k = 0; k < c.size(); ++k) t.at(i, j, k) = a(i) * b(j) * c(k);
    return t;
}

} // namespace

TEST(Reconstruct, ScalarProduct) {
    FactorModel m;
    m.rank = 1;
    m.A = Matrix::Constant(1, 1, 2.0);
    m.B = Matrix::Constant(1, 1, 3.0);
    m.C = Matrix::Constant(1, 1, 5.0);
    m.weights = Vector::Ones(1);
    const auto t = reconstruct(m);
    EXPECT_DOUBLE_EQ(t.at(0, 0, 0), 30.0);
}

TEST(Reconstruct, ZeroColumnDropsOut) {
    auto m = random_model(3, 4, 2, 3, 11);
    m.A.col(1).setZero();
    auto reduced = m;
    reduced.rank = 2;
    Matrix a(3, 2), b(4, 2), c(2, 2);
    a << m.A.col(0), m.A.col(2);
    b << m.B.col(0), m.B.col(2);
    c << m.C.col(0), m.C.col(2);
    reduced.A = a;
    reduced.B = b;
    reduced.C = c;
    reduced.weights = Vector::Ones(2);
    const auto full = reconstruct(m);
    const auto less = reconstruct(reduced);
    for (std::size_t n = 0; n < full.size(); ++n)
        EXPECT_NEAR(full.values()[n], less.values()[n], 1e-14);
}

TEST(Reconstruct, MatchesBruteForceOracle) {
    const auto m = random_model(3, 4, 2, 3, 42);
    const auto fast = reconstruct(m);
    const auto slow = reconstruct_brute_force(m);
    for (std::size_t n = 0; n < fast.size(); ++n)
        EXPECT_NEAR(fast.values()[n], slow.values()[n], 1e-12);
}

TEST(FitMetric, ExactReconstructionGivesOne) {
    const auto m = random_model(4, 3, 5, 2, 7);
    const auto x = reconstruct(m);
    EXPECT_NEAR(fit_metric(x, m), 1.0, 1e-9);
}

TEST(FitMetric, HalfModelGivesHalf) {
    auto m = random_model(4, 3, 5, 2, 8);
    const auto x = reconstruct(m);
    auto half = m;
    half.weights *= 0.5;
    EXPECT_NEAR(fit_metric(x, half), 0.5, 1e-10);
}

TEST(FitMetric, MatchesDirectResidualOracle) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto x = random_tensor(4, 3, 5, 1000 + seed);
        const auto m = random_model(4, 3, 5, 3, 2000 + seed);
        EXPECT_NEAR(fit_metric(x, m), fit_direct(x, m), 1e-10) << "seed " << seed;
    }
}

TEST(FitMetric, ZeroTensorIsError) {
    const auto m = random_model(2, 2, 2, 1, 3);
    EXPECT_THROW(fit_metric(Tensor3(2, 2, 2), m), std::invalid_argument);
}

TEST(FitMetric, InvariantUnderColumnPermutation) {
    const auto x = random_tensor(4, 3, 5, 77);
    const auto m = random_model(4, 3, 5, 3, 78);
    FactorModel p = m;
    const int perm[3] = {2, 0, 1};
    for (int r = 0; r < 3; ++r) {
        p.A.col(r) = m.A.col(perm[r]);
        p.B.col(r) = m.B.col(perm[r]);
        p.C.col(r) = m.C.col(perm[r]);
        p.weights(r) = m.weights(perm[r]);
    }
    EXPECT_NEAR(fit_metric(x, m), fit_metric(x, p), 1e-12);
}

TEST(CpFit, RankOneTensorRecovered) {
    auto g = rng::make_engine(5);
    Vector a(6), b(5), c(4);
    for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = rng::uniform(g, 0.5, 1.5);
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = rng::uniform(g, 0.5, 1.5);
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = rng::uniform(g, 0.5, 1.5);
    const auto x = rank1_tensor(a, b, c);
    const auto res = cp_nmu_fit(x, 1, 1e-10, 500, 99);
    EXPECT_GE(res.trace.fit.back(), 0.999);
}

TEST(CpFit, RankZeroIsParameterError) {
    const auto x = random_tensor(2, 2, 2, 1);
    EXPECT_THROW(cp_nmu_fit(x, 0), std::invalid_argument);
    EXPECT_THROW(cp_nmu_fit(x, -3), std::invalid_argument);
}

TEST(CpFit, AllZeroTensorIsError) {
    EXPECT_THROW(cp_nmu_fit(Tensor3(2, 2, 2), 1), std::invalid_argument);
}

TEST(CpFit, NonFiniteEntryIsError) {
    Tensor3 t(2, 2, 2);
    t.at(0, 0, 0) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(cp_nmu_fit(t, 1), std::invalid_argument);
}

TEST(CpFit, FactorsStayNonnegative) {
    const auto x = random_tensor(6, 5, 4, 123);
    const auto res = cp_nmu_fit(x, 3, 1e-6, 60, 321);
    EXPECT_GE(res.model.A.minCoeff(), 0.0);
    EXPECT_GE(res.model.B.minCoeff(), 0.0);
    EXPECT_GE(res.model.C.minCoeff(), 0.0);
}

TEST(CpFit, ObjectiveNonIncreasing) {
    const auto x = random_tensor(6, 5, 4, 9);
    const double norm_x = tensor_norm(x);
    const auto res = cp_nmu_fit(x, 3, 0.0, 80, 10); // tol 0: run all iterations
    ASSERT_GE(res.trace.fit.size(), 2u);
    for (std::size_t t = 1; t < res.trace.fit.size(); ++t) {
        const double prev = std::pow((1.0 - res.trace.fit[t - 1]) * norm_x, 2);
        const double curr = std::pow((1.0 - res.trace.fit[t]) * norm_x, 2);
        EXPECT_LE(curr, prev * (1.0 + 1e-9)) << "iteration " << t;
    }
}

TEST(CpFit, SeededDeterminism) {
    const auto x = random_tensor(5, 4, 3, 55);
    const auto r1 = cp_nmu_fit(x, 2, 1e-4, 50, 777);
    const auto r2 = cp_nmu_fit(x, 2, 1e-4, 50, 777);
    EXPECT_EQ(r1.model.A, r2.model.A);
    EXPECT_EQ(r1.model.B, r2.model.B);
    EXPECT_EQ(r1.model.C, r2.model.C);
    EXPECT_EQ(r1.trace.fit, r2.trace.fit);
    const auto r3 = cp_nmu_fit(x, 2, 1e-4, 50, 778);
    EXPECT_NE(r1.model.A, r3.model.A);
}

TEST(CpFit, TraceMatchesFitMetricOfFinalModel) {
    const auto x = random_tensor(6, 5, 4, 31);
    const auto res = cp_nmu_fit(x, 2, 1e-6, 40, 32);
    EXPECT_NEAR(fit_metric(x, res.model), res.trace.fit.back(), 1e-12);
}

TEST(CpFit, RespectsIterationCap) {
    const auto x = random_tensor(5, 4, 3, 21);
    const auto res = cp_nmu_fit(x, 2, 0.0, 17, 22);
    EXPECT_EQ(res.trace.iterations_run, 17);
    EXPECT_FALSE(res.trace.converged);
    EXPECT_EQ(res.trace.max_iterations, 17);
}

TEST(ThreeWayExport, EmitsOneFilePerFactorWithMatchingLabels) {
    const auto m = random_model(3, 4, 2, 2, 60);
    AxisMaps maps;
    maps.vehicles = {"va", "vb", "vc"};
    maps.systems = {"s1", "s2", "s3", "s4"};
    maps.time_bins = {"2015-01", "2015-02"};
    const auto plots = three_way_export(m, maps);
    ASSERT_EQ(plots.size(), 2u);
    for (const auto& p : plots) {
        ASSERT_EQ(p.vehicle.size(), 3u);
        ASSERT_EQ(p.system.size(), 4u);
        ASSERT_EQ(p.time.size(), 2u);
        for (std::size_t i = 0; i < maps.vehicles.size(); ++i)
            EXPECT_EQ(p.vehicle[i].label, maps.vehicles[i]);
        for (std::size_t i = 0; i < maps.systems.size(); ++i)
            EXPECT_EQ(p.system[i].label, maps.systems[i]);
        for (std::size_t i = 0; i < maps.time_bins.size(); ++i)
            EXPECT_EQ(p.time[i].label, maps.time_bins[i]);
    }
    EXPECT_DOUBLE_EQ(plots[0].vehicle[1].loading, m.A(1, 0));
}

TEST(ThreeWayExport, DimensionMismatchIsError) {
    const auto m = random_model(3, 4, 2, 2, 61);
    AxisMaps maps;
    maps.vehicles = {"va", "vb"};
    maps.systems = {"s1", "s2", "s3", "s4"};
    maps.time_bins = {"2015-01", "2015-02"};
    EXPECT_THROW(three_way_export(m, maps), std::invalid_argument);
}

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fleetmine/rng.hpp"
#include "fleetmine/tensor.hpp"

// Nonnegative CP decomposition by multiplicative updates, minimizing
// ||X - P||^2 over nonnegative factor matrices, with the squared-norm
// goodness-of-fit 1 - sqrt(||X||^2 + ||P||^2 - 2<X,P>) / ||X||
// (algebraically 1 - ||X - P|| / ||X||).

namespace fleetmine {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Rank-R model X ~ sum_r weights[r] * A(:,r) o B(:,r) o C(:,r).
// Weights stay at 1; column scale lives in the factor matrices.
struct FactorModel {
    int rank = 0;
    Matrix A; // I x R, vehicle loadings
    Matrix B; // J x R, system loadings
    Matrix C; // K x R, time loadings
    Vector weights;
};

struct ConvergenceTrace {
    std::vector<double> fit; // goodness-of-fit after each full update cycle
    int iterations_run = 0;
    bool converged = false;
    double tolerance = 0.0;
    int max_iterations = 0;
};

namespace cp_detail {

constexpr double kDenomFloor = 1e-12;

inline Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
unfold1(const Tensor3& x) {
    return {x.values().data(), static_cast<Eigen::Index>(x.dim(0)),
            static_cast<Eigen::Index>(x.dim(1) * x.dim(2))};
}

inline Matrix unfold2(const Tensor3& x) {
    const auto I = x.dim(0), J = x.dim(1), K = x.dim(2);
    Matrix m(J, I * K);
    for (std::size_t i = 0; i < I; ++i)
        for (std::size_t j = 0; j < J; ++j)
            for (std::size_t k = 0; k < K; ++k)
                m(j, i * K + k) = x.at(i, j, k);
    return m;
}

inline Matrix unfold3(const Tensor3& x) {
    const auto I = x.dim(0), J = x.dim(1), K = x.dim(2);
    Matrix m(K, I * J);
    for (std::size_t i = 0; i < I; ++i)
        for (std::size_t j = 0; j < J; ++j)
            for (std::size_t k = 0; k < K; ++k)
                m(k, i * J + j) = x.at(i, j, k);
    return m;
}

// Row-wise Khatri-Rao: row (u * V.rows() + v) = U.row(u) .* V.row(v),
// matching the unfoldings above.
inline Matrix khatri_rao(const Matrix& u, const Matrix& v) {
    Matrix out(u.rows() * v.rows(), u.cols());
    for (Eigen::Index i = 0; i < u.rows(); ++i)
        out.middleRows(i * v.rows(), v.rows()) =
            v.array().rowwise() * u.row(i).array();
    return out;
}

// ||P||^2 via factor Gram matrices.
inline double model_norm_sq(const FactorModel& m) {
    const Matrix g = (m.A.transpose() * m.A).cwiseProduct(m.B.transpose() * m.B)
                         .cwiseProduct(m.C.transpose() * m.C);
    return m.weights.dot(g * m.weights);
}

inline void validate(const Tensor3& x) {
    bool any_positive = false;
    for (double v : x.values()) {
        if (!std::isfinite(v)) throw std::invalid_argument("tensor has non-finite entry");
        if (v < 0.0) throw std::invalid_argument("tensor has negative entry");
        if (v > 0.0) any_positive = true;
    }
    if (!any_positive) throw std::invalid_argument("all-zero tensor");
}

} // namespace cp_detail

// entry [i,j,k] = sum_r weights[r] * A(i,r) * B(j,r) * C(k,r)
inline Tensor3 reconstruct(const FactorModel& m) {
    const auto I = static_cast<std::size_t>(m.A.rows());
    const auto J = static_cast<std::size_t>(m.B.rows());
    const auto K = static_cast<std::size_t>(m.C.rows());
    Tensor3 out(I, J, K);
    const Matrix kr = cp_detail::khatri_rao(m.B, m.C); // (J*K) x R
    const Matrix p1 = (m.A * m.weights.asDiagonal()) * kr.transpose(); // I x (J*K)
    for (std::size_t i = 0; i < I; ++i)
        for (std::size_t c = 0; c < J * K; ++c)
            out.values()[i * J * K + c] = p1(static_cast<Eigen::Index>(i),
                                             static_cast<Eigen::Index>(c));
    return out;
}

// Goodness of fit of a model against a tensor, computed through the Gram
// route (never forms the reconstruction). 1 means exact.
inline double fit_metric(const Tensor3& x, const FactorModel& m) {
    if (static_cast<std::size_t>(m.A.rows()) != x.dim(0) ||
        static_cast<std::size_t>(m.B.rows()) != x.dim(1) ||
        static_cast<std::size_t>(m.C.rows()) != x.dim(2))
        throw std::invalid_argument("model/tensor dimension mismatch");
    const double norm_x = tensor_norm(x);
    if (norm_x == 0.0) throw std::invalid_argument("fit_metric: zero tensor");

    const Matrix kr = cp_detail::khatri_rao(m.B, m.C);
    const Matrix mttkrp = cp_detail::unfold1(x) * kr; // I x R
    const double inner = m.weights.dot(m.A.cwiseProduct(mttkrp).colwise().sum().transpose());
    const double res_sq =
        std::max(norm_x * norm_x + cp_detail::model_norm_sq(m) - 2.0 * inner, 0.0);
    return 1.0 - std::sqrt(res_sq) / norm_x;
}

struct CpFitResult {
    FactorModel model;
    ConvergenceTrace trace;
};

// Multiplicative-update CP fit. Factors start from seeded uniform(0,1)
// entries rescaled so the initial reconstruction norm matches ||X||; each
// mode update multiplies by MTTKRP over a floored denominator, so entries
// stay nonnegative (zero-locking allowed). Stops when the fit change drops
// below tol or after max_iter full cycles.
inline CpFitResult cp_nmu_fit(const Tensor3& x, int rank, double tol = 1e-4,
                              int max_iter = 500, std::uint64_t seed = 0) {
    if (rank <= 0) throw std::invalid_argument("rank must be >= 1");
    if (max_iter <= 0) throw std::invalid_argument("max_iter must be >= 1");
    cp_detail::validate(x);

    const auto I = static_cast<Eigen::Index>(x.dim(0));
    const auto J = static_cast<Eigen::Index>(x.dim(1));
    const auto K = static_cast<Eigen::Index>(x.dim(2));
    const auto R = static_cast<Eigen::Index>(rank);

    FactorModel m;
    m.rank = rank;
    m.weights = Vector::Ones(R);

    auto engine = rng::make_engine(seed);
    const auto fill_uniform = [&](Matrix& mat, Eigen::Index rows) {
        mat.resize(rows, R);
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < R; ++c)
                mat(r, c) = std::max(rng::uniform01(engine), 1e-6);
    };
    fill_uniform(m.A, I);
    fill_uniform(m.B, J);
    fill_uniform(m.C, K);

    const double norm_x = tensor_norm(x);
    const double init_norm = std::sqrt(cp_detail::model_norm_sq(m));
    const double scale = std::cbrt(norm_x / init_norm);
    m.A *= scale;
    m.B *= scale;
    m.C *= scale;

    const auto x1 = cp_detail::unfold1(x);
    const Matrix x2 = cp_detail::unfold2(x);
    const Matrix x3 = cp_detail::unfold3(x);

    ConvergenceTrace trace;
    trace.tolerance = tol;
    trace.max_iterations = max_iter;

    double prev_fit = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        { // mode 1
            const Matrix kr = cp_detail::khatri_rao(m.B, m.C);
            const Matrix num = x1 * kr;
            const Matrix gram =
                (m.B.transpose() * m.B).cwiseProduct(m.C.transpose() * m.C);
            const Matrix den = (m.A * gram).cwiseMax(cp_detail::kDenomFloor);
            m.A = m.A.cwiseProduct(num.cwiseQuotient(den));
        }
        { // mode 2
            const Matrix kr = cp_detail::khatri_rao(m.A, m.C);
            const Matrix num = x2 * kr;
            const Matrix gram =
                (m.A.transpose() * m.A).cwiseProduct(m.C.transpose() * m.C);
            const Matrix den = (m.B * gram).cwiseMax(cp_detail::kDenomFloor);
            m.B = m.B.cwiseProduct(num.cwiseQuotient(den));
        }
        double inner;
        { // mode 3; its MTTKRP also gives <X,P> for the updated model
            const Matrix kr = cp_detail::khatri_rao(m.A, m.B);
            const Matrix num = x3 * kr;
            const Matrix gram =
                (m.A.transpose() * m.A).cwiseProduct(m.B.transpose() * m.B);
            const Matrix den = (m.C * gram).cwiseMax(cp_detail::kDenomFloor);
            m.C = m.C.cwiseProduct(num.cwiseQuotient(den));
            inner = m.C.cwiseProduct(num).sum();
        }

        const double res_sq = std::max(
            norm_x * norm_x + cp_detail::model_norm_sq(m) - 2.0 * inner, 0.0);
        const double fit = 1.0 - std::sqrt(res_sq) / norm_x;
        trace.fit.push_back(fit);
        trace.iterations_run = it + 1;
        if (it > 0 && std::abs(fit - prev_fit) < tol) {
            trace.converged = true;
            break;
        }
        prev_fit = fit;
    }
    return {std::move(m), std::move(trace)};
}

// Plot-ready view of one factor: loadings per mode with axis labels.
struct FactorPlotData {
    int factor_index = 0;
    struct Point {
        std::string label;
        double loading;
    };
    std::vector<Point> vehicle;
    std::vector<Point> system;
    std::vector<Point> time;
};

inline std::vector<FactorPlotData> three_way_export(const FactorModel& m, const AxisMaps& maps,
                                                    bool max_normalize = false) {
    if (static_cast<std::size_t>(m.A.rows()) != maps.vehicles.size() ||
        static_cast<std::size_t>(m.B.rows()) != maps.systems.size() ||
        static_cast<std::size_t>(m.C.rows()) != maps.time_bins.size())
        throw std::invalid_argument("model/axis-map dimension mismatch");

    std::vector<FactorPlotData> out;
    out.reserve(static_cast<std::size_t>(m.rank));
    for (int r = 0; r < m.rank; ++r) {
        FactorPlotData f;
        f.factor_index = r;
        const auto emit = [&](const Matrix& mat, const std::vector<std::string>& labels,
                              std::vector<FactorPlotData::Point>& dst) {
            double denom = 1.0;
            if (max_normalize) {
                const double mx = mat.col(r).maxCoeff();
                if (mx > 0.0) denom = mx;
            }
            dst.reserve(labels.size());
            for (std::size_t i = 0; i < labels.size(); ++i)
                dst.push_back({labels[i], mat(static_cast<Eigen::Index>(i), r) / denom});
        };
        emit(m.A, maps.vehicles, f.vehicle);
        emit(m.B, maps.systems, f.system);
        emit(m.C, maps.time_bins, f.time);
        out.push_back(std::move(f));
    }
    return out;
}

} // namespace fleetmine

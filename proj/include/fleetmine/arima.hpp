#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fleetmine/rng.hpp"

// ARIMA(p, d, q) by conditional sum of squares: difference d times, then
// minimize the sum of squared one-step residuals over intercept, AR and MA
// coefficients. Pure AR models solve by least squares; MA terms go through
// a seeded multi-start Nelder-Mead. Forecasts integrate back to the
// original scale with psi-weight variance bands.

namespace fleetmine {

struct ArimaSpec {
    int p = 0; // autoregressive terms
    int d = 0; // differencing degree
    int q = 0; // moving-average terms
};

struct ArimaFit {
    ArimaSpec spec;
    std::vector<double> ar;
    std::vector<double> ma;
    double intercept = 0.0;
    double sigma2 = 0.0;
    double aic = 0.0;
    double bic = 0.0;
    double log_likelihood = 0.0;
};

struct ForecastPoint {
    int horizon = 1;
    double mean = 0.0;
    double lo68 = 0.0; // mean -/+ one forecast standard deviation
    double hi68 = 0.0;
};

inline std::vector<double> difference_once(const std::vector<double>& x) {
    if (x.size() < 2) throw std::invalid_argument("difference: series too short");
    std::vector<double> w(x.size() - 1);
    for (std::size_t t = 0; t + 1 < x.size(); ++t) w[t] = x[t + 1] - x[t];
    return w;
}

inline std::vector<double> difference(std::vector<double> x, int d) {
    if (d < 0) throw std::invalid_argument("difference: d must be >= 0");
    for (int i = 0; i < d; ++i) x = difference_once(x);
    return x;
}

// Inverse of difference(x, d) given initials[k] = first value of the
// k-times-differenced series, k = 0..d-1.
inline std::vector<double> integrate(std::vector<double> w, const std::vector<double>& initials) {
    for (auto level = static_cast<int>(initials.size()); level > 0; --level) {
        std::vector<double> x(w.size() + 1);
        x[0] = initials[static_cast<std::size_t>(level - 1)];
        for (std::size_t t = 0; t < w.size(); ++t) x[t + 1] = x[t] + w[t];
        w = std::move(x);
    }
    return w;
}

namespace arima_detail {

// CSS residual recursion; returns the residual sum of squares over
// t = p .. n-1 (earlier residuals pinned to zero).
inline double css(const std::vector<double>& w, int p, int q, const double* params,
                  std::vector<double>* residuals_out = nullptr) {
    const auto n = static_cast<int>(w.size());
    const double c = params[0];
    const double* phi = params + 1;
    const double* theta = params + 1 + p;
    std::vector<double> e(static_cast<std::size_t>(n), 0.0);
    double ss = 0.0;
    for (int t = p; t < n; ++t) {
        double pred = c;
        for (int i = 1; i <= p; ++i) pred += phi[i - 1] * w[static_cast<std::size_t>(t - i)];
        for (int j = 1; j <= q; ++j)
            if (t - j >= p) pred += theta[j - 1] * e[static_cast<std::size_t>(t - j)];
        const double resid = w[static_cast<std::size_t>(t)] - pred;
        e[static_cast<std::size_t>(t)] = resid;
        ss += resid * resid;
    }
    if (residuals_out) *residuals_out = std::move(e);
    return ss;
}

// Least-squares AR(p) + intercept fit of a differenced series.
inline std::vector<double> ols_ar(const std::vector<double>& w, int p) {
    const auto n = static_cast<int>(w.size());
    const int rows = n - p;
    Eigen::MatrixXd design(rows, p + 1);
    Eigen::VectorXd target(rows);
    for (int t = p; t < n; ++t) {
        design(t - p, 0) = 1.0;
        for (int i = 1; i <= p; ++i) design(t - p, i) = w[static_cast<std::size_t>(t - i)];
        target(t - p) = w[static_cast<std::size_t>(t)];
    }
    const Eigen::VectorXd sol = design.colPivHouseholderQr().solve(target);
    return {sol.data(), sol.data() + sol.size()};
}

// Standard Nelder-Mead on an n-dimensional objective.
inline std::vector<double> nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> start, double step, int max_iter,
                                       double* best_out) {
    const auto dim = start.size();
    std::vector<std::vector<double>> simplex(dim + 1, start);
    std::vector<double> value(dim + 1);
    for (std::size_t i = 0; i < dim; ++i) simplex[i + 1][i] += step;
    for (std::size_t i = 0; i <= dim; ++i) value[i] = f(simplex[i]);

    const auto centroid_except = [&](std::size_t skip) {
        std::vector<double> c(dim, 0.0);
        for (std::size_t i = 0; i <= dim; ++i) {
            if (i == skip) continue;
            for (std::size_t k = 0; k < dim; ++k) c[k] += simplex[i][k];
        }
        for (double& x : c) x /= static_cast<double>(dim);
        return c;
    };
    const auto blend = [&](const std::vector<double>& a, const std::vector<double>& b,
                           double coef) {
        std::vector<double> out(dim);
        for (std::size_t k = 0; k < dim; ++k) out[k] = a[k] + coef * (b[k] - a[k]);
        return out;
    };

    for (int iter = 0; iter < max_iter; ++iter) {
        std::vector<std::size_t> order(dim + 1);
        for (std::size_t i = 0; i <= dim; ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return value[a] < value[b]; });
        const std::size_t best = order[0], worst = order[dim], second_worst = order[dim - 1];
        if (std::abs(value[worst] - value[best]) <=
            1e-12 * (std::abs(value[best]) + 1e-12))
            break;

        const auto cen = centroid_except(worst);
        const auto reflected = blend(cen, simplex[worst], -1.0);
        const double fr = f(reflected);
        if (fr < value[best]) {
            const auto expanded = blend(cen, simplex[worst], -2.0);
            const double fe = f(expanded);
            simplex[worst] = fe < fr ? expanded : reflected;
            value[worst] = std::min(fe, fr);
        } else if (fr < value[second_worst]) {
            simplex[worst] = reflected;
            value[worst] = fr;
        } else {
            const auto contracted = blend(cen, simplex[worst], 0.5);
            const double fc = f(contracted);
            if (fc < value[worst]) {
                simplex[worst] = contracted;
                value[worst] = fc;
            } else {
                for (std::size_t i = 0; i <= dim; ++i) {
                    if (i == best) continue;
                    simplex[i] = blend(simplex[best], simplex[i], 0.5);
                    value[i] = f(simplex[i]);
                }
            }
        }
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i <= dim; ++i)
        if (value[i] < value[best]) best = i;
    if (best_out) *best_out = value[best];
    return simplex[best];
}

// phi(B) * (1 - B)^d expanded; returns the p + d coefficients phi* with
// sign convention x_t = c + sum phi*_i x_{t-i} + ...
inline std::vector<double> combined_ar(const std::vector<double>& ar, int d) {
    std::vector<double> poly{1.0};
    for (double phi : ar) poly.push_back(0.0);
    for (std::size_t i = 0; i < ar.size(); ++i) poly[i + 1] = -ar[i];
    for (int rep = 0; rep < d; ++rep) {
        std::vector<double> next(poly.size() + 1, 0.0);
        for (std::size_t i = 0; i < poly.size(); ++i) {
            next[i] += poly[i];
            next[i + 1] -= poly[i];
        }
        poly = std::move(next);
    }
    std::vector<double> out(poly.size() - 1);
    for (std::size_t i = 1; i < poly.size(); ++i) out[i - 1] = -poly[i];
    return out;
}

} // namespace arima_detail

inline ArimaFit arima_fit(const std::vector<double>& series, ArimaSpec spec,
                          std::uint64_t seed = 0) {
    if (spec.p < 0 || spec.d < 0 || spec.q < 0)
        throw std::invalid_argument("arima_fit: negative order");
    const auto n = static_cast<int>(series.size());
    if (n <= spec.p + spec.d + spec.q + 1)
        throw std::invalid_argument("arima_fit: series too short for spec (need > " +
                                    std::to_string(spec.p + spec.d + spec.q + 1) + " points)");
    for (double v : series)
        if (!std::isfinite(v)) throw std::invalid_argument("arima_fit: non-finite value");

    const std::vector<double> w = difference(series, spec.d);
    const int p = spec.p, q = spec.q;
    const auto nw = static_cast<int>(w.size());
    if (nw <= p + q + 1) throw std::invalid_argument("arima_fit: differenced series too short");

    std::vector<double> params(static_cast<std::size_t>(1 + p + q), 0.0);
    if (q == 0) {
        if (p == 0) {
            double m = 0.0;
            for (double v : w) m += v;
            params[0] = m / static_cast<double>(nw);
        } else {
            params = arima_detail::ols_ar(w, p);
        }
    } else {
        const auto objective = [&](const std::vector<double>& th) {
            return arima_detail::css(w, p, q, th.data());
        };
        std::vector<double> start(params.size(), 0.0);
        if (p > 0) {
            const auto ols = arima_detail::ols_ar(w, p);
            std::copy(ols.begin(), ols.end(), start.begin());
        } else {
            double m = 0.0;
            for (double v : w) m += v;
            start[0] = m / static_cast<double>(nw);
        }
        double w_scale = 0.0;
        for (double v : w) w_scale = std::max(w_scale, std::abs(v));
        if (w_scale == 0.0) w_scale = 1.0;

        double best = std::numeric_limits<double>::infinity();
        std::vector<double> best_params = start;
        auto engine = rng::make_engine(rng::derive_seed(seed, "arima_css"));
        for (int attempt = 0; attempt < 3; ++attempt) {
            std::vector<double> s = start;
            if (attempt > 0)
                for (std::size_t k = 0; k < s.size(); ++k)
                    s[k] += rng::uniform(engine, -0.2, 0.2) * (k == 0 ? w_scale * 0.1 : 1.0);
            double val;
            const auto sol = arima_detail::nelder_mead(
                objective, s, 0.1, 400 * static_cast<int>(s.size()), &val);
            if (val < best) {
                best = val;
                best_params = sol;
            }
        }
        if (!std::isfinite(best))
            throw std::runtime_error("arima_fit: CSS optimizer failed to converge (objective "
                                     "non-finite); try a simpler spec");
        params = best_params;
    }

    ArimaFit fit;
    fit.spec = spec;
    fit.intercept = params[0];
    fit.ar.assign(params.begin() + 1, params.begin() + 1 + p);
    fit.ma.assign(params.begin() + 1 + p, params.end());

    const double ss = arima_detail::css(w, p, q, params.data());
    const double n_eff = static_cast<double>(nw - p);
    fit.sigma2 = ss / n_eff;
    if (!(fit.sigma2 >= 0.0) || !std::isfinite(ss))
        throw std::runtime_error("arima_fit: residual variance is not finite");
    constexpr double two_pi = 6.283185307179586476925286766559;
    const double sigma2_floor = std::max(fit.sigma2, 1e-300);
    fit.log_likelihood = -0.5 * n_eff * (std::log(two_pi * sigma2_floor) + 1.0);
    const double k = static_cast<double>(p + q + 2); // + intercept + sigma2
    fit.aic = -2.0 * fit.log_likelihood + 2.0 * k;
    fit.bic = -2.0 * fit.log_likelihood + k * std::log(n_eff);
    return fit;
}

// Iterated forecasts from the end of `history` (the series the model was
// fit on, original scale). 68% band is +/- one forecast standard deviation
// from the psi-weight recursion.
inline std::vector<ForecastPoint> arima_forecast(const ArimaFit& fit,
                                                 const std::vector<double>& history,
                                                 int horizon) {
    if (horizon < 1) throw std::invalid_argument("arima_forecast: horizon must be >= 1");
    const int p = fit.spec.p, d = fit.spec.d, q = fit.spec.q;
    if (static_cast<int>(history.size()) < p + d + 1)
        throw std::invalid_argument("arima_forecast: history shorter than model memory");

    const std::vector<double> w = difference(history, d);
    std::vector<double> params;
    params.push_back(fit.intercept);
    params.insert(params.end(), fit.ar.begin(), fit.ar.end());
    params.insert(params.end(), fit.ma.begin(), fit.ma.end());
    std::vector<double> resid;
    arima_detail::css(w, p, q, params.data(), &resid);

    const std::vector<double> phi_star = arima_detail::combined_ar(fit.ar, d);
    const auto pd = static_cast<int>(phi_star.size());

    // extended series: history then forecasts
    std::vector<double> x = history;
    const auto n = static_cast<int>(history.size());
    std::vector<ForecastPoint> out;
    out.reserve(static_cast<std::size_t>(horizon));

    // psi weights for forecast variance
    std::vector<double> psi(static_cast<std::size_t>(horizon), 0.0);
    double var_sum = 0.0;

    for (int h = 1; h <= horizon; ++h) {
        double mean = fit.intercept;
        for (int i = 1; i <= pd; ++i) {
            const int idx = n + h - 1 - i;
            if (idx >= 0) mean += phi_star[static_cast<std::size_t>(i - 1)] *
                                  x[static_cast<std::size_t>(idx)];
        }
        for (int j = h; j <= q; ++j) {
            const int idx = static_cast<int>(w.size()) + h - 1 - j;
            if (idx >= 0 && idx < static_cast<int>(resid.size()))
                mean += fit.ma[static_cast<std::size_t>(j - 1)] *
                        resid[static_cast<std::size_t>(idx)];
        }
        x.push_back(mean);

        const int l = h - 1; // psi_0 = 1
        double psi_l = l == 0 ? 1.0 : (l <= q ? fit.ma[static_cast<std::size_t>(l - 1)] : 0.0);
        if (l > 0)
            for (int i = 1; i <= std::min(l, pd); ++i)
                psi_l += phi_star[static_cast<std::size_t>(i - 1)] *
                         psi[static_cast<std::size_t>(l - i)];
        psi[static_cast<std::size_t>(l)] = psi_l;
        var_sum += psi_l * psi_l;

        ForecastPoint pt;
        pt.horizon = h;
        pt.mean = mean;
        const double sd = std::sqrt(std::max(fit.sigma2 * var_sum, 0.0));
        pt.lo68 = mean - sd;
        pt.hi68 = mean + sd;
        out.push_back(pt);
    }
    return out;
}

struct RollingOriginResult {
    struct Step {
        int origin;      // training length used for this forecast
        int horizon;
        double forecast;
        double actual;
        double lo68;
        double hi68;
    };
    std::vector<Step> steps;
    std::map<int, double> rmse; // per horizon
};

// Fit on the first `initial` points, forecast each horizon, extend the
// training window by the next true value, refit, repeat to the series end.
inline RollingOriginResult rolling_origin_eval(const std::vector<double>& series, ArimaSpec spec,
                                               int initial = 24, std::vector<int> horizons = {1, 6},
                                               std::uint64_t seed = 0) {
    if (horizons.empty()) throw std::invalid_argument("rolling_origin_eval: no horizons");
    int max_h = 0;
    for (int h : horizons) {
        if (h < 1) throw std::invalid_argument("rolling_origin_eval: horizons must be >= 1");
        max_h = std::max(max_h, h);
    }
    const auto n = static_cast<int>(series.size());
    if (n < initial + max_h)
        throw std::invalid_argument("rolling_origin_eval: series too short (need >= " +
                                    std::to_string(initial + max_h) + " points)");

    RollingOriginResult result;
    std::map<int, std::pair<double, int>> accum; // horizon -> (sq error sum, count)
    for (int t0 = initial; t0 < n; ++t0) {
        const std::vector<double> train(series.begin(), series.begin() + t0);
        const ArimaFit fit = arima_fit(train, spec, rng::derive_seed(seed, "origin:" + std::to_string(t0)));
        const auto points = arima_forecast(fit, train, max_h);
        for (int h : horizons) {
            if (t0 + h > n) continue;
            const auto& pt = points[static_cast<std::size_t>(h - 1)];
            const double actual = series[static_cast<std::size_t>(t0 + h - 1)];
            result.steps.push_back({t0, h, pt.mean, actual, pt.lo68, pt.hi68});
            auto& [ss, count] = accum[h];
            ss += (pt.mean - actual) * (pt.mean - actual);
            ++count;
        }
    }
    for (const auto& [h, agg] : accum)
        result.rmse[h] = std::sqrt(agg.first / static_cast<double>(agg.second));
    return result;
}

// AIC-minimizing grid search over p <= max_p, q <= max_q at fixed d.
inline ArimaSpec arima_spec_search(const std::vector<double>& series, int d, int max_p = 8,
                                   int max_q = 6, std::uint64_t seed = 0) {
    ArimaSpec best{};
    double best_aic = std::numeric_limits<double>::infinity();
    bool found = false;
    for (int p = 0; p <= max_p; ++p) {
        for (int q = 0; q <= max_q; ++q) {
            const ArimaSpec spec{p, d, q};
            if (static_cast<int>(series.size()) <= p + d + q + 1) continue;
            try {
                const auto fit = arima_fit(series, spec, seed);
                if (fit.aic < best_aic) {
                    best_aic = fit.aic;
                    best = spec;
                    found = true;
                }
            } catch (const std::exception&) {
                // spec not estimable on this series; skip
            }
        }
    }
    if (!found) throw std::invalid_argument("arima_spec_search: no spec estimable");
    return best;
}

} // namespace fleetmine

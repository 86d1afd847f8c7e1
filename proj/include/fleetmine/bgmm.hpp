#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

// Two-component 1-D Gaussian mixture with a Dirichlet(gamma, gamma) prior on
// the component weights, fit by EM with MAP weight updates. Used to split a
// factor loading vector into its near-zero and non-zero members; the
// in-group is the component with the larger posterior mean.

namespace fleetmine {

struct BgmmResult {
    std::vector<bool> mask;  // in-group membership
    double mean_low = 0.0;   // posterior mean of the out-group component
    double mean_high = 0.0;  // posterior mean of the in-group component
    bool degenerate = false; // all-equal input, empty component, or means closer than 1e-8
};

// The fit is deterministic: components start at the data extremes with the
// overall variance, so the seed parameter does not influence the result; it
// is kept for interface stability with the other seeded stages.
inline BgmmResult bgmm_in_group(const std::vector<double>& loadings, double gamma = 0.5,
                                std::uint64_t /*seed*/ = 0) {
    const std::size_t n = loadings.size();
    if (n < 2) throw std::invalid_argument("bgmm_in_group: need at least 2 observations");
    if (!(gamma > 0.0) || !(gamma < 1.0))
        throw std::invalid_argument("bgmm_in_group: gamma must lie in (0, 1)");

    BgmmResult result;
    result.mask.assign(n, false);

    const auto [min_it, max_it] = std::minmax_element(loadings.begin(), loadings.end());
    const double lo = *min_it, hi = *max_it;
    const double range = hi - lo;
    if (!(range > 1e-12 * std::max(1.0, std::abs(hi)))) {
        result.degenerate = true;
        result.mean_low = result.mean_high = lo;
        return result;
    }

    double data_var = 0.0, data_mean = 0.0;
    for (double x : loadings) data_mean += x;
    data_mean /= static_cast<double>(n);
    for (double x : loadings) data_var += (x - data_mean) * (x - data_mean);
    data_var /= static_cast<double>(n);
    const double var_floor = 1e-10 * range * range;

    double mu[2] = {lo, hi};
    double var[2] = {std::max(data_var, var_floor), std::max(data_var, var_floor)};
    double pi[2] = {0.5, 0.5};

    std::vector<double> resp(n); // responsibility of the high component
    double prev_ll = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 500; ++iter) {
        // E-step
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double x = loadings[i];
            double logp[2];
            for (int c = 0; c < 2; ++c)
                logp[c] = std::log(pi[c]) - 0.5 * std::log(2.0 * M_PI * var[c]) -
                          (x - mu[c]) * (x - mu[c]) / (2.0 * var[c]);
            const double mx = std::max(logp[0], logp[1]);
            const double z = std::exp(logp[0] - mx) + std::exp(logp[1] - mx);
            resp[i] = std::exp(logp[1] - mx) / z;
            ll += mx + std::log(z);
        }
        // M-step with MAP weights: pi_c = (N_c + gamma - 1) / (n + 2 gamma - 2)
        double n1 = 0.0;
        for (double r : resp) n1 += r;
        const double n0 = static_cast<double>(n) - n1;
        const double denom = static_cast<double>(n) + 2.0 * gamma - 2.0;
        pi[0] = std::clamp((n0 + gamma - 1.0) / denom, 1e-12, 1.0 - 1e-12);
        pi[1] = std::clamp((n1 + gamma - 1.0) / denom, 1e-12, 1.0 - 1e-12);
        const double pi_sum = pi[0] + pi[1];
        pi[0] /= pi_sum;
        pi[1] /= pi_sum;

        double sum0 = 0.0, sum1 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sum1 += resp[i] * loadings[i];
            sum0 += (1.0 - resp[i]) * loadings[i];
        }
        if (n0 > 1e-12) mu[0] = sum0 / n0;
        if (n1 > 1e-12) mu[1] = sum1 / n1;
        double sq0 = 0.0, sq1 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sq1 += resp[i] * (loadings[i] - mu[1]) * (loadings[i] - mu[1]);
            sq0 += (1.0 - resp[i]) * (loadings[i] - mu[0]) * (loadings[i] - mu[0]);
        }
        var[0] = std::max(n0 > 1e-12 ? sq0 / n0 : var_floor, var_floor);
        var[1] = std::max(n1 > 1e-12 ? sq1 / n1 : var_floor, var_floor);

        if (iter > 0 && std::abs(ll - prev_ll) < 1e-8) break;
        prev_ll = ll;
    }

    const int high = mu[1] >= mu[0] ? 1 : 0;
    result.mean_high = mu[high];
    result.mean_low = mu[1 - high];

    std::size_t n_in = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r_high = high == 1 ? resp[i] : 1.0 - resp[i];
        if (r_high > 0.5) {
            result.mask[i] = true;
            ++n_in;
        }
    }
    if (n_in == 0 || n_in == n || result.mean_high - result.mean_low < 1e-8) {
        result.degenerate = true;
        result.mask.assign(n, false);
    }
    return result;
}

} // namespace fleetmine

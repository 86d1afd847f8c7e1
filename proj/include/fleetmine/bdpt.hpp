#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fleetmine/rng.hpp"
#include "fleetmine/stats.hpp"

// Bayesian difference-in-proportions test. Each group's event probability
// gets a Beta(1,1) prior over a Binomial likelihood, so the posterior is
// Beta(y + 1, n - y + 1) in closed form; paired draws from the two
// posteriors estimate delta = theta_in - theta_out and the probability that
// delta falls outside the region of practical equivalence [-rope, +rope].

namespace fleetmine {

struct BdptResult {
    double delta_theta_mean = 0.0; // posterior mean of theta_in - theta_out
    double theta_in_mean = 0.0;    // per-group posterior sample means
    double theta_out_mean = 0.0;
    double ci_lo = 0.0; // central 95% credible interval of the difference
    double ci_hi = 0.0;
    double p_outside_rope = 0.0;
    int samples_used = 0;
    std::uint64_t seed = 0;
};

inline BdptResult bdpt(std::int64_t in_support, std::int64_t in_total, std::int64_t out_support,
                       std::int64_t out_total, double rope = 0.01, int draws = 4000,
                       std::uint64_t seed = 0) {
    if (in_total < 1 || out_total < 1)
        throw std::invalid_argument("bdpt: group totals must be >= 1");
    if (in_support < 0 || out_support < 0 || in_support > in_total || out_support > out_total)
        throw std::invalid_argument("bdpt: support must lie in [0, total]");
    if (draws < 2) throw std::invalid_argument("bdpt: draws must be >= 2");
    if (rope < 0.0) throw std::invalid_argument("bdpt: rope must be >= 0");

    const double a_in = static_cast<double>(in_support) + 1.0;
    const double b_in = static_cast<double>(in_total - in_support) + 1.0;
    const double a_out = static_cast<double>(out_support) + 1.0;
    const double b_out = static_cast<double>(out_total - out_support) + 1.0;

    auto engine = rng::make_engine(seed);
    std::vector<double> delta(static_cast<std::size_t>(draws));
    double sum = 0.0, sum_in = 0.0, sum_out = 0.0;
    std::int64_t outside = 0;
    for (auto& d : delta) {
        const double theta_in = rng::beta(engine, a_in, b_in);
        const double theta_out = rng::beta(engine, a_out, b_out);
        d = theta_in - theta_out;
        sum += d;
        sum_in += theta_in;
        sum_out += theta_out;
        if (std::abs(d) > rope) ++outside;
    }

    BdptResult res;
    res.delta_theta_mean = sum / static_cast<double>(draws);
    res.theta_in_mean = sum_in / static_cast<double>(draws);
    res.theta_out_mean = sum_out / static_cast<double>(draws);
    res.ci_lo = stats::quantile(delta, 0.025);
    res.ci_hi = stats::quantile(delta, 0.975);
    res.p_outside_rope = static_cast<double>(outside) / static_cast<double>(draws);
    res.samples_used = draws;
    res.seed = seed;
    return res;
}

} // namespace fleetmine

#pragma once

// Shared statistical machinery: confidence half-widths, the Stirling
// bound on the central binomial mass, and the seeded parallel bias
// estimator every Monte Carlo experiment reports through.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <thread>
#include <vector>

#include "beacon/bigmath.hpp"
#include "beacon/rng.hpp"

namespace beacon {

// Two-sided Hoeffding half-width: sqrt(ln(2/(1-confidence)) / (2 trials)).
inline double hoeffding_halfwidth(std::uint64_t trials, double confidence) {
    if (trials < 1) throw std::invalid_argument("hoeffding_halfwidth: trials must be >= 1");
    if (!(confidence > 0.0 && confidence < 1.0))
        throw std::invalid_argument("hoeffding_halfwidth: confidence must be in (0,1)");
    return std::sqrt(std::log(2.0 / (1.0 - confidence)) / (2.0 * static_cast<double>(trials)));
}

// (e/pi) / sqrt(n), an upper bound on binomial(n, floor(n/2)) / 2^n.
inline double stirling_majority_bound(std::uint32_t n) {
    if (n < 1) throw std::invalid_argument("stirling_majority_bound: n must be >= 1");
    return (std::numbers::e / std::numbers::pi) / std::sqrt(static_cast<double>(n));
}

// The exact companion value binomial(n, floor(n/2)) / 2^n.
inline Rational central_binomial_mass(std::uint32_t n) {
    if (n < 1) throw std::invalid_argument("central_binomial_mass: n must be >= 1");
    return Rational(binomial(n, n / 2), pow_big(2, n));
}

// Two-sided normal quantile by bisection on the erf-based cdf; plenty for
// confidence levels used in reports.
inline double normal_quantile_two_sided(double confidence) {
    if (!(confidence > 0.0 && confidence < 1.0))
        throw std::invalid_argument("normal_quantile_two_sided: confidence must be in (0,1)");
    const double target = (1.0 + confidence) / 2.0;
    double lo = 0.0, hi = 10.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = (lo + hi) / 2.0;
        const double cdf = 0.5 * (1.0 + std::erf(mid / std::sqrt(2.0)));
        (cdf < target ? lo : hi) = mid;
    }
    return (lo + hi) / 2.0;
}

// Wald/Wilson-style normal-approximation half-width for a binomial share.
// Tighter than Hoeffding near p = 1/2; used where the analysis margin is
// thinner than the Hoeffding width.
inline double wilson_halfwidth(std::uint64_t ones, std::uint64_t trials, double confidence) {
    if (trials < 1) throw std::invalid_argument("wilson_halfwidth: trials must be >= 1");
    const double z = normal_quantile_two_sided(confidence);
    const double n = static_cast<double>(trials);
    const double phat = static_cast<double>(ones) / n;
    const double denom = 1.0 + z * z / n;
    const double center = phat + z * z / (2.0 * n);
    const double spread = z * std::sqrt(phat * (1.0 - phat) / n + z * z / (4.0 * n * n));
    const double lo = (center - spread) / denom;
    const double hi = (center + spread) / denom;
    return (hi - lo) / 2.0;
}

struct BiasReport {
    double estimate = 0.0;       // |empirical Pr(outcome=1) - 1/2|
    double ci_halfwidth = 0.0;   // Hoeffding half-width at `confidence`
    std::uint64_t trials = 0;
    std::uint64_t ones = 0;
    std::uint64_t seed = 0;
    double confidence = 0.95;

    double p_one() const { return static_cast<double>(ones) / static_cast<double>(trials); }
};

// Runs `trials` independent seeded trials of a {0,1} experiment and folds
// the outcomes into a BiasReport. Trials are partitioned across threads;
// each trial draws its stream from (seed, trial_index), and the merge is a
// plain sum, so the result is identical for any thread count.
template <class TrialFn>
BiasReport estimate_bias(std::uint64_t trials, std::uint64_t seed, double confidence,
                         TrialFn&& trial, unsigned jobs = 0) {
    if (trials < 1) throw std::invalid_argument("estimate_bias: trials must be >= 1");
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    jobs = static_cast<unsigned>(std::min<std::uint64_t>(jobs, trials));

    std::vector<std::uint64_t> partial(jobs, 0);
    auto worker = [&](unsigned w) {
        std::uint64_t ones = 0;
        for (std::uint64_t t = w; t < trials; t += jobs) {
            Rng rng = Rng::for_trial(seed, t);
            if (trial(rng)) ++ones;
        }
        partial[w] = ones;
    };

    if (jobs == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(jobs);
        for (unsigned w = 0; w < jobs; ++w) pool.emplace_back(worker, w);
        for (auto& th : pool) th.join();
    }

    std::uint64_t ones = 0;
    for (auto c : partial) ones += c;

    BiasReport report;
    report.trials = trials;
    report.ones = ones;
    report.seed = seed;
    report.confidence = confidence;
    report.ci_halfwidth = hoeffding_halfwidth(trials, confidence);
    report.estimate = std::abs(static_cast<double>(ones) / static_cast<double>(trials) - 0.5);
    return report;
}

}  // namespace beacon

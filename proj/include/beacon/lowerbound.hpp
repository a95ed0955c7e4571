#pragma once

// The universal lower-bound machinery: perturbed per-symbol distributions,
// the resettable sampler that embeds them, and the adversarial source that
// biases any black-box single-bit extractor. Probability arithmetic on the
// exact path is rational throughout; Monte Carlo enters only through the
// sampling-based conditional estimator.

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "beacon/bigmath.hpp"
#include "beacon/distribution.hpp"
#include "beacon/rng.hpp"
#include "beacon/words.hpp"

namespace beacon::lb {

using Extractor = std::function<int(const Word&)>;

inline constexpr std::uint64_t kSourceGuard = std::uint64_t{1} << 22;

// A per-symbol distribution whose masses all lie in [(1-p)/d, (1+p)/d].
struct PerturbedDistribution {
    std::uint32_t d = 2;
    Rational bound;                // the perturbation parameter p
    std::vector<Rational> pmf;

    void validate() const {
        if (d < 2) throw std::invalid_argument("PerturbedDistribution: alphabet size must be >= 2");
        if (bound < 0 || bound > 1)
            throw std::invalid_argument("PerturbedDistribution: bound must be in [0,1]");
        if (pmf.size() != d) throw std::invalid_argument("PerturbedDistribution: pmf must have d entries");
        const Rational lo = (1 - bound) / d;
        const Rational hi = (1 + bound) / d;
        Rational total = 0;
        for (std::size_t a = 0; a < pmf.size(); ++a) {
            if (pmf[a] < lo || pmf[a] > hi)
                throw std::invalid_argument("PerturbedDistribution: mass of symbol " + std::to_string(a) +
                                            " violates the perturbation bound");
            total += pmf[a];
        }
        if (total != 1) throw std::invalid_argument("PerturbedDistribution: masses must sum to 1");
    }
};

// Realizes a p/2-perturbed target as a reset process: draw a uniform
// symbol a, keep it with probability 1 - p + surplus[a], otherwise replace
// it with a fresh uniform symbol. surplus[a] measures how much probability
// the target gives a beyond the required minimum.
struct ResettableSampler {
    std::uint32_t d = 2;
    Rational reset_budget;           // p: per-symbol reset probability never exceeds this
    std::vector<Rational> surplus;   // one entry per symbol, each in [0, p]

    Rational keep_probability(Symbol a) const { return 1 - reset_budget + surplus.at(a); }

    void validate() const {
        if (surplus.size() != d) throw std::invalid_argument("ResettableSampler: surplus must have d entries");
        for (std::size_t a = 0; a < surplus.size(); ++a)
            if (surplus[a] < 0 || surplus[a] > reset_budget)
                throw std::invalid_argument("ResettableSampler: surplus of symbol " + std::to_string(a) +
                                            " outside [0, p]");
    }
};

inline ResettableSampler resettable_sampler(const PerturbedDistribution& target, const Rational& p) {
    target.validate();
    const Rational half = p / 2;
    const Rational lo = (1 - half) / target.d;
    const Rational hi = (1 + half) / target.d;
    for (std::size_t a = 0; a < target.pmf.size(); ++a)
        if (target.pmf[a] < lo || target.pmf[a] > hi)
            throw std::invalid_argument("resettable_sampler: target is not p/2-perturbed at symbol " +
                                        std::to_string(a));
    ResettableSampler sampler;
    sampler.d = target.d;
    sampler.reset_budget = p;
    sampler.surplus.reserve(target.d);
    for (std::uint32_t a = 0; a < target.d; ++a)
        sampler.surplus.push_back(target.pmf[a] * target.d - (1 - half));
    sampler.validate();
    return sampler;
}

// Closed-form pmf of the sampler: (1 - p/2 + surplus[c]) / d per symbol.
// Reproduces the target exactly.
inline Distribution<Rational> exact_sampler_pmf(const ResettableSampler& s) {
    s.validate();
    std::vector<Rational> pmf(s.d);
    const Rational half = s.reset_budget / 2;
    for (std::uint32_t c = 0; c < s.d; ++c) pmf[c] = (1 - half + s.surplus[c]) / s.d;
    return Distribution<Rational>(s.d, 1, std::move(pmf));
}

// The source that biases a black-box extractor: a favored half of the
// domain carries mass (1+p/6)/d^n per word, the rest (1-p/6)/d^n. The
// favored half is the lexicographically first half (by word rank) of the
// extractor's majority output class, so construction is deterministic.
struct AdversarialSource {
    Extractor extractor;
    std::uint32_t d = 2;
    std::uint32_t n = 1;
    Rational p;
    std::vector<std::uint8_t> in_favored;  // bitmap over word ranks
    int favored_label = 0;                 // output value whose preimage holds the favored set
    bool labels_swapped = false;           // true when the favored label is 1

    std::uint64_t domain_size() const { return in_favored.size(); }

    Rational mass(std::uint64_t rank) const {
        const Rational tilt = in_favored[rank] ? p / 6 : Rational(-p) / 6;
        return (1 + tilt) / Rational(BigInt(domain_size()));
    }

    // Number of favored words in the cylinder of all rank-extensions of a
    // length-`len` prefix. Prefixes fix the low digits, so members are the
    // ranks congruent to prefix_rank mod d^len.
    std::uint64_t favored_in_cylinder(std::uint64_t prefix_rank, std::uint32_t len) const {
        const std::uint64_t stride = word_count(d, len);
        std::uint64_t count = 0;
        for (std::uint64_t r = prefix_rank; r < domain_size(); r += stride) count += in_favored[r];
        return count;
    }

    // Unnormalized cylinder weight: favored words count (1+p/6), the rest
    // (1-p/6). Ratios of these weights are exact conditional masses.
    Rational cylinder_weight(std::uint64_t prefix_rank, std::uint32_t len) const {
        const std::uint64_t size = word_count(d, n - len);
        const std::uint64_t fav = favored_in_cylinder(prefix_rank, len);
        return Rational(BigInt(fav)) * (1 + p / 6) + Rational(BigInt(size - fav)) * (1 - p / 6);
    }
};

inline AdversarialSource build_adversarial_source(Extractor extractor, std::uint32_t d, std::uint32_t n,
                                                  const Rational& p) {
    if (d < 2 || d % 2 != 0)
        throw std::invalid_argument("build_adversarial_source: alphabet size must be even");
    if (n < 1) throw std::invalid_argument("build_adversarial_source: word length must be >= 1");
    if (p < 0 || p > 1) throw std::invalid_argument("build_adversarial_source: p must be in [0,1]");
    const std::uint64_t total = word_count(d, n);
    if (total > kSourceGuard)
        throw std::length_error("build_adversarial_source: d^n above enumeration guard");

    std::vector<std::uint8_t> outputs(total);
    std::uint64_t zeros = 0;
    for (std::uint64_t r = 0; r < total; ++r) {
        const int out = extractor(word_from_rank(r, d, n));
        if (out != 0 && out != 1)
            throw std::invalid_argument("build_adversarial_source: extractor must output bits");
        outputs[r] = static_cast<std::uint8_t>(out);
        zeros += out == 0;
    }

    AdversarialSource src;
    src.extractor = std::move(extractor);
    src.d = d;
    src.n = n;
    src.p = p;
    src.favored_label = 2 * zeros >= total ? 0 : 1;
    src.labels_swapped = src.favored_label == 1;
    src.in_favored.assign(total, 0);
    std::uint64_t remaining = total / 2;
    for (std::uint64_t r = 0; r < total && remaining > 0; ++r) {
        if (outputs[r] == src.favored_label) {
            src.in_favored[r] = 1;
            --remaining;
        }
    }
    return src;
}

// Exact |Pr(E(X)=0) - 1/2| by summation over the domain.
inline Rational measured_bias(const Extractor& extractor, const AdversarialSource& src) {
    Rational zero_mass = 0;
    for (std::uint64_t r = 0; r < src.domain_size(); ++r)
        if (extractor(word_from_rank(r, src.d, src.n)) == 0) zero_mass += src.mass(r);
    const Rational diff = zero_mass - frac(1, 2);
    return diff < 0 ? Rational(-diff) : diff;
}

inline Rational measured_bias(const AdversarialSource& src) { return measured_bias(src.extractor, src); }

// Exact conditional mass Pr(X_i = a | prefix) for i = |prefix| + 1.
inline Rational conditional_mass(const AdversarialSource& src, const Word& prefix, Symbol a) {
    const std::uint32_t len = static_cast<std::uint32_t>(prefix.size());
    if (len >= src.n) throw std::invalid_argument("conditional_mass: prefix already covers the word");
    if (a >= src.d) throw std::invalid_argument("conditional_mass: symbol out of alphabet");
    const std::uint64_t prefix_rank = word_rank(prefix, src.d);
    const std::uint64_t child_rank = prefix_rank + static_cast<std::uint64_t>(a) * word_count(src.d, len);
    return src.cylinder_weight(child_rank, len + 1) / src.cylinder_weight(prefix_rank, len);
}

namespace detail {
// 1 - 2q <= (1-q)/(1+q) <= (1+q)/(1-q) <= 1 + 3q for 0 < q <= 1/3.
inline bool ratio_chain_holds(const Rational& q) {
    if (!(q > 0 && q <= frac(1, 3))) return false;
    const Rational left = (1 - q) / (1 + q);
    const Rational right = (1 + q) / (1 - q);
    return 1 - 2 * q <= left && left <= right && right <= 1 + 3 * q;
}
}  // namespace detail

// True iff every conditional (X_i | prefix) of the source lies inside the
// p/2-perturbation box, checked with exact arithmetic over all prefixes.
// Also exercises the ratio-chain inequality that the construction leans on.
inline bool verify_perturbed_conditionals(const AdversarialSource& src) {
    const Rational half = src.p / 2;
    const Rational lo = (1 - half) / src.d;
    const Rational hi = (1 + half) / src.d;
    if (src.p > 0 && !detail::ratio_chain_holds(src.p / 6)) return false;
    for (std::uint32_t len = 0; len + 1 <= src.n; ++len) {
        const std::uint64_t prefixes = word_count(src.d, len);
        const std::uint64_t stride = prefixes;
        for (std::uint64_t pr = 0; pr < prefixes; ++pr) {
            const Rational parent = src.cylinder_weight(pr, len);
            for (Symbol a = 0; a < src.d; ++a) {
                const Rational child = src.cylinder_weight(pr + a * stride, len + 1);
                if (child < lo * parent || child > hi * parent) return false;
            }
        }
    }
    return true;
}

// General form over an explicit pmf, for sources that did not come out of
// build_adversarial_source.
inline bool verify_perturbed_conditionals(const Distribution<Rational>& x, const Rational& p) {
    const Rational half = p / 2;
    const Rational lo = (1 - half) / x.alphabet();
    const Rational hi = (1 + half) / x.alphabet();
    const std::uint32_t d = x.alphabet();
    const std::uint32_t n = x.length();
    auto cylinder = [&](std::uint64_t prefix_rank, std::uint32_t len) {
        const std::uint64_t stride = word_count(d, len);
        Rational total = 0;
        for (std::uint64_t r = prefix_rank; r < x.domain_size(); r += stride) total += x.mass(r);
        return total;
    };
    for (std::uint32_t len = 0; len + 1 <= n; ++len) {
        const std::uint64_t prefixes = word_count(d, len);
        for (std::uint64_t pr = 0; pr < prefixes; ++pr) {
            const Rational parent = cylinder(pr, len);
            if (parent == 0) return false;
            for (Symbol a = 0; a < d; ++a) {
                const Rational child = cylinder(pr + a * prefixes, len + 1);
                if (child < lo * parent || child > hi * parent) return false;
            }
        }
    }
    return true;
}

// Keep probability derived from a conditional-mass estimate, clamped so
// the induced reset probability never exceeds the budget p.
inline double keep_probability(double eta, std::uint32_t d, double p) {
    double surplus = eta * static_cast<double>(d) - (1.0 - p / 2.0);
    if (surplus < 0.0) surplus = 0.0;
    if (surplus > p) surplus = p;
    return 1.0 - p + surplus;
}

struct AdversaryRun {
    Word word;
    std::uint32_t resets = 0;
};

// Estimates Pr(X_i = a | prefix); receives its own rng stream so that the
// decision stream stays aligned across estimator choices.
using EtaEstimator = std::function<double(const Word& prefix, Symbol a, Rng& estimation_rng)>;

namespace detail {
inline AdversaryRun run_with_estimator(std::uint32_t d, std::uint32_t n, double p,
                                       const EtaEstimator& eta, std::uint64_t seed) {
    Rng decision = Rng::for_trial(seed, 1);
    Rng estimation = Rng::for_trial(seed, 2);
    AdversaryRun run;
    run.word.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        const Symbol a = decision.symbol(d);
        const double keep = keep_probability(eta(run.word, a, estimation), d, p);
        if (decision.next_double() < keep) {
            run.word.push_back(a);
        } else {
            ++run.resets;
            run.word.push_back(decision.symbol(d));
        }
    }
    return run;
}
}  // namespace detail

// Samples the source symbol by symbol through its resettable realization,
// using exact conditionals. Deterministic given the seed.
inline AdversaryRun run_resettable_adversary(const AdversarialSource& src, std::uint64_t seed) {
    const double p = to_double(src.p);
    EtaEstimator exact = [&src](const Word& prefix, Symbol a, Rng&) {
        return to_double(conditional_mass(src, prefix, a));
    };
    return detail::run_with_estimator(src.d, src.n, p, exact, seed);
}

// Monte Carlo estimate of Pr(X_i = a | prefix) for the simplified source
// that favors one whole output class: draw words with the given prefix,
// downweight the unfavored class by rejection, and read off the frequency
// of symbol a at the next position.
inline double estimate_conditional_mass(const Extractor& extractor, const Word& prefix, Symbol a,
                                        std::uint32_t d, std::uint32_t n, double p,
                                        std::uint64_t samples, Rng& estimation, int favored_label = 0) {
    if (samples < 1) throw std::invalid_argument("estimate_conditional_mass: samples must be >= 1");
    const std::uint32_t len = static_cast<std::uint32_t>(prefix.size());
    if (len >= n) throw std::invalid_argument("estimate_conditional_mass: prefix already covers the word");
    const double accept_unfavored = (1.0 - p / 6.0) / (1.0 + p / 6.0);
    std::uint64_t accepted = 0;
    std::uint64_t hits = 0;
    Word word(n);
    for (std::uint32_t j = 0; j < len; ++j) word[j] = prefix[j];
    for (std::uint64_t s = 0; s < samples; ++s) {
        for (std::uint32_t j = len; j < n; ++j) word[j] = estimation.symbol(d);
        if (extractor(word) != favored_label && !estimation.bernoulli(accept_unfavored)) continue;
        ++accepted;
        hits += word[len] == a;
    }
    if (accepted == 0) return 1.0 / static_cast<double>(d);
    return static_cast<double>(hits) / static_cast<double>(accepted);
}

// Single keep/reset decision as an efficient adversary would make it.
inline bool efficient_reset_decision(const Extractor& extractor, const Word& prefix, Symbol a,
                                     std::uint32_t d, std::uint32_t n, double p,
                                     std::uint64_t samples, Rng& estimation, Rng& decision,
                                     int favored_label = 0) {
    const double eta = estimate_conditional_mass(extractor, prefix, a, d, n, p, samples, estimation,
                                                 favored_label);
    return decision.next_double() < keep_probability(eta, d, p);
}

// Full word sampled with the efficient adversary's estimated conditionals.
inline AdversaryRun run_efficient_adversary(const Extractor& extractor, std::uint32_t d, std::uint32_t n,
                                            double p, std::uint64_t samples, std::uint64_t seed,
                                            int favored_label = 0) {
    EtaEstimator sampled = [&](const Word& prefix, Symbol a, Rng& estimation) {
        return estimate_conditional_mass(extractor, prefix, a, d, n, p, samples, estimation, favored_label);
    };
    return detail::run_with_estimator(d, n, p, sampled, seed);
}

}  // namespace beacon::lb

#pragma once

// Fully enumerated probability mass functions over [d]^n, the objects
// statistical distance and the exact oracles operate on. The probability
// type is a template parameter: Rational where exactness matters, double
// for Monte Carlo by-products.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "beacon/bigmath.hpp"
#include "beacon/words.hpp"

namespace beacon {

inline constexpr std::uint64_t kEnumerationGuard = std::uint64_t{1} << 24;

namespace detail {
inline bool sums_to_one(const std::vector<Rational>& pmf) {
    Rational total = 0;
    for (const auto& p : pmf) {
        if (p < 0 || p > 1) return false;
        total += p;
    }
    return total == 1;
}
inline bool sums_to_one(const std::vector<double>& pmf) {
    double total = 0.0;
    for (double p : pmf) {
        if (p < -1e-15 || p > 1.0 + 1e-12) return false;
        total += p;
    }
    return std::abs(total - 1.0) <= 1e-12;
}
}  // namespace detail

template <class P>
class Distribution {
public:
    Distribution(std::uint32_t d, std::uint32_t n, std::vector<P> pmf)
        : d_(d), n_(n), pmf_(std::move(pmf)) {
        if (d < 2) throw std::invalid_argument("Distribution: alphabet size must be >= 2");
        if (n < 1) throw std::invalid_argument("Distribution: word length must be >= 1");
        if (pmf_.size() != word_count(d, n))
            throw std::invalid_argument("Distribution: pmf must cover exactly d^n words");
        if (!detail::sums_to_one(pmf_))
            throw std::invalid_argument("Distribution: probabilities must lie in [0,1] and sum to 1");
    }

    std::uint32_t alphabet() const { return d_; }
    std::uint32_t length() const { return n_; }
    std::uint64_t domain_size() const { return pmf_.size(); }
    const std::vector<P>& pmf() const { return pmf_; }
    const P& mass(std::uint64_t rank) const { return pmf_.at(rank); }

private:
    std::uint32_t d_;
    std::uint32_t n_;
    std::vector<P> pmf_;
};

template <class P>
Distribution<P> uniform_distribution(std::uint32_t d, std::uint32_t n) {
    const std::uint64_t total = word_count(d, n);
    if (total > kEnumerationGuard) throw std::length_error("uniform_distribution: d^n above enumeration guard");
    std::vector<P> pmf(total, P(1) / P(static_cast<long long>(total)));
    return Distribution<P>(d, n, std::move(pmf));
}

template <class P>
Distribution<P> point_mass_distribution(std::uint32_t d, std::uint32_t n, std::uint64_t rank) {
    const std::uint64_t total = word_count(d, n);
    if (total > kEnumerationGuard) throw std::length_error("point_mass_distribution: d^n above enumeration guard");
    if (rank >= total) throw std::invalid_argument("point_mass_distribution: rank out of domain");
    std::vector<P> pmf(total, P(0));
    pmf[rank] = P(1);
    return Distribution<P>(d, n, std::move(pmf));
}

// Half the L1 distance between the two mass functions.
template <class P>
P statistical_distance(const Distribution<P>& x, const Distribution<P>& y) {
    if (x.alphabet() != y.alphabet() || x.length() != y.length())
        throw std::invalid_argument("statistical_distance: distributions on different domains");
    P total = 0;
    for (std::uint64_t a = 0; a < x.domain_size(); ++a) {
        const P diff = x.mass(a) - y.mass(a);
        total += diff < 0 ? P(-diff) : diff;
    }
    return total / 2;
}

// |Pr(X=0) - 1/2| for a distribution over {0,1}; coincides with the
// statistical distance to the uniform bit.
template <class P>
P binary_bias(const Distribution<P>& x) {
    if (x.alphabet() != 2 || x.length() != 1)
        throw std::invalid_argument("binary_bias: distribution is not over a single bit");
    const P diff = x.mass(0) - P(1) / P(2);
    return diff < 0 ? P(-diff) : diff;
}

}  // namespace beacon

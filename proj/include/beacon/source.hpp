#pragma once

// Non-oblivious symbol-fixing sources: k coordinates are uniform over the
// alphabet, the remaining fixed coordinates are an arbitrary function of
// them. The adversary function sees all good coordinates at once, so the
// source is non-oblivious by construction.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "beacon/distribution.hpp"
#include "beacon/words.hpp"

namespace beacon {

// Maps the values at the good coordinates (in increasing coordinate
// order) to the values at the fixed coordinates (same order).
using FixingFunction = std::function<Word(const Word&)>;

struct SymbolFixingSource {
    std::uint32_t n = 0;          // word length
    std::uint32_t k = 0;          // number of uniform coordinates
    std::uint32_t d = 2;          // alphabet size
    std::vector<std::uint32_t> fixed_set;  // 0-based coordinates controlled by the adversary
    FixingFunction adversary_fn;

    void validate() const {
        if (d < 2) throw std::invalid_argument("SymbolFixingSource: alphabet size must be >= 2");
        if (n < 1) throw std::invalid_argument("SymbolFixingSource: word length must be >= 1");
        if (fixed_set.size() != n - k)
            throw std::invalid_argument("SymbolFixingSource: fixed set must have n-k coordinates");
        std::vector<std::uint32_t> sorted = fixed_set;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            if (sorted[i] >= n) throw std::invalid_argument("SymbolFixingSource: coordinate out of range");
            if (i > 0 && sorted[i] == sorted[i - 1])
                throw std::invalid_argument("SymbolFixingSource: duplicate fixed coordinate");
        }
        if (k != n && !adversary_fn)
            throw std::invalid_argument("SymbolFixingSource: missing adversary function");
    }

    std::vector<std::uint32_t> good_coordinates() const {
        std::vector<bool> fixed(n, false);
        for (auto i : fixed_set) fixed.at(i) = true;
        std::vector<std::uint32_t> good;
        good.reserve(k);
        for (std::uint32_t i = 0; i < n; ++i)
            if (!fixed[i]) good.push_back(i);
        return good;
    }

    // Assembles a full word from good-coordinate values, consulting the
    // adversary function for the fixed coordinates.
    Word realize(const Word& good_values) const {
        const auto good = good_coordinates();
        if (good_values.size() != good.size())
            throw std::invalid_argument("SymbolFixingSource::realize: wrong number of good values");
        Word word(n);
        for (std::size_t j = 0; j < good.size(); ++j) word[good[j]] = good_values[j];
        if (!fixed_set.empty()) {
            std::vector<std::uint32_t> sorted = fixed_set;
            std::sort(sorted.begin(), sorted.end());
            const Word filled = adversary_fn(good_values);
            if (filled.size() != sorted.size())
                throw std::invalid_argument("SymbolFixingSource::realize: adversary output has wrong arity");
            for (std::size_t j = 0; j < sorted.size(); ++j) {
                if (filled[j] >= d)
                    throw std::invalid_argument("SymbolFixingSource::realize: adversary symbol out of alphabet");
                word[sorted[j]] = filled[j];
            }
        }
        return word;
    }
};

// Exact pmf of the source: each of the d^k good settings carries mass
// d^-k, placed on the word the adversary function completes.
inline Distribution<Rational> enumerate_source(const SymbolFixingSource& s) {
    s.validate();
    const std::uint64_t settings = word_count(s.d, s.k);
    if (settings > kEnumerationGuard)
        throw std::length_error("enumerate_source: d^k above enumeration guard");
    const std::uint64_t domain = word_count(s.d, s.n);
    if (domain > kEnumerationGuard)
        throw std::length_error("enumerate_source: d^n above enumeration guard");

    std::vector<Rational> pmf(domain, Rational(0));
    const Rational unit = Rational(1) / Rational(static_cast<long long>(settings));
    for (std::uint64_t g = 0; g < settings; ++g) {
        const Word word = s.realize(word_from_rank(g, s.d, s.k));
        pmf[word_rank(word, s.d)] += unit;
    }
    return Distribution<Rational>(s.d, s.n, std::move(pmf));
}

// One draw; deterministic given the rng state.
inline Word sample_source(const SymbolFixingSource& s, Rng& rng) {
    Word good(s.k);
    for (auto& v : good) v = rng.symbol(s.d);
    return s.realize(good);
}

inline Word sample_source(const SymbolFixingSource& s, std::uint64_t rng_seed) {
    Rng rng(rng_seed);
    return sample_source(s, rng);
}

}  // namespace beacon

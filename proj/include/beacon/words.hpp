#pragma once

// Words over the alphabet [d] = {0, ..., d-1}. A word of length n is a
// digit vector; digit 0 is the first symbol. Ranks are little-endian:
// rank = sum_i digit[i] * d^i, so a length-i prefix fixes rank mod d^i.

#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "beacon/rng.hpp"

namespace beacon {

using Symbol = std::uint32_t;
using Word = std::vector<Symbol>;

// d^n, guarded against 64-bit overflow.
inline std::uint64_t word_count(std::uint32_t d, std::uint32_t n) {
    if (d < 1) throw std::invalid_argument("word_count: alphabet must be nonempty");
    std::uint64_t total = 1;
    for (std::uint32_t i = 0; i < n; ++i) {
        if (total > std::numeric_limits<std::uint64_t>::max() / d)
            throw std::overflow_error("word_count: d^n exceeds 64 bits");
        total *= d;
    }
    return total;
}

inline std::uint64_t word_rank(std::span<const Symbol> word, std::uint32_t d) {
    std::uint64_t rank = 0;
    std::uint64_t place = 1;
    for (Symbol s : word) {
        if (s >= d) throw std::invalid_argument("word_rank: symbol out of alphabet");
        rank += place * s;
        place *= d;
    }
    return rank;
}

inline Word word_from_rank(std::uint64_t rank, std::uint32_t d, std::uint32_t n) {
    Word word(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        word[i] = static_cast<Symbol>(rank % d);
        rank /= d;
    }
    return word;
}

inline Word uniform_word(std::uint32_t d, std::uint32_t n, Rng& rng) {
    Word word(n);
    for (auto& s : word) s = rng.symbol(d);
    return word;
}

}  // namespace beacon

#pragma once

// Single-bit extractors for non-oblivious bit-fixing sources: the majority
// function with its analyzed parameterization, the iterated 3-ary majority,
// the LSB symbol-to-bit derivation, and exact worst-case bias oracles.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "beacon/bigmath.hpp"
#include "beacon/words.hpp"

namespace beacon::ext {

enum class ExtractorKind { majority, iterated_majority };

struct ExtractorSpec {
    ExtractorKind kind = ExtractorKind::majority;
    std::uint32_t n = 1;

    void validate() const {
        if (kind == ExtractorKind::majority) {
            if (n % 2 == 0) throw std::invalid_argument("ExtractorSpec: majority requires odd input length");
        } else {
            std::uint32_t m = n;
            while (m > 1 && m % 3 == 0) m /= 3;
            if (m != 1 || n < 3)
                throw std::invalid_argument("ExtractorSpec: iterated majority requires a power-of-3 length >= 3");
        }
    }
};

// Strict majority of an odd number of bits. Even lengths are rejected:
// the analysis assumes no ties, and a tie rule would change the bounds.
inline int majority(std::span<const int> bits) {
    if (bits.size() % 2 == 0)
        throw std::invalid_argument("majority: input length must be odd");
    std::size_t ones = 0;
    for (int b : bits) {
        if (b != 0 && b != 1) throw std::invalid_argument("majority: inputs must be bits");
        ones += static_cast<std::size_t>(b);
    }
    return 2 * ones >= bits.size() ? 1 : 0;
}

inline int majority(const std::vector<int>& bits) { return majority(std::span<const int>(bits)); }

// A uniform symbol over an even alphabet has a uniform low bit; odd
// alphabets are rejected because the low bit would be biased.
inline int lsb(Symbol symbol, std::uint32_t alphabet) {
    if (alphabet < 2 || alphabet % 2 != 0)
        throw std::invalid_argument("lsb: alphabet size must be even");
    if (symbol >= alphabet) throw std::invalid_argument("lsb: symbol out of alphabet");
    return static_cast<int>(symbol & 1u);
}

// Width of the undetermined window in the majority analysis:
// floor(epsilon * (pi/e) * sqrt(n - sqrt(n))).
inline std::uint32_t tie_window(std::uint32_t n, double epsilon) {
    if (n < 2) throw std::invalid_argument("tie_window: n must be >= 2");
    const double e_over_pi = std::numbers::e / std::numbers::pi;
    if (!(epsilon > 0.0) || epsilon > e_over_pi)
        throw std::invalid_argument("tie_window: epsilon must be in (0, e/pi]");
    const double nn = static_cast<double>(n);
    const double raw = epsilon * (std::numbers::pi / std::numbers::e) * std::sqrt(nn - std::sqrt(nn));
    return static_cast<std::uint32_t>(std::floor(raw));
}

// Same, adjusted down to the nearest even value. The even case is the one
// the tie analysis covers, so callers always get the analyzed parameter.
inline std::uint32_t even_tie_window(std::uint32_t n, double epsilon) {
    std::uint32_t w = tie_window(n, epsilon);
    if (w % 2 == 1) --w;
    return w;
}

// Recursive 3-ary majority over 3^depth input bits.
inline int iterated_majority(std::span<const int> bits) {
    std::size_t m = bits.size();
    std::uint64_t check = m;
    while (check > 1 && check % 3 == 0) check /= 3;
    if (m < 3 || check != 1)
        throw std::invalid_argument("iterated_majority: input length must be a power of 3");
    std::vector<int> level(bits.begin(), bits.end());
    for (int b : level)
        if (b != 0 && b != 1) throw std::invalid_argument("iterated_majority: inputs must be bits");
    while (level.size() > 1) {
        std::vector<int> next(level.size() / 3);
        for (std::size_t i = 0; i < next.size(); ++i) {
            const int sum = level[3 * i] + level[3 * i + 1] + level[3 * i + 2];
            next[i] = sum >= 2 ? 1 : 0;
        }
        level = std::move(next);
    }
    return level[0];
}

inline int iterated_majority(const std::vector<int>& bits) {
    return iterated_majority(std::span<const int>(bits));
}

// Exact worst-case bias of majority over n bits when an adversary controls
// c of them and sees the rest. By monotonicity the adversary's best play is
// all-0 or all-1, so the outcome flips exactly when the n-c honest bits
// leave the majority undetermined, and the bias is half that probability:
//   1/2 * Pr( Binomial(n-c, 1/2) in [ceil(n/2)-c, ceil(n/2)-1] ).
inline Rational worst_case_majority_bias(std::uint32_t n, std::uint32_t c) {
    if (n % 2 == 0) throw std::invalid_argument("worst_case_majority_bias: n must be odd");
    if (c >= n) throw std::invalid_argument("worst_case_majority_bias: controlled count must be below n");
    if (c == 0) return Rational(0);
    const std::uint32_t honest = n - c;
    const std::uint32_t upper = (n + 1) / 2 - 1;                  // ceil(n/2) - 1
    const std::uint32_t lower = (n + 1) / 2 > c ? (n + 1) / 2 - c : 0;
    BigInt undetermined = 0;
    for (std::uint32_t s = lower; s <= upper && s <= honest; ++s)
        undetermined += binomial(honest, s);
    return Rational(undetermined, 2 * pow_big(2, honest));
}

// Exact probability, over uniform honest inputs, that the first `corrupted`
// coordinates can change the extractor's output: f restricted to the honest
// setting is non-constant over the corrupted bits.
inline Rational withhold_flip_probability(std::uint32_t m, ExtractorKind kind, std::uint32_t corrupted) {
    ExtractorSpec spec{kind, m};
    spec.validate();
    if (corrupted > m) throw std::invalid_argument("withhold_flip_probability: corrupted count above arity");
    if (m > 25) throw std::length_error("withhold_flip_probability: arity above enumeration guard");
    if (corrupted == 0) return Rational(0);

    const std::uint32_t honest = m - corrupted;
    const std::uint64_t honest_settings = std::uint64_t{1} << honest;
    const std::uint64_t corrupt_settings = std::uint64_t{1} << corrupted;
    std::vector<int> bits(m);
    std::uint64_t pivotal = 0;
    for (std::uint64_t h = 0; h < honest_settings; ++h) {
        for (std::uint32_t j = 0; j < honest; ++j) bits[corrupted + j] = static_cast<int>((h >> j) & 1);
        int first = -1;
        bool varies = false;
        for (std::uint64_t a = 0; a < corrupt_settings && !varies; ++a) {
            for (std::uint32_t j = 0; j < corrupted; ++j) bits[j] = static_cast<int>((a >> j) & 1);
            const int out = kind == ExtractorKind::majority ? majority(bits) : iterated_majority(bits);
            if (first < 0) first = out;
            else if (out != first) varies = true;
        }
        if (varies) ++pivotal;
    }
    return Rational(pivotal, honest_settings);
}

}  // namespace beacon::ext

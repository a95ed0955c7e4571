#pragma once

// Exact arithmetic used by the enumeration-based oracles. Monte Carlo
// aggregates use plain doubles; everything that must be exact (source
// enumeration, worst-case bias, conditional probabilities) is rational.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>

namespace beacon {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline BigInt binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    if (k > n - k) k = n - k;
    BigInt result = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        result *= static_cast<std::uint64_t>(n - k + i);
        result /= i;
    }
    return result;
}

inline BigInt pow_big(std::uint64_t base, std::uint32_t exp) {
    BigInt result = 1;
    for (std::uint32_t i = 0; i < exp; ++i) result *= base;
    return result;
}

inline double to_double(const Rational& r) {
    return r.convert_to<double>();
}

// Exact rational from a decimal fraction like (3, 10) for 0.3. Avoids
// round-tripping constants through binary floating point.
inline Rational frac(long long num, long long den) {
    if (den == 0) throw std::invalid_argument("frac: zero denominator");
    return Rational(num, den);
}

}  // namespace beacon

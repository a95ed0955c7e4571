#pragma once

// Seedable, splittable random number generation for deterministic
// Monte Carlo experiments. Every trial gets its own stream derived from
// (seed, trial_index), so results are independent of the number of
// worker threads and of trial ordering.

#include <cstdint>
#include <cmath>
#include <stdexcept>

namespace beacon {

// SplitMix64 finalizer (Steele/Lea/Flood). Used both as a stand-alone
// stream derivation hash and to seed the main generator.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) noexcept {
    return splitmix64(splitmix64(a) ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2)));
}

// xoshiro256** by Blackman and Vigna, seeded through SplitMix64.
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept {
        std::uint64_t x = seed;
        for (auto& word : state_) {
            x = splitmix64(x);
            word = x;
        }
        // A zero state would be degenerate; splitmix64 never yields four
        // zero words from any seed, but keep the guard cheap and explicit.
        if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
    }

    // Stream for one trial of a seeded experiment.
    static Rng for_trial(std::uint64_t seed, std::uint64_t trial_index) noexcept {
        return Rng(hash_combine(seed, trial_index));
    }

    std::uint64_t next_u64() noexcept {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform double in [0, 1) with 53 random bits.
    double next_double() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) noexcept {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        return next_double() < p;
    }

    // Unbiased integer in [0, bound) by rejection.
    std::uint64_t next_below(std::uint64_t bound) {
        if (bound == 0) throw std::invalid_argument("Rng::next_below: bound must be positive");
        const std::uint64_t threshold = -bound % bound;  // 2^64 mod bound
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    std::uint32_t symbol(std::uint32_t alphabet) {
        return static_cast<std::uint32_t>(next_below(alphabet));
    }

    // Number of Bernoulli(p) failures before the first success, plus one:
    // the classic geometric trial count, sampled by inversion.
    std::uint64_t geometric_trials(double p) {
        if (p <= 0.0 || p > 1.0) throw std::invalid_argument("Rng::geometric_trials: p must be in (0,1]");
        if (p == 1.0) return 1;
        double u = next_double();
        if (u <= 0.0) u = 0x1.0p-53;
        return 1 + static_cast<std::uint64_t>(std::floor(std::log(u) / std::log1p(-p)));
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
};

}  // namespace beacon

#pragma once

// Combined two-chain majority beacon: m blocks from the primary chain and w
// from a cheaper secondary chain feed one majority, with w chosen so that
// attacking either side costs about the same. Both chains run the forkless
// model independently; the secondary chain's adversary power scales with
// the security ratio and its rewards shrink with the purchasing ratio.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "beacon/extractors.hpp"
#include "beacon/forkless.hpp"

namespace beacon::mc {

struct MultiChainConfig {
    std::uint32_t primary_blocks = 9;    // m
    std::uint32_t secondary_blocks = 10; // w; m + w must be odd
    double purchasing_ratio = 1.0;       // primary coin value over secondary, >= 1
    double security_ratio = 1.0;         // primary mining power over secondary, >= 1
    std::uint32_t interval_ratio = 4;    // secondary blocks per primary block interval
    bool zero_profit_mode = true;        // drop revenues, keep costs
    double adversary_power = 0.1;        // per-turn success on the primary chain
    fl::ForklessConfig chain;            // shared per-chain parameters (reward, cost, budget)

    std::vector<std::string> violations() const {
        std::vector<std::string> out;
        if (primary_blocks < 1) out.push_back("primary_blocks: must be >= 1");
        if ((primary_blocks + secondary_blocks) % 2 == 0)
            out.push_back("blocks: m + w must be odd for the combined majority");
        if (!(purchasing_ratio >= 1.0)) out.push_back("purchasing_ratio: must be >= 1");
        if (!(security_ratio >= 1.0)) out.push_back("security_ratio: must be >= 1");
        if (interval_ratio < 1) out.push_back("interval_ratio: must be >= 1");
        if (!(adversary_power >= 0.0 && adversary_power <= 1.0))
            out.push_back("adversary_power: must be in [0,1]");
        return out;
    }

    void validate() const {
        const auto out = violations();
        if (out.empty()) return;
        std::string message = "MultiChainConfig:";
        for (const auto& v : out) message += " [" + v + "]";
        throw std::invalid_argument(message);
    }
};

// Secondary block count that equalizes attack costs across the chains:
// round((purchasing_ratio / security_ratio) * m). Parity of the combined
// majority input is reconciled separately by parity_adjusted.
inline std::uint32_t balanced_secondary_count(double purchasing_ratio, double security_ratio,
                                              std::uint32_t primary_blocks) {
    if (!(purchasing_ratio >= 1.0) || !(security_ratio >= 1.0))
        throw std::invalid_argument("balanced_secondary_count: ratios must be >= 1");
    if (primary_blocks < 1)
        throw std::invalid_argument("balanced_secondary_count: primary block count must be >= 1");
    return static_cast<std::uint32_t>(
        std::llround(purchasing_ratio / security_ratio * static_cast<double>(primary_blocks)));
}

// Bumps w by one when m + w is even, so the combined majority has no ties.
inline std::uint32_t parity_adjusted(std::uint32_t primary_blocks, std::uint32_t secondary_blocks) {
    return (primary_blocks + secondary_blocks) % 2 == 0 ? secondary_blocks + 1 : secondary_blocks;
}

struct MultiChainRun {
    int bit = 0;
    std::vector<int> bits;  // primary-chain LSBs first, then secondary
    BudgetLedger primary_ledger;
    BudgetLedger secondary_ledger;
    bool secondary_power_saturated = false;
    double duration_primary_intervals = 0.0;
};

inline MultiChainRun run_multichain_beacon(const MultiChainConfig& cfg, fl::TwoModePolicy primary_policy,
                                           fl::TwoModePolicy secondary_policy, std::uint64_t seed) {
    cfg.validate();

    fl::ForklessConfig primary = cfg.chain;
    primary.success_prob = cfg.adversary_power;
    primary.beacon_len = std::max(cfg.primary_blocks, 1u);

    fl::ForklessConfig secondary = cfg.chain;
    const double scaled_power = cfg.security_ratio * cfg.adversary_power;
    secondary.success_prob = std::min(scaled_power, 1.0);
    secondary.beacon_len = std::max(cfg.secondary_blocks, 1u);
    secondary.block_reward = cfg.chain.block_reward / cfg.purchasing_ratio;

    if (cfg.zero_profit_mode) {
        primary.block_reward = 0.0;
        secondary.block_reward = 0.0;
    }

    MultiChainRun run;
    run.secondary_power_saturated = scaled_power > 1.0;

    fl::ForklessSim sim_a(primary, primary_policy, hash_combine(seed, 0xA), /*record_trace=*/true);
    sim_a.run_until(cfg.primary_blocks);
    for (std::uint32_t i = 0; i < cfg.primary_blocks; ++i)
        run.bits.push_back(static_cast<int>(sim_a.chain()[i] & 1u));
    run.primary_ledger = sim_a.ledger();

    if (cfg.secondary_blocks > 0) {
        fl::ForklessSim sim_b(secondary, secondary_policy, hash_combine(seed, 0xB),
                              /*record_trace=*/true);
        sim_b.run_until(cfg.secondary_blocks);
        for (std::uint32_t i = 0; i < cfg.secondary_blocks; ++i)
            run.bits.push_back(static_cast<int>(sim_b.chain()[i] & 1u));
        run.secondary_ledger = sim_b.ledger();
    }

    run.bit = ext::majority(run.bits);
    // The secondary chain mints blocks interval_ratio times faster, so only
    // the longer of the two windows drives the wall-clock span.
    run.duration_primary_intervals =
        std::max(static_cast<double>(cfg.primary_blocks),
                 static_cast<double>(cfg.secondary_blocks) / cfg.interval_ratio);
    return run;
}

inline BiasReport estimate_multichain_bias(const MultiChainConfig& cfg,
                                           fl::TwoModePolicy primary_policy,
                                           fl::TwoModePolicy secondary_policy, std::uint64_t trials,
                                           std::uint64_t seed, double confidence = 0.95,
                                           unsigned jobs = 0) {
    cfg.validate();
    auto trial = [&](Rng& rng) {
        return run_multichain_beacon(cfg, primary_policy, secondary_policy, rng.next_u64()).bit == 1;
    };
    return estimate_bias(trials, seed, confidence, trial, jobs);
}

}  // namespace beacon::mc

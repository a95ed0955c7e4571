#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "beacon/multichain.hpp"
#include "beacon/stats.hpp"

using namespace beacon;
using namespace beacon::mc;

namespace {

MultiChainConfig base_config() {
    MultiChainConfig cfg;
    cfg.primary_blocks = 9;
    cfg.secondary_blocks = 18;
    cfg.purchasing_ratio = 100.0;
    cfg.security_ratio = 50.0;
    cfg.adversary_power = 0.2;
    cfg.chain.block_reward = 50.0;
    cfg.chain.trial_cost = 9.0;
    cfg.chain.reserve = 40.0;
    cfg.chain.mining_investment = 5.0;
    return cfg;
}

}  // namespace

TEST_SUITE("multichain") {

TEST_CASE("balanced secondary count") {
    for (std::uint32_t m : {5u, 10u, 25u}) CHECK(balanced_secondary_count(100.0, 50.0, m) == 2 * m);
    CHECK(balanced_secondary_count(3.0, 2.0, 10) == 15);
    CHECK(balanced_secondary_count(7.0, 7.0, 9) == 9);
    CHECK_THROWS_AS(balanced_secondary_count(0.5, 1.0, 9), std::invalid_argument);

    // The ratio of w to m converges to the cost ratio as m grows.
    for (std::uint32_t m : {10u, 100u, 1000u, 10000u}) {
        const double ratio = static_cast<double>(balanced_secondary_count(3.0, 2.0, m)) / m;
        CHECK(std::abs(ratio - 1.5) <= 1.0 / m);
    }

    CHECK(parity_adjusted(9, 18) == 18);   // already odd combined
    CHECK(parity_adjusted(10, 20) == 21);  // bumped to keep the majority odd
}

TEST_CASE("config validation") {
    MultiChainConfig cfg = base_config();
    CHECK(cfg.violations().empty());
    cfg.secondary_blocks = 19;  // m + w even
    cfg.security_ratio = 0.5;
    CHECK(cfg.violations().size() == 2);
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("idle adversaries leave the combined bit unbiased") {
    MultiChainConfig cfg = base_config();
    cfg.adversary_power = 0.0;
    const auto report = estimate_multichain_bias(cfg, fl::TwoModePolicy::always_honest(),
                                                 fl::TwoModePolicy::always_honest(), 20000, 12);
    CHECK(report.estimate <= report.ci_halfwidth);
}

TEST_CASE("runs are deterministic and expose both ledgers") {
    MultiChainConfig cfg = base_config();
    const auto a = run_multichain_beacon(cfg, fl::TwoModePolicy::always_filter(),
                                         fl::TwoModePolicy::always_filter(), 31);
    const auto b = run_multichain_beacon(cfg, fl::TwoModePolicy::always_filter(),
                                         fl::TwoModePolicy::always_filter(), 31);
    CHECK(a.bits == b.bits);
    CHECK(a.bit == b.bit);
    CHECK(a.bits.size() == cfg.primary_blocks + cfg.secondary_blocks);
    // zero-profit mode books costs but no revenues.
    CHECK(a.primary_ledger.earned == 0.0);
    CHECK(a.secondary_ledger.earned == 0.0);
    CHECK(a.primary_ledger.spent > 0.0);
}

TEST_CASE("secondary power saturates at one and is flagged") {
    MultiChainConfig cfg = base_config();
    cfg.adversary_power = 0.5;  // security ratio 50 pushes the secondary past 1
    const auto run = run_multichain_beacon(cfg, fl::TwoModePolicy::always_honest(),
                                           fl::TwoModePolicy::always_honest(), 3);
    CHECK(run.secondary_power_saturated);
}

TEST_CASE("output depends only on the multiset of block bits") {
    MultiChainConfig cfg = base_config();
    Rng shuffler(2718);
    for (int rep = 0; rep < 1000; ++rep) {
        const auto run = run_multichain_beacon(cfg, fl::TwoModePolicy::always_filter(),
                                               fl::TwoModePolicy::always_filter(), 50000 + rep);
        std::vector<int> shuffled = run.bits;
        for (std::size_t i = shuffled.size(); i > 1; --i)
            std::swap(shuffled[i - 1], shuffled[shuffler.next_below(i)]);
        CHECK(ext::majority(shuffled) == run.bit);
    }
}

TEST_CASE("duration accounts for the faster secondary interval") {
    MultiChainConfig cfg = base_config();
    cfg.primary_blocks = 9;
    cfg.secondary_blocks = 18;
    cfg.interval_ratio = 4;
    const auto run = run_multichain_beacon(cfg, fl::TwoModePolicy::always_honest(),
                                           fl::TwoModePolicy::always_honest(), 8);
    CHECK(run.duration_primary_intervals == doctest::Approx(9.0));
    cfg.secondary_blocks = 72;
    cfg.primary_blocks = 9;
    const auto longer = run_multichain_beacon(cfg, fl::TwoModePolicy::always_honest(),
                                              fl::TwoModePolicy::always_honest(), 8);
    CHECK(longer.duration_primary_intervals == doctest::Approx(18.0));
}

TEST_CASE("splitting the beacon across chains dilutes a fixed attack budget") {
    // The same total reserve is either split between the two chains of the
    // combined design or spent entirely on the single-chain design. The
    // combined majority spreads over m + w inputs, so the same money buys a
    // smaller bias: reaching equal bias costs more in the split design.
    MultiChainConfig split = base_config();
    split.primary_blocks = 9;
    split.secondary_blocks = 18;  // the balanced count for the ratio pair below
    split.purchasing_ratio = 2.0;
    split.security_ratio = 1.0;  // equally secure chains isolate the dilution
    split.chain.reserve = 60.0;  // per chain; 120 in total

    MultiChainConfig all_in = split;
    all_in.secondary_blocks = 0;
    all_in.chain.reserve = 120.0;  // the whole budget on the primary chain

    const auto split_report = estimate_multichain_bias(split, fl::TwoModePolicy::always_filter(),
                                                       fl::TwoModePolicy::always_filter(), 20000, 71);
    const auto all_in_report = estimate_multichain_bias(all_in, fl::TwoModePolicy::always_filter(),
                                                        fl::TwoModePolicy::always_filter(), 20000, 71);
    CHECK(split_report.p_one() + split_report.ci_halfwidth < all_in_report.p_one());
}

}  // TEST_SUITE

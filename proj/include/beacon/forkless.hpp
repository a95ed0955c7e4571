#pragma once

// The forkless mining model: turn-based, no forks, the adversary may only
// discard her own freshly mined block. Includes budget accounting with a
// profits cap, the two-mode filtering adversary, the single-bit majority
// beacon over block LSBs, and the closed-form bias bound with its
// negative-binomial tail term.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "beacon/extractors.hpp"
#include "beacon/ledger.hpp"
#include "beacon/rng.hpp"
#include "beacon/stats.hpp"
#include "beacon/words.hpp"

namespace beacon::fl {

using beacon::BudgetLedger;

enum class AdversaryMode { honest_mode, filter_mode, idle_bankrupt };

// Whether a mining attempt is charged on every turn or once per chain
// location. Per-turn is the conservative reading (a retried location keeps
// costing); per-location reproduces the looser textbook arithmetic.
enum class CostMode { per_turn, per_location };

struct ForklessConfig {
    double success_prob = 0.2;    // adversary wins a turn with this probability
    std::uint32_t alphabet = 1u << 16;  // even, so block LSBs are unbiased
    std::uint32_t beacon_len = 101;     // number of blocks feeding the majority
    double block_reward = 50.0;         // coins credited per accepted block
    double trial_cost = 9.0;            // coins per mining attempt
    double mining_investment = 5.0;     // sunk cost that scales the profits cap
    double reserve = 5.0;               // liquid coins at the start
    double profits_cap_multiplier = 2.0;  // net profit never exceeds multiplier * investment
    double profits_rate = -1.0;           // per-block profit rate; < 0 means the honest margin
    bool infinite_budget = false;         // disables bankruptcy and the profits cap
    CostMode cost_mode = CostMode::per_turn;
    double delta = 2.0 / 3.0;     // profit-margin slack parameter in (1/2, 1)
    double epsilon = 0.1;         // target bias for the closed-form bound

    double profit_margin() const { return success_prob * block_reward - trial_cost; }

    // Probability that a filtered location ends with the adversary's block:
    // (p/2) + (p/2)^2 + ... = (p/2) / (1 - p/2).
    double filter_win_prob() const { return (success_prob / 2) / (1 - success_prob / 2); }

    double filter_margin() const {
        return (1.0 / delta) * filter_win_prob() * block_reward - trial_cost;
    }

    double effective_profits_rate() const {
        return profits_rate >= 0 ? profits_rate : std::max(0.0, profit_margin());
    }

    // Monotone cap on net profit over a prefix of `blocks` chain positions.
    double max_profits(std::uint64_t blocks) const {
        if (infinite_budget) return std::numeric_limits<double>::infinity();
        return std::min(profits_cap_multiplier * mining_investment,
                        effective_profits_rate() * static_cast<double>(blocks));
    }

    double budget_at(std::uint64_t blocks) const { return reserve + max_profits(blocks); }

    std::vector<std::string> violations(bool bound_hypotheses = false) const {
        std::vector<std::string> out;
        if (!(success_prob >= 0.0 && success_prob <= 1.0)) out.push_back("success_prob: must be in [0,1]");
        if (alphabet < 2 || alphabet % 2 != 0) out.push_back("alphabet: must be even and >= 2");
        if (beacon_len < 1) out.push_back("beacon_len: must be >= 1");
        if (block_reward < 0) out.push_back("block_reward: must be >= 0");
        if (trial_cost < 0) out.push_back("trial_cost: must be >= 0");
        if (mining_investment < 0) out.push_back("mining_investment: must be >= 0");
        if (reserve < 0) out.push_back("reserve: must be >= 0");
        if (!(delta > 0.5 && delta < 1.0)) out.push_back("delta: must be in (1/2, 1)");
        if (!(epsilon > 0.0)) out.push_back("epsilon: must be positive");
        if (bound_hypotheses) {
            if (!(profit_margin() > 0)) out.push_back("profit_margin: p*x - y must be positive");
            if (!(filter_margin() < 0)) out.push_back("filter_margin: (1/delta)*p'*x - y must be negative");
        }
        return out;
    }

    void validate(bool bound_hypotheses = false) const {
        const auto out = violations(bound_hypotheses);
        if (out.empty()) return;
        std::string message = "ForklessConfig:";
        for (const auto& v : out) message += " [" + v + "]";
        throw std::invalid_argument(message);
    }
};

struct TurnTrace {
    enum class Publisher { honest, adversary, none };

    std::uint64_t turn = 0;
    bool adversary_successful = false;
    Symbol block_symbol = 0;
    Publisher published_by = Publisher::none;
    AdversaryMode adversary_mode = AdversaryMode::honest_mode;
    bool discarded = false;
};

// Position-scheduled two-mode policy: honest below `honest_from`, filtering
// inside [honest_until, filter_until). Filtering publishes only blocks whose
// LSB is 1 (the adversary biases the beacon toward 1).
struct TwoModePolicy {
    std::uint64_t honest_until = 0;
    std::uint64_t filter_until = std::numeric_limits<std::uint64_t>::max();

    AdversaryMode mode_for(std::uint64_t location) const {
        if (location < honest_until || location >= filter_until) return AdversaryMode::honest_mode;
        return AdversaryMode::filter_mode;
    }

    static TwoModePolicy always_honest() { return {std::numeric_limits<std::uint64_t>::max(), 0}; }
    static TwoModePolicy always_filter() { return {0, std::numeric_limits<std::uint64_t>::max()}; }
    static TwoModePolicy filter_after(std::uint64_t start) {
        return {start, std::numeric_limits<std::uint64_t>::max()};
    }
};

inline TwoModePolicy two_mode_policy(const ForklessConfig& cfg) {
    // The textbook schedule: honest for the first half, filter afterwards.
    return TwoModePolicy::filter_after(cfg.beacon_len / 2);
}

class ForklessSim {
public:
    ForklessSim(const ForklessConfig& cfg, TwoModePolicy policy, std::uint64_t seed,
                bool record_trace = false)
        : cfg_(cfg), policy_(policy), rng_(seed), record_trace_(record_trace) {
        cfg_.validate(false);
        ledger_.initial = cfg.reserve;
    }

    // One turn of the model. Returns the trace entry for the turn (also kept
    // internally when trace recording is on).
    TurnTrace step() {
        TurnTrace t;
        t.turn = turn_++;
        AdversaryMode mode = ledger_.bankrupt ? AdversaryMode::idle_bankrupt
                                              : policy_.mode_for(chain_length_);
        const bool mining = mode != AdversaryMode::idle_bankrupt && cfg_.success_prob > 0.0;

        if (mining) {
            const bool new_location = chain_length_ != last_charged_location_;
            const bool charge = cfg_.cost_mode == CostMode::per_turn || new_location;
            if (charge) {
                if (!cfg_.infinite_budget && ledger_.coins() < cfg_.trial_cost) {
                    ledger_.bankrupt = true;
                    mode = AdversaryMode::idle_bankrupt;
                } else {
                    ledger_.spent += cfg_.trial_cost;
                    last_charged_location_ = chain_length_;
                }
            }
        }
        t.adversary_mode = mode;

        if (mode != AdversaryMode::idle_bankrupt && cfg_.success_prob > 0.0 &&
            rng_.bernoulli(cfg_.success_prob)) {
            t.adversary_successful = true;
            const Symbol symbol = rng_.symbol(cfg_.alphabet);
            t.block_symbol = symbol;
            const bool helpful = (symbol & 1u) == 1u;
            if (mode == AdversaryMode::filter_mode && !helpful) {
                t.discarded = true;  // the location stays open for the next turn
            } else {
                append_block(symbol, TurnTrace::Publisher::adversary);
                t.published_by = TurnTrace::Publisher::adversary;
                credit_reward();
            }
        } else {
            const Symbol symbol = rng_.symbol(cfg_.alphabet);
            t.block_symbol = symbol;
            append_block(symbol, TurnTrace::Publisher::honest);
            t.published_by = TurnTrace::Publisher::honest;
        }

        if (record_trace_) trace_.push_back(t);
        return t;
    }

    void run_until(std::uint64_t blocks) {
        while (chain_length_ < blocks) step();
    }

    std::uint64_t chain_length() const { return chain_length_; }
    std::uint64_t ones() const { return lsb_ones_; }
    std::uint64_t turns() const { return turn_; }
    const BudgetLedger& ledger() const { return ledger_; }
    const std::vector<TurnTrace>& trace() const { return trace_; }
    const std::vector<Symbol>& chain() const { return chain_; }
    std::uint64_t adversary_blocks() const { return adversary_blocks_; }
    std::uint64_t filtered_publications() const { return filtered_publications_; }

private:
    void append_block(Symbol symbol, TurnTrace::Publisher by) {
        ++chain_length_;
        lsb_ones_ += symbol & 1u;
        if (by == TurnTrace::Publisher::adversary) {
            ++adversary_blocks_;
            if (policy_.mode_for(chain_length_ - 1) == AdversaryMode::filter_mode)
                ++filtered_publications_;
        }
        if (record_trace_) chain_.push_back(symbol);
    }

    void credit_reward() {
        if (cfg_.infinite_budget) {
            ledger_.earned += cfg_.block_reward;
            return;
        }
        // Net profit is capped by the assumed bound at the current length.
        const double headroom = cfg_.max_profits(chain_length_) - ledger_.net_profit();
        ledger_.earned += std::clamp(headroom, 0.0, cfg_.block_reward);
    }

    ForklessConfig cfg_;
    TwoModePolicy policy_;
    Rng rng_;
    bool record_trace_ = false;
    BudgetLedger ledger_;
    std::uint64_t turn_ = 0;
    std::uint64_t chain_length_ = 0;
    std::uint64_t lsb_ones_ = 0;
    std::uint64_t adversary_blocks_ = 0;
    std::uint64_t filtered_publications_ = 0;
    std::uint64_t last_charged_location_ = std::numeric_limits<std::uint64_t>::max();
    std::vector<Symbol> chain_;
    std::vector<TurnTrace> trace_;
};

struct ForklessRun {
    int bit = 0;
    BudgetLedger ledger;
    std::vector<TurnTrace> trace;
    std::vector<Symbol> chain;
    std::uint64_t turns = 0;
    std::uint64_t adversary_blocks = 0;
};

inline ForklessRun run_forkless_beacon(const ForklessConfig& cfg, TwoModePolicy policy,
                                       std::uint64_t seed) {
    if (cfg.beacon_len % 2 == 0)
        throw std::invalid_argument("run_forkless_beacon: beacon length must be odd");
    ForklessSim sim(cfg, policy, seed, /*record_trace=*/true);
    sim.run_until(cfg.beacon_len);
    ForklessRun run;
    run.bit = 2 * sim.ones() >= cfg.beacon_len ? 1 : 0;
    run.ledger = sim.ledger();
    run.trace = sim.trace();
    run.chain = sim.chain();
    run.turns = sim.turns();
    run.adversary_blocks = sim.adversary_blocks();
    return run;
}

// Upper bound on the negative-binomial lower tail: probability that ell
// successes at rate win_prob arrive in fewer than delta * ell / win_prob
// trials is at most exp(-(1/3) (1/delta - 1)^2 delta ell).
inline double negbin_tail_bound(double delta, std::uint64_t ell, double win_prob) {
    if (!(delta > 0.5 && delta < 1.0)) throw std::invalid_argument("negbin_tail_bound: delta must be in (1/2,1)");
    if (ell < 1) throw std::invalid_argument("negbin_tail_bound: ell must be >= 1");
    if (!(win_prob > 0.0 && win_prob < 1.0))
        throw std::invalid_argument("negbin_tail_bound: win_prob must be in (0,1)");
    const double slack = 1.0 / delta - 1.0;
    return std::exp(-(1.0 / 3.0) * slack * slack * delta * static_cast<double>(ell));
}

// Companion Monte Carlo estimate of Pr(Y < delta * ell / win_prob) for Y
// the number of trials until the ell-th success.
inline double negbin_tail_estimate(double delta, std::uint64_t ell, double win_prob,
                                   std::uint64_t trials, std::uint64_t seed) {
    const double cutoff = delta * static_cast<double>(ell) / win_prob;
    std::uint64_t below = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        Rng rng = Rng::for_trial(seed, t);
        std::uint64_t draws = 0;
        for (std::uint64_t s = 0; s < ell; ++s) draws += rng.geometric_trials(win_prob);
        if (static_cast<double>(draws) < cutoff) ++below;
    }
    return static_cast<double>(below) / static_cast<double>(trials);
}

struct ForklessBound {
    std::uint32_t window = 0;   // undetermined-window width for the configured epsilon
    double tail = 1.0;          // negative-binomial tail term
    double tie_term = 0.0;      // (e/pi) / sqrt(n - window)
    double budget_slack = 0.0;  // T(n) + delta * (1/p') * window * filter_margin; must be < 0
    double total = 1.0;
};

// Closed-form bias bound for the budget-restricted filtering adversary:
// epsilon + tail + (e/pi)/sqrt(n - window), applicable only when the
// budget condition holds.
inline ForklessBound filtering_bias_bound(const ForklessConfig& cfg) {
    cfg.validate(true);
    ForklessBound bound;
    bound.window = ext::tie_window(cfg.beacon_len, cfg.epsilon);
    const double win_prob = cfg.filter_win_prob();
    bound.budget_slack = cfg.budget_at(cfg.beacon_len) +
                         cfg.delta * (1.0 / win_prob) * static_cast<double>(bound.window) *
                             cfg.filter_margin();
    if (!(bound.budget_slack < 0.0))
        throw std::domain_error("filtering_bias_bound: budget condition T(n) + delta*(1/p')*ell*w < 0 fails");
    bound.tail = bound.window >= 1 ? negbin_tail_bound(cfg.delta, bound.window, win_prob) : 1.0;
    bound.tie_term = (std::numbers::e / std::numbers::pi) /
                     std::sqrt(static_cast<double>(cfg.beacon_len - bound.window));
    bound.total = cfg.epsilon + bound.tail + bound.tie_term;
    return bound;
}

inline BiasReport estimate_forkless_bias(const ForklessConfig& cfg, TwoModePolicy policy,
                                         std::uint64_t trials, std::uint64_t seed,
                                         double confidence = 0.95, unsigned jobs = 0) {
    if (cfg.beacon_len % 2 == 0)
        throw std::invalid_argument("estimate_forkless_bias: beacon length must be odd");
    cfg.validate(false);
    auto trial = [&cfg, policy](Rng& rng) {
        ForklessSim sim(cfg, policy, rng.next_u64(), /*record_trace=*/false);
        sim.run_until(cfg.beacon_len);
        return 2 * sim.ones() >= cfg.beacon_len;
    };
    return estimate_bias(trials, seed, confidence, trial, jobs);
}

}  // namespace beacon::fl

#pragma once

// Round-based longest-chain mining with forks, in the style of the backbone
// framework: N parties, q random-oracle queries each per round, a rushing
// adversary controlling t quotas, synchronous next-round diffusion, and
// first-received tie-breaking with adversary-delivered blocks first. The
// beacon takes the majority of block LSBs over a confirmed window, and the
// bankruptcy predicate/event machinery measures adversary participation in
// chain windows.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "beacon/extractors.hpp"
#include "beacon/ledger.hpp"
#include "beacon/rng.hpp"
#include "beacon/stats.hpp"
#include "beacon/words.hpp"

namespace beacon::bb {

inline constexpr std::uint32_t kNoBlock = std::numeric_limits<std::uint32_t>::max();
inline constexpr std::uint32_t kUnpublished = std::numeric_limits<std::uint32_t>::max();
inline constexpr std::int32_t kAdversary = -1;

struct BackboneConfig {
    std::uint32_t parties = 5;         // total miners, honest plus corrupted
    std::uint32_t corrupted = 1;       // quotas the adversary controls
    std::uint32_t queries = 1;         // oracle queries per party per round
    double success_prob = 0.05;        // per-query block probability
    std::uint32_t alphabet = 1u << 16;
    std::uint32_t beacon_len = 21;     // n
    std::uint32_t confirmations = 3;   // k
    double lambda = 2.0;               // honest-to-adversary power ratio parameter
    double delta = 0.5;                // quality margin, in (0,1)
    std::uint32_t warmup = 0;          // agreed start: the window begins at height warmup + 1
    std::uint64_t max_rounds = 0;      // 0 selects the expected-progress default
    bool halt_on_bankruptcy = true;    // budgeted strategies stop once broke

    double adversary_power() const { return corrupted * queries * success_prob; }
    double honest_power() const {
        return static_cast<double>(parties - corrupted) * queries * success_prob;
    }
    // Honest power after discounting unintentional forks.
    double effective_honest_power() const {
        const double a = honest_power();
        return a - a * a;
    }

    std::uint64_t effective_max_rounds() const {
        if (max_rounds > 0) return max_rounds;
        const double power = adversary_power() + honest_power();
        const double span = static_cast<double>(warmup + beacon_len + confirmations);
        return static_cast<std::uint64_t>(std::ceil(50.0 * span / std::max(power, 1e-9)));
    }

    std::vector<std::string> violations() const {
        std::vector<std::string> out;
        if (parties < 1) out.push_back("parties: must be >= 1");
        if (corrupted >= parties) out.push_back("corrupted: at least one honest party is required");
        if (queries < 1) out.push_back("queries: must be >= 1");
        if (!(success_prob > 0.0 && success_prob < 1.0)) out.push_back("success_prob: must be in (0,1)");
        if (alphabet < 2 || alphabet % 2 != 0) out.push_back("alphabet: must be even and >= 2");
        if (beacon_len < 1) out.push_back("beacon_len: must be >= 1");
        if (confirmations < 1) out.push_back("confirmations: must be >= 1");
        if (!(lambda >= 1.0)) out.push_back("lambda: must be >= 1");
        if (!(delta > 0.0 && delta < 1.0)) out.push_back("delta: must be in (0,1)");
        return out;
    }

    void validate() const {
        const auto out = violations();
        if (out.empty()) return;
        std::string message = "BackboneConfig:";
        for (const auto& v : out) message += " [" + v + "]";
        throw std::invalid_argument(message);
    }
};

struct Block {
    std::uint32_t id = 0;
    std::uint32_t parent = kNoBlock;
    std::uint32_t height = 0;             // genesis is 0
    Symbol symbol = 0;
    std::int32_t creator = kAdversary;    // honest party index, or kAdversary
    std::uint32_t round_created = 0;
    std::uint32_t published_round = kUnpublished;

    bool is_adversary() const { return creator == kAdversary; }
};

// The per-block annotation the bankruptcy predicate operates on: a chain
// suffix starting right after genesis.
struct AnnotatedChain {
    std::vector<std::uint32_t> ids;
    std::vector<std::uint8_t> adversary;

    std::size_t size() const { return ids.size(); }
};

struct RoundRecord {
    std::vector<std::uint32_t> tips;       // adopted tip per honest party at round end
    std::vector<std::uint32_t> published;  // blocks that became public this round
};

struct ExecutionTrace {
    std::vector<Block> arena;
    std::vector<RoundRecord> rounds;
};

inline std::uint32_t ancestor_at(const std::vector<Block>& arena, std::uint32_t id,
                                 std::uint32_t height) {
    while (arena[id].height > height) id = arena[id].parent;
    if (arena[id].height != height)
        throw std::logic_error("ancestor_at: broken parent chain");
    return id;
}

inline AnnotatedChain chain_from_tip(const std::vector<Block>& arena, std::uint32_t tip) {
    AnnotatedChain chain;
    const std::uint32_t len = arena[tip].height;
    chain.ids.resize(len);
    chain.adversary.resize(len);
    std::uint32_t id = tip;
    for (std::uint32_t pos = len; pos > 0; --pos) {
        chain.ids[pos - 1] = id;
        chain.adversary[pos - 1] = arena[id].is_adversary();
        id = arena[id].parent;
    }
    return chain;
}

// True iff the chain contains `window` consecutive blocks starting at
// start_block of which at most `tolerated` were adversary-created. A chain
// that lacks the start block, or is too short for a full window, fails.
inline bool bankruptcy_predicate(const AnnotatedChain& chain, std::uint32_t start_block,
                                 std::uint32_t tolerated, std::uint32_t window) {
    const auto it = std::find(chain.ids.begin(), chain.ids.end(), start_block);
    if (it == chain.ids.end()) return false;
    const std::size_t start = static_cast<std::size_t>(it - chain.ids.begin());
    if (start + window > chain.size()) return false;
    std::uint32_t adversary_blocks = 0;
    for (std::size_t i = start; i < start + window; ++i) adversary_blocks += chain.adversary[i];
    return adversary_blocks <= tolerated;
}

// Minimum honest fraction over all length-`window` segments.
inline double chain_quality(const AnnotatedChain& chain, std::uint32_t window) {
    if (window < 1 || chain.size() < window)
        throw std::invalid_argument("chain_quality: chain shorter than the window");
    std::uint32_t adversary_blocks = 0;
    for (std::uint32_t i = 0; i < window; ++i) adversary_blocks += chain.adversary[i];
    std::uint32_t worst = adversary_blocks;
    for (std::size_t i = window; i < chain.size(); ++i) {
        adversary_blocks += chain.adversary[i];
        adversary_blocks -= chain.adversary[i - window];
        worst = std::max(worst, adversary_blocks);
    }
    return 1.0 - static_cast<double>(worst) / static_cast<double>(window);
}

// The window parameters of the quality analysis: the tolerated adversary
// block count and the window length it must be judged over.
struct QualityWindow {
    std::uint32_t tolerated = 0;  // from the tie-window at epsilon/2
    std::uint32_t window = 0;
};

inline QualityWindow quality_window_params(double epsilon, std::uint32_t n, double lambda, double delta) {
    if (!(lambda >= 1.0)) throw std::invalid_argument("quality_window_params: lambda must be >= 1");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("quality_window_params: delta must be in (0,1)");
    QualityWindow qw;
    qw.tolerated = ext::tie_window(n, epsilon / 2.0);
    const double raw = 2.0 * lambda * static_cast<double>(qw.tolerated) / (1.0 - delta / 3.0);
    qw.window = static_cast<std::uint32_t>(std::ceil(raw - 1e-9));
    return qw;
}

class BackboneSim;

// Adversary strategies drive the corrupted quota each round. `act` runs
// after honest mining (rushing: this round's honest blocks are visible) and
// may query and publish through the sim.
class Strategy {
public:
    virtual ~Strategy() = default;
    virtual void act(BackboneSim& sim, std::span<const std::uint32_t> honest_found) = 0;
    virtual bool allows_termination(const BackboneSim&) const { return true; }
    virtual const BudgetLedger* ledger() const { return nullptr; }
};

class BackboneSim {
public:
    BackboneSim(const BackboneConfig& cfg, std::uint64_t seed, bool record_trace = false)
        : cfg_(cfg), rng_(seed), record_trace_(record_trace) {
        cfg_.validate();
        arena_.push_back(Block{});  // genesis
        tips_.assign(cfg.parties - cfg.corrupted, 0);
    }

    const BackboneConfig& config() const { return cfg_; }
    std::uint32_t round() const { return round_; }
    const std::vector<Block>& arena() const { return arena_; }
    const Block& block(std::uint32_t id) const { return arena_[id]; }
    const std::vector<std::uint32_t>& honest_tips() const { return tips_; }
    const std::vector<RoundRecord>& rounds() const { return rounds_; }

    // Highest tip that has been delivered (or will be delivered next round).
    std::uint32_t best_public_tip() const { return best_public_tip_; }
    std::uint32_t public_height() const { return arena_[best_public_tip_].height; }

    // Best tip visible to the adversary, including this round's honest finds.
    std::uint32_t best_known_tip(std::span<const std::uint32_t> honest_found) const {
        std::uint32_t best = best_public_tip_;
        for (std::uint32_t id : honest_found)
            if (arena_[id].height > arena_[best].height) best = id;
        return best;
    }

    // One adversary oracle query on the given parent. power_fraction thins
    // the per-query success probability (used to emulate scaled-down power).
    std::optional<std::uint32_t> adversary_query(std::uint32_t parent, double power_fraction = 1.0) {
        if (!rng_.bernoulli(cfg_.success_prob * power_fraction)) return std::nullopt;
        return create_block(parent, kAdversary);
    }

    // The grant behind the two-phase grafting adversary: re-root an already
    // mined block onto a new parent, keeping its symbol.
    std::uint32_t graft(std::uint32_t parent, Symbol symbol) {
        const std::uint32_t id = create_block(parent, kAdversary);
        arena_[id].symbol = symbol;
        return id;
    }

    // Queue a block and its unpublished ancestors for next-round delivery.
    void publish(std::uint32_t id) {
        std::vector<std::uint32_t> pending;
        for (std::uint32_t b = id; b != kNoBlock && arena_[b].published_round == kUnpublished;
             b = arena_[b].parent)
            pending.push_back(b);
        for (auto it = pending.rbegin(); it != pending.rend(); ++it) {
            arena_[*it].published_round = round_;
            adversary_outbox_.push_back(*it);
        }
        if (arena_[id].height > arena_[best_public_tip_].height) best_public_tip_ = id;
    }

    std::uint32_t adversary_quota() const { return cfg_.corrupted * cfg_.queries; }

    void run_round(Strategy& strategy) {
        deliver();
        honest_found_.clear();
        const std::uint32_t honest = cfg_.parties - cfg_.corrupted;
        for (std::uint32_t p = 0; p < honest; ++p) {
            for (std::uint32_t qi = 0; qi < cfg_.queries; ++qi) {
                if (!rng_.bernoulli(cfg_.success_prob)) continue;
                const std::uint32_t id = create_block(tips_[p], static_cast<std::int32_t>(p));
                arena_[id].published_round = round_;
                tips_[p] = id;
                honest_outbox_.push_back(id);
                honest_found_.push_back(id);
                break;  // a miner keeps extending its own new tip next round
            }
        }
        strategy.act(*this, honest_found_);
        if (record_trace_) {
            RoundRecord record;
            record.tips = tips_;
            record.published = adversary_outbox_;
            record.published.insert(record.published.end(), honest_outbox_.begin(), honest_outbox_.end());
            rounds_.push_back(std::move(record));
        }
        ++round_;
    }

    bool all_honest_reached(std::uint32_t height) const {
        for (std::uint32_t tip : tips_)
            if (arena_[tip].height < height) return false;
        return true;
    }

    // Beacon bit derived from the chain at `tip`: majority of the LSBs of
    // the blocks at heights warmup+1 .. warmup+beacon_len.
    std::optional<int> beacon_bit(std::uint32_t tip) const {
        const std::uint32_t first = cfg_.warmup + 1;
        const std::uint32_t last = cfg_.warmup + cfg_.beacon_len;
        if (arena_[tip].height < last) return std::nullopt;
        std::uint32_t id = ancestor_at(arena_, tip, last);
        std::uint32_t ones = 0;
        for (std::uint32_t h = last; h >= first; --h) {
            ones += arena_[id].symbol & 1u;
            id = arena_[id].parent;
        }
        return 2 * ones >= cfg_.beacon_len ? 1 : 0;
    }

    ExecutionTrace take_trace() {
        ExecutionTrace trace;
        trace.arena = arena_;
        trace.rounds = std::move(rounds_);
        rounds_.clear();
        return trace;
    }

private:
    std::uint32_t create_block(std::uint32_t parent, std::int32_t creator) {
        Block b;
        b.id = static_cast<std::uint32_t>(arena_.size());
        b.parent = parent;
        b.height = arena_[parent].height + 1;
        b.symbol = rng_.symbol(cfg_.alphabet);
        b.creator = creator;
        b.round_created = round_;
        arena_.push_back(b);
        return b.id;
    }

    // Start-of-round diffusion: everything published last round arrives,
    // adversary blocks first, then honest finds in discovery order. A party
    // switches only to strictly longer chains, so ties keep the first
    // received and the adversary wins same-round races.
    void deliver() {
        inbox_adv_.swap(adversary_outbox_);
        inbox_honest_.swap(honest_outbox_);
        adversary_outbox_.clear();
        honest_outbox_.clear();
        for (auto& tip : tips_) {
            for (std::uint32_t id : inbox_adv_)
                if (arena_[id].height > arena_[tip].height) tip = id;
            for (std::uint32_t id : inbox_honest_)
                if (arena_[id].height > arena_[tip].height) tip = id;
        }
        for (std::uint32_t id : inbox_adv_)
            if (arena_[id].height > arena_[best_public_tip_].height) best_public_tip_ = id;
        for (std::uint32_t id : inbox_honest_)
            if (arena_[id].height > arena_[best_public_tip_].height) best_public_tip_ = id;
        inbox_adv_.clear();
        inbox_honest_.clear();
    }

    BackboneConfig cfg_;
    Rng rng_;
    bool record_trace_ = false;
    std::vector<Block> arena_;
    std::vector<std::uint32_t> tips_;
    std::uint32_t best_public_tip_ = 0;
    std::uint32_t round_ = 0;
    std::vector<std::uint32_t> adversary_outbox_;
    std::vector<std::uint32_t> honest_outbox_;
    std::vector<std::uint32_t> inbox_adv_;
    std::vector<std::uint32_t> inbox_honest_;
    std::vector<std::uint32_t> honest_found_;
    std::vector<RoundRecord> rounds_;
};

// Per-query budget model shared by the budgeted strategies.
struct AdversaryBudget {
    double reserve = std::numeric_limits<double>::infinity();
    double query_cost = 0.0;
    double block_reward = 0.0;
    double invested = 0.0;                 // scales the profits cap
    double profits_cap_multiplier = std::numeric_limits<double>::infinity();

    double max_profits() const { return profits_cap_multiplier * invested; }
};

namespace detail {
class BudgetedStrategy : public Strategy {
public:
    explicit BudgetedStrategy(AdversaryBudget budget) : budget_(budget) {
        ledger_.initial = budget.reserve;
    }
    const BudgetLedger* ledger() const override { return &ledger_; }

protected:
    // Charges one query; returns false (and marks bankruptcy) when the
    // adversary cannot afford it and the model halts broke adversaries.
    bool charge_query(const BackboneSim& sim) {
        if (budget_.query_cost <= 0.0) return true;
        if (ledger_.bankrupt) return !sim.config().halt_on_bankruptcy;
        if (ledger_.coins() < budget_.query_cost) {
            ledger_.bankrupt = true;
            return !sim.config().halt_on_bankruptcy;
        }
        ledger_.spent += budget_.query_cost;
        return true;
    }

    void credit_block() {
        if (budget_.block_reward <= 0.0) return;
        const double headroom = budget_.max_profits() - ledger_.net_profit();
        ledger_.earned += std::clamp(headroom, 0.0, budget_.block_reward);
    }

    AdversaryBudget budget_;
    BudgetLedger ledger_;
};
}  // namespace detail

// Mines on the best known tip and publishes everything immediately.
class HonestMimicStrategy : public detail::BudgetedStrategy {
public:
    explicit HonestMimicStrategy(double power_fraction = 1.0, AdversaryBudget budget = {})
        : BudgetedStrategy(budget), power_fraction_(power_fraction) {}

    void act(BackboneSim& sim, std::span<const std::uint32_t> honest_found) override {
        std::uint32_t tip = sim.best_known_tip(honest_found);
        for (std::uint32_t qi = 0; qi < sim.adversary_quota(); ++qi) {
            if (!charge_query(sim)) return;
            if (const auto id = sim.adversary_query(tip, power_fraction_)) {
                sim.publish(*id);
                credit_block();
                tip = *id;
            }
        }
    }

private:
    double power_fraction_;
};

// Mines on the best known tip, publishes only blocks whose LSB is 1 and
// discards the rest, never to be released.
class DiscardDetrimentalStrategy : public detail::BudgetedStrategy {
public:
    explicit DiscardDetrimentalStrategy(double power_fraction = 1.0, AdversaryBudget budget = {})
        : BudgetedStrategy(budget), power_fraction_(power_fraction) {}

    void act(BackboneSim& sim, std::span<const std::uint32_t> honest_found) override {
        std::uint32_t tip = sim.best_known_tip(honest_found);
        for (std::uint32_t qi = 0; qi < sim.adversary_quota(); ++qi) {
            if (!charge_query(sim)) return;
            if (const auto id = sim.adversary_query(tip, power_fraction_)) {
                if ((sim.block(*id).symbol & 1u) == 1u) {
                    sim.publish(*id);
                    credit_block();
                    tip = *id;
                }
                // detrimental draws are dropped; the parent stays the tip
            }
        }
    }

private:
    double power_fraction_;
};

// Two phases: secretly build a block supply rooted at genesis, then graft
// it onto the best honest tip in one shot (the model grants the re-rooting)
// and keep mining on chains that contain the graft.
class PrivateChainGraftStrategy : public detail::BudgetedStrategy {
public:
    PrivateChainGraftStrategy(std::uint32_t phase1_rounds, AdversaryBudget budget = {})
        : BudgetedStrategy(budget), phase1_rounds_(phase1_rounds) {}

    void act(BackboneSim& sim, std::span<const std::uint32_t> honest_found) override {
        if (!grafted_ && sim.round() >= phase1_rounds_) {
            // Re-root the private supply onto the best public chain. The
            // re-rooted blocks keep the supply's symbols but are new blocks.
            std::uint32_t parent = sim.best_known_tip(honest_found);
            for (Symbol s : supply_symbols_) {
                grafted_tip_ = sim.graft(parent, s);
                parent = grafted_tip_;
            }
            if (grafted_tip_ != kNoBlock) sim.publish(grafted_tip_);
            grafted_ = true;
            mining_tip_ = parent;
            return;
        }
        for (std::uint32_t qi = 0; qi < sim.adversary_quota(); ++qi) {
            if (!charge_query(sim)) return;
            if (!grafted_) {
                if (const auto id = sim.adversary_query(private_tip_ == kNoBlock ? 0 : private_tip_)) {
                    private_tip_ = *id;
                    supply_symbols_.push_back(sim.block(*id).symbol);
                }
            } else {
                // Mine only on chains that contain the graft.
                std::uint32_t tip = sim.best_known_tip(honest_found);
                if (!contains_graft(sim, tip)) tip = mining_tip_;
                if (const auto id = sim.adversary_query(tip)) {
                    sim.publish(*id);
                    credit_block();
                    mining_tip_ = *id;
                }
            }
        }
    }

    std::uint32_t supply_size() const { return static_cast<std::uint32_t>(supply_symbols_.size()); }
    std::uint32_t grafted_tip() const { return grafted_tip_; }

private:
    bool contains_graft(const BackboneSim& sim, std::uint32_t tip) const {
        if (grafted_tip_ == kNoBlock) return false;
        const auto& arena = sim.arena();
        if (arena[tip].height < arena[grafted_tip_].height) return false;
        return ancestor_at(arena, tip, arena[grafted_tip_].height) == grafted_tip_;
    }

    std::uint32_t phase1_rounds_;
    bool grafted_ = false;
    std::uint32_t private_tip_ = kNoBlock;
    std::uint32_t mining_tip_ = kNoBlock;
    std::uint32_t grafted_tip_ = kNoBlock;
    std::vector<Symbol> supply_symbols_;
};

// Above-majority power: build a private chain from the agreed start until
// it fixes the beacon bit; restart whenever the bit comes out wrong, and
// publish once the chain is confirmed-length and strictly longest.
class MajorityPowerStrategy : public Strategy {
public:
    explicit MajorityPowerStrategy(int desired_bit) : desired_(desired_bit) {}

    void act(BackboneSim& sim, std::span<const std::uint32_t> honest_found) override {
        const auto& cfg = sim.config();
        const std::uint32_t target = cfg.warmup + cfg.beacon_len + cfg.confirmations;
        for (std::uint32_t qi = 0; qi < sim.adversary_quota(); ++qi) {
            if (published_) return;
            if (const auto id = sim.adversary_query(private_tip_)) {
                private_tip_ = *id;
                const auto& block = sim.block(*id);
                if (block.height == cfg.warmup + cfg.beacon_len) {
                    // The window is fixed now; restart on a wrong bit.
                    if (sim.beacon_bit(*id) != desired_) private_tip_ = 0;
                }
            }
        }
        // Publish only with a strict margin over everything the rushing view
        // shows, so every honest party switches on delivery and the race is
        // settled for good.
        const std::uint32_t best_seen = sim.block(sim.best_known_tip(honest_found)).height;
        if (!published_ && sim.block(private_tip_).height >= target &&
            sim.block(private_tip_).height > best_seen) {
            sim.publish(private_tip_);
            published_ = true;
        }
    }

    // Terminate only after every honest party has adopted the published
    // chain; before that the publication is still in flight.
    bool allows_termination(const BackboneSim& sim) const override {
        if (!published_) return false;
        const auto& arena = sim.arena();
        for (std::uint32_t tip : sim.honest_tips()) {
            if (arena[tip].height < arena[private_tip_].height) return false;
            if (ancestor_at(arena, tip, arena[private_tip_].height) != private_tip_) return false;
        }
        return true;
    }

private:
    int desired_;
    std::uint32_t private_tip_ = 0;
    bool published_ = false;
};

// Basic withholding: mine privately on a secret branch and release it
// whenever this round's honest progress would otherwise catch up. Used as a
// fork-generating comparison strategy.
class WithholdReleaseStrategy : public Strategy {
public:
    void act(BackboneSim& sim, std::span<const std::uint32_t> honest_found) override {
        if (private_tip_ == kNoBlock || sim.block(private_tip_).height <= sim.public_height())
            private_tip_ = sim.best_public_tip();  // lost the race; restart from public
        for (std::uint32_t qi = 0; qi < sim.adversary_quota(); ++qi)
            if (const auto id = sim.adversary_query(private_tip_)) private_tip_ = *id;
        if (!honest_found.empty() && sim.block(private_tip_).height > sim.public_height() &&
            sim.block(private_tip_).published_round == kUnpublished) {
            std::uint32_t honest_best = 0;
            for (std::uint32_t id : honest_found)
                if (sim.block(id).height > sim.block(honest_best).height) honest_best = id;
            if (sim.block(private_tip_).height >= sim.block(honest_best).height)
                sim.publish(private_tip_);  // rushes ahead of the honest find
        }
    }

private:
    std::uint32_t private_tip_ = kNoBlock;
};

struct BeaconEvents {
    bool timed_out = false;
    std::uint32_t rounds = 0;
    std::vector<int> party_bits;
    std::uint64_t adversary_blocks_in_window = 0;
    std::optional<std::uint32_t> bankruptcy_round;
};

struct BeaconRun {
    int bit = 0;
    ExecutionTrace trace;
    BeaconEvents events;
};

inline BeaconRun run_pi_beacon(const BackboneConfig& cfg, Strategy& strategy, std::uint64_t seed,
                               bool record_trace = true) {
    cfg.validate();
    BackboneSim sim(cfg, seed, record_trace);
    const std::uint32_t target = cfg.warmup + cfg.beacon_len + cfg.confirmations;
    const std::uint64_t horizon = cfg.effective_max_rounds();
    BeaconRun run;
    while (sim.round() < horizon) {
        sim.run_round(strategy);
        if (sim.all_honest_reached(target) && strategy.allows_termination(sim)) break;
    }
    run.events.rounds = sim.round();
    run.events.timed_out =
        !(sim.all_honest_reached(target) && strategy.allows_termination(sim));

    for (std::uint32_t tip : sim.honest_tips()) {
        const auto bit = sim.beacon_bit(tip);
        run.events.party_bits.push_back(bit ? *bit : -1);
    }
    const std::uint32_t tip0 = sim.honest_tips().front();
    if (const auto bit = sim.beacon_bit(tip0)) run.bit = *bit;

    if (sim.block(tip0).height >= cfg.warmup + cfg.beacon_len) {
        std::uint32_t id = ancestor_at(sim.arena(), tip0, cfg.warmup + cfg.beacon_len);
        for (std::uint32_t h = cfg.warmup + cfg.beacon_len; h > cfg.warmup; --h) {
            run.events.adversary_blocks_in_window += sim.block(id).is_adversary();
            id = sim.block(id).parent;
        }
    }
    if (record_trace) run.trace = sim.take_trace();
    return run;
}

// Earliest round at which every honest party's adopted chain satisfies the
// bankruptcy predicate, or nullopt if the trace never reaches it.
inline std::optional<std::uint32_t> detect_bankruptcy_event(const ExecutionTrace& trace,
                                                            std::uint32_t start_block,
                                                            std::uint32_t tolerated,
                                                            std::uint32_t window) {
    for (std::uint32_t r = 0; r < trace.rounds.size(); ++r) {
        bool all = true;
        for (std::uint32_t tip : trace.rounds[r].tips) {
            if (!bankruptcy_predicate(chain_from_tip(trace.arena, tip), start_block, tolerated,
                                      window)) {
                all = false;
                break;
            }
        }
        if (all) return r;
    }
    return std::nullopt;
}

// True iff either party's k-truncated chain fails to be a prefix of the
// other party's full chain.
inline bool chains_conflict(const std::vector<Block>& arena, std::uint32_t tip_a,
                            std::uint32_t tip_b, std::uint32_t k) {
    auto truncated = [&](std::uint32_t tip) {
        const std::uint32_t h = arena[tip].height;
        return ancestor_at(arena, tip, h > k ? h - k : 0);
    };
    auto is_prefix = [&](std::uint32_t a, std::uint32_t b) {
        if (arena[a].height > arena[b].height) return false;
        return ancestor_at(arena, b, arena[a].height) == a;
    };
    return !is_prefix(truncated(tip_a), tip_b) || !is_prefix(truncated(tip_b), tip_a);
}

// Fraction of fixed-horizon runs in which some round shows two honest
// parties with conflicting k-truncated chains. The horizon is independent
// of k so runs pair up exactly across k values under the same seed.
template <class StrategyFactory>
double common_prefix_violation_rate(const BackboneConfig& cfg, StrategyFactory&& make_strategy,
                                    std::uint32_t k, std::uint64_t trials, std::uint64_t seed) {
    cfg.validate();
    if (trials < 1) throw std::invalid_argument("common_prefix_violation_rate: trials must be >= 1");
    const std::uint64_t horizon = cfg.effective_max_rounds();
    std::uint64_t violations = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        auto strategy = make_strategy();
        BackboneSim sim(cfg, hash_combine(seed, t), /*record_trace=*/false);
        bool violated = false;
        for (std::uint64_t r = 0; r < horizon && !violated; ++r) {
            sim.run_round(*strategy);
            const auto& tips = sim.honest_tips();
            for (std::size_t a = 0; a < tips.size() && !violated; ++a)
                for (std::size_t b = a + 1; b < tips.size() && !violated; ++b)
                    if (chains_conflict(sim.arena(), tips[a], tips[b], k)) violated = true;
        }
        if (violated) ++violations;
    }
    return static_cast<double>(violations) / static_cast<double>(trials);
}

}  // namespace beacon::bb

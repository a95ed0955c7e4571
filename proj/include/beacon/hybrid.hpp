#pragma once

// The commit / beacon / decommit protocol with penalty escrow: m designated
// parties lock coins behind hash commitments, a chain-backed beacon round
// supplies a bit b, withheld decommitments forfeit their escrow, and the
// round outputs s = b xor f(revealed bits). Multiple rounds feed a final
// majority. Commitments are modeled as ideally hiding and binding tokens.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "beacon/extractors.hpp"
#include "beacon/forkless.hpp"
#include "beacon/rng.hpp"
#include "beacon/words.hpp"

namespace beacon::hyb {

enum class CombineKind { majority, xor_all, iterated_majority };

struct HybridConfig {
    std::uint32_t committee = 9;        // designated parties
    std::uint32_t rounds = 1;           // odd
    std::uint32_t reaction_window = 6;  // blocks allowed for commit/decommit posting
    std::uint32_t confirmations = 3;    // chain-settlement depth
    double escrow_coins = 10.0;         // locked per party per round
    CombineKind combine = CombineKind::xor_all;
    std::uint32_t start_height = 1;     // height of the agreed starting block
    std::uint32_t beacon_len = 9;       // blocks feeding each round's beacon bit (odd)
    std::uint32_t alphabet = 1u << 16;

    std::vector<std::string> violations() const {
        std::vector<std::string> out;
        if (committee < 1) out.push_back("committee: must be >= 1");
        if (rounds % 2 == 0) out.push_back("rounds: must be odd");
        if (beacon_len % 2 == 0) out.push_back("beacon_len: must be odd");
        if (escrow_coins < 0) out.push_back("escrow_coins: must be >= 0");
        if (reaction_window < 1) out.push_back("reaction_window: must be >= 1");
        if (combine == CombineKind::majority && committee % 2 == 0)
            out.push_back("committee: majority combine requires an odd committee");
        if (combine == CombineKind::iterated_majority) {
            std::uint32_t m = committee;
            while (m > 1 && m % 3 == 0) m /= 3;
            if (m != 1 || committee < 3)
                out.push_back("committee: iterated majority requires a power-of-3 committee");
        }
        if (alphabet < 2 || alphabet % 2 != 0) out.push_back("alphabet: must be even and >= 2");
        return out;
    }

    void validate() const {
        const auto out = violations();
        if (out.empty()) return;
        std::string message = "HybridConfig:";
        for (const auto& v : out) message += " [" + v + "]";
        throw std::invalid_argument(message);
    }
};

// Heights that frame one protocol round: commitments land within
// reaction_window blocks of the opening height, the beacon runs over the
// next beacon_len (+confirmation) blocks, and decommitments must land in
// the reaction window after that.
struct RoundWindows {
    std::uint64_t open = 0;              // u_j
    std::uint64_t beacon_start = 0;      // u'_j  = u_j + t + k
    std::uint64_t beacon_end = 0;        // u''_j = u'_j + n + k
    std::uint64_t decommit_deadline = 0; // u''_j + t
    std::uint64_t settled = 0;           // u''_j + t + k
    std::uint64_t next_open = 0;         // u_{j+1} = u''_j + 1
};

inline RoundWindows round_windows(const HybridConfig& cfg, std::uint64_t open) {
    RoundWindows w;
    w.open = open;
    w.beacon_start = open + cfg.reaction_window + cfg.confirmations;
    w.beacon_end = w.beacon_start + cfg.beacon_len + cfg.confirmations;
    w.decommit_deadline = w.beacon_end + cfg.reaction_window;
    w.settled = w.beacon_end + cfg.reaction_window + cfg.confirmations;
    w.next_open = w.beacon_end + 1;
    return w;
}

// Blocks one round spans from its opening to settlement: n + 2t + 3k.
inline std::uint64_t round_block_span(const HybridConfig& cfg) {
    return cfg.beacon_len + 2ull * cfg.reaction_window + 3ull * cfg.confirmations;
}

enum class EscrowStatus { locked, reclaimed, forfeited };

struct Escrow {
    std::uint32_t party = 0;
    std::uint32_t round = 0;
    std::uint64_t commitment_token = 0;  // opaque ideal commitment
    double coins = 0.0;
    std::uint64_t limit_height = 0;      // u''_j in the locking script
    EscrowStatus status = EscrowStatus::locked;
};

struct HybridRoundRecord {
    std::uint32_t round = 0;
    RoundWindows windows;
    int beacon_bit = 0;
    std::vector<int> committed;          // -1 marks a party that never committed
    std::vector<std::uint8_t> decommitted;
    std::vector<int> effective;          // d'
    int combined = 0;                    // f(d')
    int output = 0;                      // s_j
};

// Supplies the block stream the protocol consumes. Implementations must be
// deterministic for a fixed construction seed.
class ChainProvider {
public:
    virtual ~ChainProvider() = default;
    virtual Symbol next_block() = 0;
};

class UniformChainProvider : public ChainProvider {
public:
    UniformChainProvider(std::uint32_t alphabet, std::uint64_t seed)
        : alphabet_(alphabet), rng_(seed) {}
    Symbol next_block() override { return rng_.symbol(alphabet_); }

private:
    std::uint32_t alphabet_;
    Rng rng_;
};

// Fixed LSB stream; handy for exact-enumeration tests.
class ConstantBitChainProvider : public ChainProvider {
public:
    explicit ConstantBitChainProvider(int bit) : bit_(static_cast<Symbol>(bit)) {}
    Symbol next_block() override { return bit_; }

private:
    Symbol bit_;
};

// Blocks drawn from a forkless simulation, so a mining adversary can lean
// on the beacon phase.
class ForklessChainProvider : public ChainProvider {
public:
    ForklessChainProvider(const fl::ForklessConfig& cfg, fl::TwoModePolicy policy,
                          std::uint64_t seed)
        : sim_(cfg, policy, seed, /*record_trace=*/true) {}

    Symbol next_block() override {
        sim_.run_until(consumed_ + 1);
        return sim_.chain()[consumed_++];
    }

private:
    fl::ForklessSim sim_;
    std::uint64_t consumed_ = 0;
};

// The adversary corrupts a fixed subset, fills their commitments, and
// chooses which of them decommit after seeing the beacon bit and the honest
// decommitments of the round (it reacts last within the window).
class HybridAdversary {
public:
    virtual ~HybridAdversary() = default;
    virtual std::vector<std::uint32_t> corrupted(const HybridConfig& cfg) const = 0;
    // Commitment bit per corrupted party; -1 refuses to commit.
    virtual std::vector<int> choose_commitments(std::uint32_t round,
                                                std::span<const HybridRoundRecord> history) = 0;
    virtual std::vector<std::uint8_t> choose_decommits(std::uint32_t round, int beacon_bit,
                                                       std::span<const int> own_bits,
                                                       std::span<const int> honest_bits) = 0;
};

class IdleAdversary : public HybridAdversary {
public:
    std::vector<std::uint32_t> corrupted(const HybridConfig&) const override { return {}; }
    std::vector<int> choose_commitments(std::uint32_t, std::span<const HybridRoundRecord>) override {
        return {};
    }
    std::vector<std::uint8_t> choose_decommits(std::uint32_t, int, std::span<const int>,
                                               std::span<const int>) override {
        return {};
    }
};

// Corrupts a chosen subset, commits all ones, and after seeing the beacon
// bit withholds the minimum number of decommitments that flips the majority
// combine toward its desired output. Withholding costs escrow, so this is
// the strategy behind the expected-penalty analysis.
class MajorityFlipAdversary : public HybridAdversary {
public:
    MajorityFlipAdversary(std::vector<std::uint32_t> corrupted, int desired_bit)
        : corrupted_(std::move(corrupted)), desired_(desired_bit) {}

    std::vector<std::uint32_t> corrupted(const HybridConfig& cfg) const override {
        committee_ = cfg.committee;
        return corrupted_;
    }

    std::vector<int> choose_commitments(std::uint32_t, std::span<const HybridRoundRecord>) override {
        return std::vector<int>(corrupted_.size(), 1);
    }

    std::vector<std::uint8_t> choose_decommits(std::uint32_t, int beacon_bit,
                                               std::span<const int> own_bits,
                                               std::span<const int> honest_bits) override {
        std::vector<std::uint8_t> posts(own_bits.size(), 1);
        std::uint32_t ones = 0;
        for (int b : own_bits) ones += b == 1;
        for (int b : honest_bits) ones += b == 1;
        const int combined_all = 2 * ones >= committee_ ? 1 : 0;
        if ((beacon_bit ^ combined_all) == desired_) return posts;
        if (combined_all == 0) return posts;  // withholding only lowers the count
        // Withhold own one-committers until the combine drops to zero; a
        // withheld bit counts as zero. Reveal everything if that cannot work.
        std::uint32_t to_withhold = ones - (committee_ - 1) / 2;
        for (std::size_t i = 0; i < posts.size() && to_withhold > 0; ++i) {
            if (own_bits[i] == 1) {
                posts[i] = 0;
                --to_withhold;
            }
        }
        if (to_withhold > 0) return std::vector<std::uint8_t>(own_bits.size(), 1);
        return posts;
    }

private:
    std::vector<std::uint32_t> corrupted_;
    int desired_;
    mutable std::uint32_t committee_ = 0;
};

using HonestBitSource = std::function<int(std::uint32_t round, std::uint32_t party)>;

inline HonestBitSource honest_bits_from_seed(std::uint64_t seed) {
    return [seed](std::uint32_t round, std::uint32_t party) {
        Rng rng(hash_combine(hash_combine(seed, round), party));
        return static_cast<int>(rng.next_u64() & 1u);
    };
}

struct HybridResult {
    int bit = 0;
    std::vector<HybridRoundRecord> records;
    std::vector<Escrow> escrows;
    double locked = 0.0;
    double reclaimed = 0.0;
    double destroyed = 0.0;
};

inline int combine_bits(CombineKind kind, const std::vector<int>& bits) {
    switch (kind) {
        case CombineKind::majority:
            return ext::majority(bits);
        case CombineKind::iterated_majority:
            return ext::iterated_majority(bits);
        case CombineKind::xor_all: {
            int acc = 0;
            for (int b : bits) acc ^= b;
            return acc;
        }
    }
    throw std::logic_error("combine_bits: unknown combine kind");
}

inline HybridResult run_hybrid(const HybridConfig& cfg, const HonestBitSource& honest_bits,
                               HybridAdversary& adversary, ChainProvider& chain,
                               std::uint64_t seed) {
    cfg.validate();
    const auto corrupted = adversary.corrupted(cfg);
    std::vector<std::uint8_t> is_corrupted(cfg.committee, 0);
    for (auto p : corrupted) {
        if (p >= cfg.committee) throw std::invalid_argument("run_hybrid: corrupted index out of range");
        is_corrupted.at(p) = 1;
    }

    HybridResult result;
    std::vector<std::uint8_t> forfeited_ever(cfg.committee, 0);
    std::uint64_t chain_height = cfg.start_height;  // blocks consumed so far sit below this height
    auto read_beacon_bit = [&](const RoundWindows& w) {
        // Skip to the beacon window, then take the majority LSB over it.
        while (chain_height < w.beacon_start) {
            chain.next_block();
            ++chain_height;
        }
        std::uint32_t ones = 0;
        for (std::uint32_t i = 0; i < cfg.beacon_len; ++i) {
            ones += chain.next_block() & 1u;
            ++chain_height;
        }
        while (chain_height < w.beacon_end) {
            chain.next_block();
            ++chain_height;
        }
        return 2 * ones >= cfg.beacon_len ? 1 : 0;
    };

    std::uint64_t open = cfg.start_height;
    for (std::uint32_t j = 0; j < cfg.rounds; ++j) {
        const RoundWindows w = round_windows(cfg, open);
        HybridRoundRecord record;
        record.round = j;
        record.windows = w;
        record.committed.assign(cfg.committee, -1);
        record.decommitted.assign(cfg.committee, 0);
        record.effective.assign(cfg.committee, 0);

        // Commitments: honest parties draw fresh uniform bits; corrupted
        // parties commit whatever the adversary picked (-1 refuses).
        const auto adv_bits = adversary.choose_commitments(j, result.records);
        std::size_t adv_index = 0;
        for (std::uint32_t p = 0; p < cfg.committee; ++p) {
            int bit;
            if (is_corrupted[p]) {
                bit = adv_index < adv_bits.size() ? adv_bits[adv_index] : -1;
                ++adv_index;
            } else {
                bit = honest_bits(j, p) & 1;
            }
            record.committed[p] = bit;
            if (bit >= 0) {
                Escrow escrow;
                escrow.party = p;
                escrow.round = j;
                escrow.commitment_token = hash_combine(hash_combine(seed, j), p);
                escrow.coins = cfg.escrow_coins;
                escrow.limit_height = w.beacon_end;
                result.escrows.push_back(escrow);
                result.locked += cfg.escrow_coins;
            }
        }

        record.beacon_bit = read_beacon_bit(w);

        // Decommitments: honest parties always post; the adversary reacts
        // to the beacon bit and the honest reveals.
        std::vector<int> own_bits;
        std::vector<int> honest_revealed;
        for (std::uint32_t p = 0; p < cfg.committee; ++p) {
            if (is_corrupted[p]) own_bits.push_back(record.committed[p]);
            else honest_revealed.push_back(record.committed[p]);
        }
        const auto adv_decommits =
            adversary.choose_decommits(j, record.beacon_bit, own_bits, honest_revealed);
        adv_index = 0;
        for (std::uint32_t p = 0; p < cfg.committee; ++p) {
            bool posts;
            if (is_corrupted[p]) {
                posts = record.committed[p] >= 0 && adv_index < adv_decommits.size() &&
                        adv_decommits[adv_index] != 0;
                ++adv_index;
            } else {
                posts = true;
            }
            record.decommitted[p] = posts;
        }

        // Escrow settlement and effective bits with forfeit stickiness.
        for (auto& escrow : result.escrows) {
            if (escrow.round != j) continue;
            if (record.decommitted[escrow.party]) {
                escrow.status = EscrowStatus::reclaimed;
                result.reclaimed += escrow.coins;
            } else {
                escrow.status = EscrowStatus::forfeited;
                result.destroyed += escrow.coins;
            }
        }
        for (std::uint32_t p = 0; p < cfg.committee; ++p) {
            const bool revealed = record.committed[p] >= 0 && record.decommitted[p];
            record.effective[p] = (!forfeited_ever[p] && revealed) ? record.committed[p] : 0;
            if (!revealed) forfeited_ever[p] = 1;
        }

        record.combined = combine_bits(cfg.combine, record.effective);
        record.output = record.beacon_bit ^ record.combined;
        result.records.push_back(std::move(record));

        // The settlement tail of the last round still consumes the chain.
        open = w.next_open;
    }

    std::vector<int> outputs;
    outputs.reserve(cfg.rounds);
    for (const auto& r : result.records) outputs.push_back(r.output);
    result.bit = ext::majority(outputs);
    return result;
}

// The budget guard for a single-round majority-combine run: the adversary
// cannot afford even one withheld decommitment, plays within budget, and
// corrupts only a minority.
inline bool single_round_budget_guard(const HybridConfig& cfg, double invested, double reserve,
                                      const std::function<double(double, std::uint64_t)>& maxprofits,
                                      bool stays_within_budget, std::uint32_t corrupted_count) {
    cfg.validate();
    const bool penalty_unaffordable =
        reserve + maxprofits(invested, round_block_span(cfg)) < cfg.escrow_coins;
    const bool minority = 2ull * corrupted_count < cfg.committee;
    return penalty_unaffordable && stays_within_budget && minority;
}

// Maximum number of rounds an adversary may control while keeping the
// r-round xor-combine output within bias epsilon:
// floor(2 epsilon (pi/e) sqrt(r - sqrt(r))) - 1, floored at zero.
inline std::uint32_t round_control_budget(std::uint32_t r, double epsilon) {
    if (r < 2) throw std::invalid_argument("round_control_budget: r must be >= 2");
    if (!(epsilon > 0.0)) throw std::invalid_argument("round_control_budget: epsilon must be positive");
    const double rr = static_cast<double>(r);
    const double raw =
        2.0 * epsilon * (std::numbers::pi / std::numbers::e) * std::sqrt(rr - std::sqrt(rr));
    const double floored = std::floor(raw);
    return floored >= 1.0 ? static_cast<std::uint32_t>(floored) - 1 : 0;
}

// Optimal adaptive round-controller: it watches the running outputs and may
// take over at most `quota` rounds, forcing those outputs to 1. The value
// table is exact under the model where uncontrolled rounds are uniform.
class AdaptiveRoundAdversary {
public:
    AdaptiveRoundAdversary(std::uint32_t rounds, std::uint32_t quota)
        : rounds_(rounds), quota_(quota) {
        if (rounds % 2 == 0) throw std::invalid_argument("AdaptiveRoundAdversary: rounds must be odd");
        // value[m][lead + rounds][q]: success probability with m rounds left.
        const std::size_t leads = 2 * rounds + 1;
        value_.assign((rounds + 1) * leads * (quota + 1), 0.0);
        for (int lead = -static_cast<int>(rounds); lead <= static_cast<int>(rounds); ++lead)
            for (std::uint32_t q = 0; q <= quota; ++q)
                at(0, lead, q) = lead > 0 ? 1.0 : 0.0;
        for (std::uint32_t m = 1; m <= rounds; ++m) {
            for (int lead = -static_cast<int>(rounds - m); lead <= static_cast<int>(rounds - m); ++lead) {
                for (std::uint32_t q = 0; q <= quota; ++q) {
                    const double skip = 0.5 * at(m - 1, lead + 1, q) + 0.5 * at(m - 1, lead - 1, q);
                    double best = skip;
                    if (q > 0) best = std::max(best, at(m - 1, lead + 1, q - 1));
                    at(m, lead, q) = best;
                }
            }
        }
    }

    double optimal_success() const { return at(rounds_, 0, quota_); }

    bool control_now(std::uint32_t rounds_left, int lead, std::uint32_t quota_left) const {
        if (quota_left == 0) return false;
        const double skip = 0.5 * at(rounds_left - 1, lead + 1, quota_left) +
                            0.5 * at(rounds_left - 1, lead - 1, quota_left);
        return at(rounds_left - 1, lead + 1, quota_left - 1) > skip;
    }

    // One simulated run of the r-round process under optimal play; returns
    // the majority output bit.
    int play(Rng& rng) const {
        int lead = 0;
        std::uint32_t quota = quota_;
        for (std::uint32_t m = rounds_; m > 0; --m) {
            int s;
            if (control_now(m, lead, quota)) {
                --quota;
                s = 1;
            } else {
                s = static_cast<int>(rng.next_u64() & 1u);
            }
            lead += s == 1 ? 1 : -1;
        }
        return lead > 0 ? 1 : 0;
    }

private:
    double& at(std::uint32_t m, int lead, std::uint32_t q) {
        return value_[(static_cast<std::size_t>(m) * (2 * rounds_ + 1) +
                       static_cast<std::size_t>(lead + static_cast<int>(rounds_))) *
                          (quota_ + 1) +
                      q];
    }
    double at(std::uint32_t m, int lead, std::uint32_t q) const {
        return value_[(static_cast<std::size_t>(m) * (2 * rounds_ + 1) +
                       static_cast<std::size_t>(lead + static_cast<int>(rounds_))) *
                          (quota_ + 1) +
                      q];
    }

    std::uint32_t rounds_;
    std::uint32_t quota_;
    std::vector<double> value_;
};

// Runs the adaptive round-controller inside the protocol: every designated
// party is corrupted, the combine is xor, and exactly one not-yet-burned
// party commits 1 each round. Revealing everything leaves s = b xor 1
// (uniform); a controlled round with b = 1 withholds the one-committer,
// burning that party's escrow and forcing s = 1.
class AdaptiveXorControlAdversary : public HybridAdversary {
public:
    AdaptiveXorControlAdversary(const AdaptiveRoundAdversary& policy, std::uint32_t rounds,
                                std::uint32_t quota)
        : policy_(policy), rounds_(rounds), quota_left_(quota) {}

    std::vector<std::uint32_t> corrupted(const HybridConfig& cfg) const override {
        committee_ = cfg.committee;
        std::vector<std::uint32_t> all(cfg.committee);
        for (std::uint32_t p = 0; p < cfg.committee; ++p) all[p] = p;
        return all;
    }

    std::vector<int> choose_commitments(std::uint32_t, std::span<const HybridRoundRecord>) override {
        std::vector<int> bits(committee_, 0);
        designated_ = static_cast<std::uint32_t>(burned_);
        if (designated_ < committee_) bits[designated_] = 1;
        return bits;
    }

    std::vector<std::uint8_t> choose_decommits(std::uint32_t round, int beacon_bit,
                                               std::span<const int> own_bits,
                                               std::span<const int>) override {
        std::vector<std::uint8_t> posts(own_bits.size(), 1);
        const std::uint32_t rounds_left = rounds_ - round;
        int output;
        if (designated_ < committee_ && policy_.control_now(rounds_left, lead_, quota_left_)) {
            output = 1;
            if (beacon_bit == 1) {
                posts[designated_] = 0;  // burn the one-committer: f drops to 0
                ++burned_;
            }
            --quota_left_;
        } else {
            output = beacon_bit ^ (designated_ < committee_ ? 1 : 0);
        }
        lead_ += output == 1 ? 1 : -1;
        return posts;
    }

private:
    const AdaptiveRoundAdversary& policy_;
    std::uint32_t rounds_;
    std::uint32_t quota_left_;
    mutable std::uint32_t committee_ = 0;
    std::uint32_t designated_ = 0;
    std::size_t burned_ = 0;
    int lead_ = 0;
};

namespace detail {
inline bool is_hex(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isxdigit(static_cast<unsigned char>(c))) return false;
    return true;
}
}  // namespace detail

// The escrow locking script, byte-exact:
// "<tau> CHECKLOCKTIMEVERIFY IF HASH256 <c> EQUALVERIFY <pk> CHECKSIGVERIFY ENDIF"
inline std::string emit_cltv_script(std::uint64_t lock_height, const std::string& commitment_hex,
                                    const std::string& pubkey_hex) {
    if (!detail::is_hex(commitment_hex))
        throw std::invalid_argument("emit_cltv_script: commitment must be nonempty hex");
    if (!detail::is_hex(pubkey_hex))
        throw std::invalid_argument("emit_cltv_script: public key must be nonempty hex");
    return std::to_string(lock_height) + " CHECKLOCKTIMEVERIFY IF HASH256 " + commitment_hex +
           " EQUALVERIFY " + pubkey_hex + " CHECKSIGVERIFY ENDIF";
}

struct CltvScript {
    std::uint64_t lock_height = 0;
    std::string commitment_hex;
    std::string pubkey_hex;
};

inline CltvScript parse_cltv_script(const std::string& script) {
    std::vector<std::string> tokens;
    std::size_t pos = 0;
    while (pos < script.size()) {
        const std::size_t space = script.find(' ', pos);
        const std::size_t end = space == std::string::npos ? script.size() : space;
        tokens.push_back(script.substr(pos, end - pos));
        pos = end + 1;
    }
    if (tokens.size() != 9 || tokens[1] != "CHECKLOCKTIMEVERIFY" || tokens[2] != "IF" ||
        tokens[3] != "HASH256" || tokens[5] != "EQUALVERIFY" || tokens[7] != "CHECKSIGVERIFY" ||
        tokens[8] != "ENDIF")
        throw std::invalid_argument("parse_cltv_script: malformed script");
    CltvScript out;
    out.lock_height = std::stoull(tokens[0]);
    out.commitment_hex = tokens[4];
    out.pubkey_hex = tokens[6];
    if (!detail::is_hex(out.commitment_hex) || !detail::is_hex(out.pubkey_hex))
        throw std::invalid_argument("parse_cltv_script: fields must be hex");
    return out;
}

}  // namespace beacon::hyb

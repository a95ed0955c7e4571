#pragma once

// Coin accounting for an adversary. Balances are derived, not stored, so
// conservation (coins = initial + earned - spent) holds by construction;
// tests re-derive the flows from traces independently.

namespace beacon {

struct BudgetLedger {
    double initial = 0.0;
    double earned = 0.0;
    double spent = 0.0;
    bool bankrupt = false;

    double coins() const { return initial + earned - spent; }
    double net_profit() const { return earned - spent; }
};

}  // namespace beacon

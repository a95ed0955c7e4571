#pragma once

// Line-delimited trace export for backbone executions: one record per block
// up front, then one record per round and honest party. Stable field names:
// block/parent/height/symbol/creator/round_created/published_round for
// blocks, round/party/chain_tip/new_blocks for rounds.

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "beacon/backbone.hpp"

namespace beacon::exp {

inline void export_trace_jsonl(const bb::ExecutionTrace& trace, std::ostream& out) {
    using nlohmann::json;
    for (const auto& block : trace.arena) {
        json record{{"block", block.id},
                    {"parent", block.parent == bb::kNoBlock ? -1 : static_cast<long long>(block.parent)},
                    {"height", block.height},
                    {"symbol", block.symbol},
                    {"round_created", block.round_created}};
        if (block.id == 0) record["creator"] = "genesis";
        else if (block.is_adversary()) record["creator"] = "adversary";
        else record["creator"] = "honest:" + std::to_string(block.creator);
        if (block.published_round != bb::kUnpublished) record["published_round"] = block.published_round;
        out << record.dump() << '\n';
    }
    for (std::size_t r = 0; r < trace.rounds.size(); ++r) {
        const auto& round = trace.rounds[r];
        for (std::size_t p = 0; p < round.tips.size(); ++p) {
            json record{{"round", r},
                        {"party", p},
                        {"chain_tip", round.tips[p]},
                        {"new_blocks", round.published}};
            out << record.dump() << '\n';
        }
    }
}

inline void export_trace_jsonl(const bb::ExecutionTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("export_trace_jsonl: cannot open '" + path + "'");
    export_trace_jsonl(trace, out);
}

}  // namespace beacon::exp

#pragma once

#include "rustlight/bitset.hpp"
#include "rustlight/dataflow.hpp"
#include "rustlight/ir.hpp"

namespace rustlight::flow {

/// Backward may-liveness over locals. A local is live at a point if some
/// path from the point reads it before fully overwriting it. Drop and
/// CondDrop count as reads: the destructor observes the value, so a
/// borrow reachable through it must still be valid there.
struct LivenessAnalysis {
    using State = BitSet;

    State bottom(const ir::Function& fn) const {
        return BitSet(static_cast<uint32_t>(fn.locals.size()));
    }
    State boundary(const ir::Function& fn) const { return bottom(fn); }

    bool join_into(State& dst, const State& src) const {
        return dst.union_with(src);
    }

    uint64_t max_chain_height(const ir::Function& fn) const {
        return fn.locals.size() + 1;
    }

    // Backward: `in` is the state after the node, `out` the state before.
    void transfer(const ir::Function& fn, ir::NodeId n, const State& in,
                  State& out) const;
};

/// Per-node liveness plus the derived region sets the borrow analysis
/// consumes. Universal regions are live everywhere; an existential
/// region is live at a point iff it occurs in the type of a live local.
struct LivenessResult {
    std::vector<BitSet> live_before;        // per node, over locals
    std::vector<BitSet> live_after;         // per node, over locals
    std::vector<BitSet> region_live_after;  // per node, over regions
    uint64_t transfer_count = 0;
};

LivenessResult solve_liveness(const ir::Function& fn);

std::string print_liveness(const ir::Function& fn, const LivenessResult& lv);

}  // namespace rustlight::flow

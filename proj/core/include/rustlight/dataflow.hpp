#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <random>
#include <vector>

#include "rustlight/ir.hpp"

// Generic worklist solver over the one-instruction-per-node CFG.
//
// An Analysis type A supplies:
//
//   using State = ...;                 // a join-semilattice element
//   State bottom(const ir::Function&) const;
//   State boundary(const ir::Function&) const;   // state at entry (forward)
//                                                // or exit (backward)
//   bool join_into(State& dst, const State& src) const;  // dst ⊔= src,
//                                                // true iff dst changed
//   void transfer(const ir::Function&, ir::NodeId, const State& in,
//                 State& out) const;
//   uint64_t max_chain_height(const ir::Function&) const;  // bound on any
//                                                // ascending chain
//
// transfer must be monotone w.r.t. the join order; the solver checks
// convergence against max_chain_height and reports failure rather than
// looping forever, so a non-monotone transfer is caught in tests instead
// of hanging the tool.
namespace rustlight::flow {

enum class Direction { Forward, Backward };

template <typename A>
struct SolveResult {
    // Forward: in_facts[n] = state before n, out_facts[n] = after.
    // Backward: in_facts[n] = state after n (join over successors),
    // out_facts[n] = state before n.
    std::vector<typename A::State> in_facts;
    std::vector<typename A::State> out_facts;
    uint64_t transfer_count = 0;
    bool converged = true;
};

namespace detail {

inline void neighbors_of(const ir::Function& fn,
                         const std::vector<std::vector<ir::NodeId>>& preds,
                         Direction dir, ir::NodeId n, bool incoming,
                         std::vector<ir::NodeId>& out) {
    // "incoming" edges feed a node's in_facts: predecessors for forward,
    // successors for backward.
    bool want_preds = (dir == Direction::Forward) == incoming;
    if (want_preds) {
        out = preds[n];
    } else {
        fn.nodes[n].term.successors(out);
    }
}

inline std::vector<ir::NodeId> seed_order(const ir::Function& fn, Direction dir) {
    // Reverse postorder over the forward graph; backward analyses seed in
    // the opposite order. Unreachable nodes (possible in synthetic CFGs)
    // are appended at the end.
    std::vector<ir::NodeId> post;
    std::vector<uint8_t> state(fn.nodes.size(), 0);
    std::vector<std::pair<ir::NodeId, size_t>> stack{{0, 0}};
    std::vector<ir::NodeId> succ;
    state[0] = 1;
    while (!stack.empty()) {
        auto& [n, i] = stack.back();
        fn.nodes[n].term.successors(succ);
        if (i < succ.size()) {
            ir::NodeId next = succ[i++];
            if (!state[next]) {
                state[next] = 1;
                stack.emplace_back(next, 0);
            }
        } else {
            post.push_back(n);
            stack.pop_back();
        }
    }
    std::vector<ir::NodeId> order(post.rbegin(), post.rend());
    for (ir::NodeId n = 0; n < fn.nodes.size(); ++n)
        if (!state[n]) order.push_back(n);
    if (dir == Direction::Backward) std::reverse(order.begin(), order.end());
    return order;
}

}  // namespace detail

// Kildall's algorithm: FIFO worklist seeded in reverse postorder.
template <typename A>
SolveResult<A> solve(const ir::Function& fn, const A& a, Direction dir) {
    const size_t n = fn.nodes.size();
    SolveResult<A> res;
    res.in_facts.reserve(n);
    res.out_facts.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        res.in_facts.push_back(a.bottom(fn));
        res.out_facts.push_back(a.bottom(fn));
    }

    auto preds = fn.predecessors();
    bool forward = dir == Direction::Forward;
    for (ir::NodeId i = 0; i < n; ++i) {
        bool is_boundary = forward ? (i == 0)
                                   : fn.nodes[i].term.kind ==
                                         ir::Terminator::Kind::Return;
        if (is_boundary) a.join_into(res.in_facts[i], a.boundary(fn));
    }

    std::deque<ir::NodeId> work;
    std::vector<uint8_t> queued(n, 0);
    for (ir::NodeId i : detail::seed_order(fn, dir)) {
        work.push_back(i);
        queued[i] = 1;
    }

    // Each node's out state can rise at most max_chain_height times, and
    // only a rise re-queues successors; the cap has slack for the initial
    // sweep and is generous by a constant factor.
    const uint64_t cap =
        (static_cast<uint64_t>(n) + 1) * (a.max_chain_height(fn) + 2) * 4 + 64;

    std::vector<ir::NodeId> nbr;
    while (!work.empty()) {
        if (++res.transfer_count > cap) {
            res.converged = false;
            return res;
        }
        ir::NodeId node = work.front();
        work.pop_front();
        queued[node] = 0;

        typename A::State out = a.bottom(fn);
        a.transfer(fn, node, res.in_facts[node], out);
        bool changed = a.join_into(res.out_facts[node], out);
        if (!changed) continue;

        detail::neighbors_of(fn, preds, dir, node, /*incoming=*/false, nbr);
        for (ir::NodeId next : nbr) {
            if (a.join_into(res.in_facts[next], res.out_facts[node]) &&
                !queued[next]) {
                work.push_back(next);
                queued[next] = 1;
            }
        }
    }
    return res;
}

// Chaotic iteration oracle: recompute every node in a shuffled order
// until nothing changes. Same fixpoint as `solve` for monotone transfer
// functions; used to cross-check the worklist plumbing.
template <typename A>
SolveResult<A> solve_chaotic(const ir::Function& fn, const A& a, Direction dir,
                             uint64_t seed) {
    const size_t n = fn.nodes.size();
    SolveResult<A> res;
    for (size_t i = 0; i < n; ++i) {
        res.in_facts.push_back(a.bottom(fn));
        res.out_facts.push_back(a.bottom(fn));
    }
    auto preds = fn.predecessors();
    bool forward = dir == Direction::Forward;
    for (ir::NodeId i = 0; i < n; ++i) {
        bool is_boundary = forward ? (i == 0)
                                   : fn.nodes[i].term.kind ==
                                         ir::Terminator::Kind::Return;
        if (is_boundary) a.join_into(res.in_facts[i], a.boundary(fn));
    }

    std::mt19937_64 rng(seed);
    std::vector<ir::NodeId> order(n);
    for (ir::NodeId i = 0; i < n; ++i) order[i] = i;

    const uint64_t cap =
        (static_cast<uint64_t>(n) + 1) * (a.max_chain_height(fn) + 2) * 4 + 64;
    uint64_t rounds = 0;
    bool changed = true;
    std::vector<ir::NodeId> nbr;
    while (changed) {
        if (++rounds > cap) {
            res.converged = false;
            return res;
        }
        changed = false;
        std::shuffle(order.begin(), order.end(), rng);
        for (ir::NodeId node : order) {
            detail::neighbors_of(fn, preds, dir, node, /*incoming=*/true, nbr);
            for (ir::NodeId p : nbr)
                changed |= a.join_into(res.in_facts[node], res.out_facts[p]);
            typename A::State out = a.bottom(fn);
            a.transfer(fn, node, res.in_facts[node], out);
            ++res.transfer_count;
            changed |= a.join_into(res.out_facts[node], out);
        }
    }
    return res;
}

// Post-solve validation: every edge must satisfy transfer(u) ≤ in(v).
// Returns true when the claimed fixpoint really is one.
template <typename A>
bool validate_fixpoint(const ir::Function& fn, const A& a, Direction dir,
                       const SolveResult<A>& res) {
    auto preds = fn.predecessors();
    std::vector<ir::NodeId> nbr;
    for (ir::NodeId node = 0; node < fn.nodes.size(); ++node) {
        typename A::State out = a.bottom(fn);
        a.transfer(fn, node, res.in_facts[node], out);
        // out must equal the recorded out state (≤ both ways).
        {
            typename A::State probe = res.out_facts[node];
            if (a.join_into(probe, out)) return false;
        }
        detail::neighbors_of(fn, preds, dir, node, /*incoming=*/false, nbr);
        for (ir::NodeId next : nbr) {
            typename A::State probe = res.in_facts[next];
            if (a.join_into(probe, res.out_facts[node])) return false;
        }
    }
    return true;
}

}  // namespace rustlight::flow

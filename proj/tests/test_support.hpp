// Shared generators and independent oracles used by the property tests
// and the acceptance gate. Everything here is deliberately implemented
// with different algorithms than the library under test (boolean
// matrices instead of union-find, round-robin recomputation instead of
// worklists) so agreement is evidence, not tautology.
#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rustlight/bitset.hpp"
#include "rustlight/borrow_domain.hpp"
#include "rustlight/dataflow.hpp"
#include "rustlight/ir.hpp"

namespace testsup {

using rustlight::BitSet;
using rustlight::flow::BorrowState;

// --- random borrow states ---------------------------------------------------

inline BorrowState random_borrow_state(std::mt19937_64& rng, uint32_t regions,
                                       uint32_t loans) {
    BorrowState st(regions, loans);
    std::uniform_int_distribution<uint32_t> reg(0, regions - 1);
    std::bernoulli_distribution merge_coin(0.35), loan_coin(0.4), dead_coin(0.4);
    uint32_t merges = regions / 2;
    for (uint32_t i = 0; i < merges; ++i)
        if (merge_coin(rng)) st.merge(reg(rng), reg(rng));
    for (uint32_t l = 0; l < loans; ++l)
        if (loan_coin(rng)) st.add_loan(reg(rng), l);
    for (uint32_t r = 0; r < regions; ++r)
        if (dead_coin(rng)) st.dead.set(r);
    return st;
}

// --- matrix-based join oracle -----------------------------------------------

// A borrow state in explicit form: the full equivalence matrix, the loan
// set of every region (expanded to all members, not just roots), and the
// dead set. Two states are semantically equal iff their explicit forms
// are identical, which sidesteps representative-choice questions.
struct ExplicitState {
    uint32_t n = 0;
    std::vector<uint8_t> same;       // n*n equivalence matrix
    std::vector<BitSet> loans;       // per region, class loan set
    BitSet dead;

    bool operator==(const ExplicitState&) const = default;
};

inline ExplicitState explicit_form(const BorrowState& st) {
    ExplicitState e;
    e.n = st.num_regions();
    e.same.assign(static_cast<size_t>(e.n) * e.n, 0);
    e.dead = st.dead;
    e.loans.clear();
    for (uint32_t a = 0; a < e.n; ++a) {
        for (uint32_t b = 0; b < e.n; ++b)
            e.same[a * e.n + b] = st.uf.same(a, b) ? 1 : 0;
        e.loans.push_back(st.loans_of(a));
    }
    return e;
}

// Joins two states entirely with boolean-matrix arithmetic: the joined
// equivalence relation is the transitive closure of the union of the two
// relations; a region's loan set is the union of both input loan sets
// over its (joined) class; dead regions must be dead on both sides.
inline ExplicitState oracle_join(const BorrowState& a, const BorrowState& b) {
    ExplicitState ea = explicit_form(a), eb = explicit_form(b);
    ExplicitState out;
    out.n = ea.n;
    const uint32_t n = out.n;
    out.same.assign(static_cast<size_t>(n) * n, 0);
    for (size_t i = 0; i < out.same.size(); ++i)
        out.same[i] = ea.same[i] | eb.same[i];
    // Warshall closure.
    for (uint32_t k = 0; k < n; ++k)
        for (uint32_t i = 0; i < n; ++i)
            if (out.same[i * n + k])
                for (uint32_t j = 0; j < n; ++j)
                    if (out.same[k * n + j]) out.same[i * n + j] = 1;
    // Loans: union over the joined class, from both sides.
    uint32_t nl = 0;
    if (n > 0) nl = static_cast<uint32_t>(ea.loans[0].size());
    out.loans.assign(n, BitSet(nl));
    for (uint32_t r = 0; r < n; ++r)
        for (uint32_t s = 0; s < n; ++s)
            if (out.same[r * n + s]) {
                out.loans[r].union_with(ea.loans[s]);
                out.loans[r].union_with(eb.loans[s]);
            }
    // Dead: intersection.
    out.dead = ea.dead;
    out.dead.intersect_with(eb.dead);
    return out;
}

// --- random CFGs and a synthetic gen/kill analysis --------------------------

// Builds a function whose nodes carry no instructions; shapes exercise
// joins (converging edges), loops (back edges), and unreachable nodes.
inline rustlight::ir::Function random_cfg(std::mt19937_64& rng,
                                          uint32_t max_nodes) {
    using namespace rustlight::ir;
    std::uniform_int_distribution<uint32_t> ncount(1, max_nodes);
    Function fn;
    fn.name = "synthetic";
    fn.locals.push_back({rustlight::sem::type_unit(), "", false, false, {}});
    uint32_t n = ncount(rng);
    std::uniform_int_distribution<uint32_t> target(0, n - 1);
    std::uniform_int_distribution<int> kind(0, 5);
    fn.nodes.resize(n);
    bool has_return = false;
    for (uint32_t i = 0; i < n; ++i) {
        switch (kind(rng)) {
            case 0:
            case 1:
            case 2: {
                fn.nodes[i].term.kind = Terminator::Kind::Goto;
                fn.nodes[i].term.next = target(rng);
                break;
            }
            case 3:
            case 4: {
                fn.nodes[i].term.kind = Terminator::Kind::If;
                fn.nodes[i].term.cond = Operand::imm_bool(true);
                fn.nodes[i].term.next = target(rng);
                fn.nodes[i].term.alt = target(rng);
                break;
            }
            default: {
                fn.nodes[i].term.kind = Terminator::Kind::Return;
                has_return = true;
                break;
            }
        }
    }
    if (!has_return) {
        fn.nodes[n - 1].term = Terminator{};
        fn.nodes[n - 1].term.kind = Terminator::Kind::Return;
    }
    for (uint32_t i = 0; i < n; ++i)
        if (fn.nodes[i].term.kind == Terminator::Kind::Return) fn.return_node = i;
    return fn;
}

// Classic monotone bit-vector framework with per-node random gen/kill
// masks; the lattice the solver equivalence claim is easiest to falsify
// on, because every node's transfer differs.
class GenKillAnalysis {
public:
    using State = BitSet;

    GenKillAnalysis(std::mt19937_64& rng, uint32_t nodes, uint32_t bits)
        : bits_(bits) {
        std::uniform_int_distribution<uint64_t> word;
        for (uint32_t i = 0; i < nodes; ++i) {
            BitSet g(bits), k(bits), b(bits);
            for (uint32_t j = 0; j < bits; ++j) {
                uint64_t r = word(rng);
                if (r & 1) g.set(j);
                if (r & 2) k.set(j);
                if (r & 4) b.set(j);
            }
            gen_.push_back(g);
            kill_.push_back(k);
            if (i == 0) boundary_ = b;
        }
    }

    State bottom(const rustlight::ir::Function&) const { return BitSet(bits_); }
    State boundary(const rustlight::ir::Function&) const { return boundary_; }

    bool join_into(State& dst, const State& src) const {
        return dst.union_with(src);
    }

    void transfer(const rustlight::ir::Function&, rustlight::ir::NodeId n,
                  const State& in, State& out) const {
        out = in;
        out.subtract(kill_[n]);
        out.union_with(gen_[n]);
    }

    uint64_t max_chain_height(const rustlight::ir::Function&) const {
        return bits_ + 1;
    }

private:
    uint32_t bits_;
    std::vector<BitSet> gen_, kill_;
    BitSet boundary_;
};

}  // namespace testsup

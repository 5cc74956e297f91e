#pragma once

#include <string>
#include <vector>

#include "rustlight/bitset.hpp"
#include "rustlight/ir.hpp"
#include "rustlight/region_uf.hpp"

namespace rustlight::flow {

/// One loan per borrow site, plus one placeholder loan per universal
/// region. Loan ids are dense: placeholders first (id == universal index),
/// then borrow-site loans in node order, so all iteration over loans is
/// deterministic by construction.
struct Loan {
    ir::Place place;           // borrowed place (empty projections for placeholders)
    bool is_mut = false;
    sem::RegionId region = sem::kNoRegion;  // region the borrow was born into
    ir::NodeId origin = 0;     // node of the introducing assignment
    Span span;                 // borrow expression span
    bool placeholder = false;
    uint32_t universal = 0;    // valid when placeholder
    // A loan is frame-local when its place never passes through a
    // reference: the borrowed data dies with this call frame.
    bool frame_local = true;
};

/// Loan table plus outlives closure for one function; shared by every
/// state of the borrow analysis.
struct LoanTable {
    std::vector<Loan> loans;
    uint32_t num_universals = 0;
    uint32_t num_regions = 0;
    // outlives[a * num_universals + b] == true iff 'a: 'b is declared or
    // follows by reflexivity/transitivity.
    std::vector<bool> outlives;

    bool outlives_ok(uint32_t a, uint32_t b) const {
        return outlives[a * num_universals + b];
    }
};

LoanTable build_loan_table(const sem::Program& prog, const ir::Function& fn);

/// Borrow-state semilattice element: a partition of the function's
/// regions (union-find), a loan set per partition class (stored at the
/// class representative), and the set of currently dead regions.
///
/// Join is pointwise: partitions join by transitive-closure union, loan
/// sets by union over merged classes, and the dead set by intersection
/// (a region is dead only if dead on every incoming path).
struct BorrowState {
    RegionUF uf;
    std::vector<BitSet> loans;  // indexed by region id; meaningful at roots only
    BitSet dead;                // region ids currently out of scope

    BorrowState() = default;
    BorrowState(uint32_t num_regions, uint32_t num_loans)
        : uf(num_regions), loans(num_regions, BitSet(num_loans)), dead(num_regions) {}

    uint32_t num_regions() const { return uf.size(); }

    const BitSet& loans_of(sem::RegionId r) const { return loans[uf.find(r)]; }

    bool add_loan(sem::RegionId r, uint32_t loan) {
        BitSet& s = loans[uf.find(r)];
        if (s.test(loan)) return false;
        s.set(loan);
        return true;
    }

    bool flow_loans(sem::RegionId from, sem::RegionId to) {
        sem::RegionId a = uf.find(from), b = uf.find(to);
        if (a == b) return false;
        return loans[b].union_with(loans[a]);
    }

    // Merge the classes of a and b (invariance); loan sets are unioned
    // into the surviving representative.
    bool merge(sem::RegionId a, sem::RegionId b) {
        sem::RegionId ra = uf.find(a), rb = uf.find(b);
        if (ra == rb) return false;
        sem::RegionId root = uf.unite(ra, rb);
        sem::RegionId other = (root == ra) ? rb : ra;
        loans[root].union_with(loans[other]);
        loans[other].clear();
        return true;
    }

    // True iff no member of r's class is alive.
    bool class_fully_dead(sem::RegionId r) const {
        sem::RegionId root = uf.find(r);
        for (uint32_t i = 0; i < uf.size(); ++i)
            if (uf.find(i) == root && !dead.test(i)) return false;
        return true;
    }

    bool equal(const BorrowState& other) const {
        if (!uf.equal(other.uf)) return false;
        if (!(dead == other.dead)) return false;
        for (uint32_t r = 0; r < uf.size(); ++r) {
            if (uf.find(r) != r) continue;  // roots carry the loan sets
            if (!(loans[r] == other.loans[r])) return false;
        }
        return true;
    }
};

/// Least upper bound: out := out ⊔ in. Returns true when out changed.
bool borrow_join_into(BorrowState& out, const BorrowState& in);

/// Partial order induced by the join: a ⊑ b iff a ⊔ b == b.
bool borrow_leq(const BorrowState& a, const BorrowState& b);

std::string print_borrow_state(const BorrowState& st, const LoanTable& table);
std::string print_loan(const Loan& loan, uint32_t id);

}  // namespace rustlight::flow

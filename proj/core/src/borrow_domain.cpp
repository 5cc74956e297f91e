#include "rustlight/borrow_domain.hpp"

#include <sstream>

namespace rustlight::flow {

// A borrowed place is frame-local unless its path passes through a
// reference; dereferencing a Box stays within data owned by this frame,
// dereferencing a Ref crosses into a caller's frame.
static bool place_frame_local(const sem::Program& prog, const ir::Function& fn,
                              const ir::Place& pl) {
    for (size_t i = 0; i < pl.proj.size(); ++i) {
        if (pl.proj[i].kind != ir::Projection::Kind::Deref) continue;
        ir::Place prefix{pl.local,
                         {pl.proj.begin(), pl.proj.begin() + static_cast<long>(i)}};
        sem::TypePtr base = ir::place_type(prog, fn, prefix);
        if (base && base->kind == sem::TypeKind::Ref) return false;
    }
    return true;
}

LoanTable build_loan_table(const sem::Program& prog, const ir::Function& fn) {
    LoanTable table;
    table.num_universals = fn.num_universals;
    table.num_regions = fn.num_regions;

    for (uint32_t u = 0; u < fn.num_universals; ++u) {
        Loan l;
        l.placeholder = true;
        l.universal = u;
        l.region = u;
        l.frame_local = false;
        table.loans.push_back(std::move(l));
    }
    for (ir::NodeId n = 0; n < fn.nodes.size(); ++n) {
        const auto& node = fn.nodes[n];
        if (!node.instr || node.instr->kind != ir::Instr::Kind::Assign) continue;
        const ir::Rvalue& rv = node.instr->rv;
        if (rv.kind != ir::Rvalue::Kind::Ref) continue;
        Loan l;
        l.place = rv.ref_place;
        l.is_mut = rv.ref_mut;
        l.region = rv.ref_region;
        l.origin = n;
        l.span = node.instr->span;
        l.frame_local = place_frame_local(prog, fn, rv.ref_place);
        table.loans.push_back(std::move(l));
    }

    uint32_t n = fn.num_universals;
    table.outlives.assign(static_cast<size_t>(n) * n, false);
    for (uint32_t u = 0; u < n; ++u) table.outlives[u * n + u] = true;
    for (const auto& p : fn.outlives)
        if (p.longer < n && p.shorter < n) table.outlives[p.longer * n + p.shorter] = true;
    for (uint32_t k = 0; k < n; ++k)
        for (uint32_t i = 0; i < n; ++i)
            for (uint32_t j = 0; j < n; ++j)
                if (table.outlives[i * n + k] && table.outlives[k * n + j])
                    table.outlives[i * n + j] = true;
    return table;
}

bool borrow_join_into(BorrowState& out, const BorrowState& in) {
    bool changed = false;
    // 1. Partition join: unite every pair that `in` considers equal.
    for (uint32_t r = 0; r < in.uf.size(); ++r) {
        sem::RegionId rep = in.uf.find(r);
        if (rep != r && !out.uf.same(r, rep)) {
            out.merge(r, rep);
            changed = true;
        }
    }
    // 2. Loan-set join at the (now coarser) classes of `out`.
    for (uint32_t r = 0; r < in.uf.size(); ++r) {
        if (in.uf.find(r) != r) continue;
        if (out.loans[out.uf.find(r)].union_with(in.loans[r])) changed = true;
    }
    // 3. Dead set: a region is dead only if dead along every path.
    if (out.dead.intersect_with(in.dead)) changed = true;
    return changed;
}

bool borrow_leq(const BorrowState& a, const BorrowState& b) {
    BorrowState probe = b;
    return !borrow_join_into(probe, a);
}

std::string print_loan(const Loan& loan, uint32_t id) {
    std::ostringstream os;
    if (loan.placeholder) {
        os << "placeholder('" << loan.universal << ")";
        return os.str();
    }
    os << "L" << id << " = " << (loan.is_mut ? "&'" : "&'") << loan.region
       << (loan.is_mut ? " mut " : " ");
    std::string base = "_" + std::to_string(loan.place.local);
    for (const auto& pr : loan.place.proj) {
        switch (pr.kind) {
            case ir::Projection::Kind::Deref: base = "(*" + base + ")"; break;
            case ir::Projection::Kind::Field:
                base += "." + std::to_string(pr.index);
                break;
            case ir::Projection::Kind::Downcast:
                base = "(" + base + " as v" + std::to_string(pr.index) + ")";
                break;
        }
    }
    os << base << " @ bb" << loan.origin;
    return os.str();
}

std::string print_borrow_state(const BorrowState& st, const LoanTable& table) {
    std::ostringstream os;
    bool first_class = true;
    for (uint32_t r = 0; r < st.uf.size(); ++r) {
        if (st.uf.find(r) != r) continue;
        // Collect class members.
        std::vector<uint32_t> members;
        for (uint32_t i = 0; i < st.uf.size(); ++i)
            if (st.uf.find(i) == r) members.push_back(i);
        if (!first_class) os << "  ";
        first_class = false;
        os << "{";
        for (size_t i = 0; i < members.size(); ++i)
            os << (i ? " " : "") << "'" << members[i];
        os << "}:{";
        bool first_loan = true;
        for (uint32_t l = 0; l < table.loans.size(); ++l) {
            if (!st.loans[r].test(l)) continue;
            if (!first_loan) os << " ";
            first_loan = false;
            if (table.loans[l].placeholder)
                os << "p'" << table.loans[l].universal;
            else
                os << "L" << l;
        }
        os << "}";
    }
    bool any_dead = false;
    for (uint32_t r = 0; r < st.dead.size(); ++r) {
        if (!st.dead.test(r)) continue;
        os << (any_dead ? " '" : "  dead: '") << r;
        any_dead = true;
    }
    return os.str();
}

}  // namespace rustlight::flow

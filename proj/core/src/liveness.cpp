#include "rustlight/liveness.hpp"

#include <sstream>

namespace rustlight::flow {

static void gen_operand(BitSet& st, const ir::Operand& op) {
    if (op.is_place()) st.set(op.place.local);
}

// Reading a projected place also reads every local on its path; the only
// local involved is the base, so gen is just the base local.
static void gen_place(BitSet& st, const ir::Place& p) { st.set(p.local); }

void LivenessAnalysis::transfer(const ir::Function& fn, ir::NodeId n,
                                const State& in, State& out) const {
    out = in;
    const ir::Node& node = fn.nodes[n];

    // Terminator first conceptually happens last, but kill/gen for the
    // instruction and terminator never overlap within one node (an
    // instruction node always ends in Goto), so order is free.
    const ir::Terminator& t = node.term;
    switch (t.kind) {
        case ir::Terminator::Kind::If: gen_operand(out, t.cond); break;
        case ir::Terminator::Kind::Switch: gen_place(out, t.scrutinee); break;
        case ir::Terminator::Kind::Call: {
            if (t.dest.proj.empty())
                out.reset(t.dest.local);
            else
                gen_place(out, t.dest);
            for (const auto& a : t.args) gen_operand(out, a);
            break;
        }
        case ir::Terminator::Kind::Return:
            if (fn.local_type(0) &&
                fn.local_type(0)->kind != sem::TypeKind::Unit)
                out.set(0);
            break;
        case ir::Terminator::Kind::Goto: break;
    }

    if (node.instr) {
        const ir::Instr& ins = *node.instr;
        switch (ins.kind) {
            case ir::Instr::Kind::Assign: {
                // Kill before gen: a full overwrite of a local ends its
                // previous live range; a projected store reads the base.
                if (ins.dest.proj.empty())
                    out.reset(ins.dest.local);
                else
                    gen_place(out, ins.dest);
                const ir::Rvalue& rv = ins.rv;
                switch (rv.kind) {
                    case ir::Rvalue::Kind::Use:
                    case ir::Rvalue::Kind::Box:
                    case ir::Rvalue::Kind::Unary:
                        gen_operand(out, rv.a);
                        break;
                    case ir::Rvalue::Kind::Binary:
                        gen_operand(out, rv.a);
                        gen_operand(out, rv.b);
                        break;
                    case ir::Rvalue::Kind::Ref:
                        gen_place(out, rv.ref_place);
                        break;
                    case ir::Rvalue::Kind::Aggregate:
                        for (const auto& e : rv.elems) gen_operand(out, e);
                        break;
                }
                break;
            }
            case ir::Instr::Kind::Drop:
                gen_place(out, ins.dest);
                break;
            case ir::Instr::Kind::CondDrop:
                gen_place(out, ins.dest);
                out.set(ins.flag);
                break;
            case ir::Instr::Kind::StorageDead:
                out.reset(ins.dest.local);
                break;
            case ir::Instr::Kind::Nop: break;
        }
    }
}

LivenessResult solve_liveness(const ir::Function& fn) {
    LivenessAnalysis a;
    auto solved = solve(fn, a, Direction::Backward);

    LivenessResult res;
    res.live_after = std::move(solved.in_facts);
    res.live_before = std::move(solved.out_facts);
    res.transfer_count = solved.transfer_count;

    res.region_live_after.reserve(fn.nodes.size());
    std::vector<sem::RegionId> regions;
    for (ir::NodeId n = 0; n < fn.nodes.size(); ++n) {
        BitSet rl(fn.num_regions);
        for (uint32_t u = 0; u < fn.num_universals; ++u) rl.set(u);
        for (uint32_t l = 0; l < fn.locals.size(); ++l) {
            if (!res.live_after[n].test(l)) continue;
            regions.clear();
            sem::collect_regions(fn.local_type(l), regions);
            for (sem::RegionId r : regions)
                if (r != sem::kNoRegion && r < fn.num_regions) rl.set(r);
        }
        res.region_live_after.push_back(std::move(rl));
    }
    return res;
}

std::string print_liveness(const ir::Function& fn, const LivenessResult& lv) {
    std::ostringstream os;
    for (ir::NodeId n = 0; n < fn.nodes.size(); ++n) {
        os << "bb" << n << ": live-before {";
        bool first = true;
        for (uint32_t l = 0; l < fn.locals.size(); ++l)
            if (lv.live_before[n].test(l)) {
                os << (first ? "" : " ") << "_" << l;
                first = false;
            }
        os << "}  live-after {";
        first = true;
        for (uint32_t l = 0; l < fn.locals.size(); ++l)
            if (lv.live_after[n].test(l)) {
                os << (first ? "" : " ") << "_" << l;
                first = false;
            }
        os << "}  regions-after {";
        first = true;
        for (uint32_t r = 0; r < fn.num_regions; ++r)
            if (lv.region_live_after[n].test(r)) {
                os << (first ? "" : " ") << "'" << r;
                first = false;
            }
        os << "}\n";
    }
    return os.str();
}

}  // namespace rustlight::flow

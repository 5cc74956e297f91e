#include "rustlight/init_analysis.hpp"

namespace rustlight::flow {

InitAnalysis::State InitAnalysis::boundary(const ir::Function& fn) const {
    State s{BitSet(paths_->size()), BitSet(paths_->size())};
    for (ir::LocalId l = 0; l < fn.locals.size(); ++l) {
        PathId root = paths_->local_root(l);
        if (l >= 1 && l <= fn.num_params) {
            s.init.union_with(paths_->subtree(root));
        } else {
            s.uninit.union_with(paths_->subtree(root));
        }
    }
    return s;
}

void InitAnalysis::apply_deinit(State& s, PathId p) const {
    s.init.subtract(paths_->subtree(p));
    s.uninit.union_with(paths_->subtree(p));
}

void InitAnalysis::apply_init(State& s, PathId p) const {
    s.init.union_with(paths_->subtree(p));
    s.uninit.subtract(paths_->subtree(p));
}

void InitAnalysis::transfer(const ir::Function& fn, ir::NodeId n, const State& in,
                            State& out) const {
    out = in;

    auto read_operand = [&](const ir::Operand& op) {
        if (op.kind != ir::Operand::Kind::Move) return;
        auto canon = paths_->canonical_move_place(*prog_, fn, op.place);
        if (!canon) return;  // illegal move; diagnosed by the move checker
        PathId p = paths_->find(*canon);
        if (p != kNoPath) apply_deinit(out, p);
    };
    auto write_place = [&](const ir::Place& pl) {
        // Writes through a Deref do not change the pointee's tracked
        // state (locals own no tracked paths behind pointers).
        for (const auto& pr : pl.proj)
            if (pr.kind == ir::Projection::Kind::Deref) return;
        PathId p = paths_->find(pl);
        if (p != kNoPath) apply_init(out, p);
    };

    const ir::Node& node = fn.nodes[n];
    if (node.instr) {
        const ir::Instr& in_i = *node.instr;
        switch (in_i.kind) {
            case ir::Instr::Kind::Assign:
                switch (in_i.rv.kind) {
                    case ir::Rvalue::Kind::Use:
                    case ir::Rvalue::Kind::Box:
                    case ir::Rvalue::Kind::Unary:
                        read_operand(in_i.rv.a);
                        break;
                    case ir::Rvalue::Kind::Binary:
                        read_operand(in_i.rv.a);
                        read_operand(in_i.rv.b);
                        break;
                    case ir::Rvalue::Kind::Aggregate:
                        for (const auto& op : in_i.rv.elems) read_operand(op);
                        break;
                    case ir::Rvalue::Kind::Ref: break;
                }
                write_place(in_i.dest);
                break;
            case ir::Instr::Kind::Drop:
            case ir::Instr::Kind::CondDrop:
            case ir::Instr::Kind::StorageDead: {
                PathId p = paths_->find(in_i.dest);
                if (p != kNoPath) apply_deinit(out, p);
                break;
            }
            case ir::Instr::Kind::Nop: break;
        }
    }
    const ir::Terminator& t = node.term;
    switch (t.kind) {
        case ir::Terminator::Kind::If: read_operand(t.cond); break;
        case ir::Terminator::Kind::Call:
            for (const auto& a : t.args) read_operand(a);
            write_place(t.dest);
            break;
        default: break;
    }
}

}  // namespace rustlight::flow

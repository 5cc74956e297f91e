#include "rustlight/move_check.hpp"

#include <set>
#include <tuple>

#include "rustlight/init_analysis.hpp"

namespace rustlight {
namespace {

using flow::BitSet;
using flow::InitAnalysis;
using flow::kNoPath;
using flow::MovePaths;
using flow::PathId;

// Tracks which locals have ever been assigned (for the immutable
// reassignment check). StorageDead resets the bit so loop-scoped
// re-declarations start fresh.
class EverAssigned {
public:
    using State = BitSet;

    State bottom(const ir::Function& fn) const { return BitSet(fn.locals.size()); }

    State boundary(const ir::Function& fn) const {
        BitSet s(fn.locals.size());
        for (uint32_t i = 1; i <= fn.num_params; ++i) s.set(i);
        return s;
    }

    bool join_into(State& dst, const State& src) const {
        return dst.union_with(src);
    }

    void transfer(const ir::Function& fn, ir::NodeId n, const State& in,
                  State& out) const {
        out = in;
        const ir::Node& node = fn.nodes[n];
        if (node.instr) {
            const ir::Instr& i = *node.instr;
            if (i.kind == ir::Instr::Kind::Assign && i.dest.proj.empty())
                out.set(i.dest.local);
            if (i.kind == ir::Instr::Kind::StorageDead) out.reset(i.dest.local);
        }
        if (node.term.kind == ir::Terminator::Kind::Call &&
            node.term.dest.proj.empty())
            out.set(node.term.dest.local);
    }

    uint64_t max_chain_height(const ir::Function& fn) const {
        return fn.locals.size() + 1;
    }
};

class Checker {
public:
    Checker(const sem::Program& prog, const ir::Function& fn, DiagnosticBag& diags)
        : prog_(prog),
          fn_(fn),
          diags_(diags),
          paths_(MovePaths::build(prog, fn)),
          analysis_(prog, paths_) {}

    void run() {
        auto init = flow::solve(fn_, analysis_, flow::Direction::Forward);
        if (!init.converged) {
            diags_.report(DiagCode::InternalError, Span{},
                          "initialization analysis did not converge in " + fn_.name);
            return;
        }
        EverAssigned ea;
        auto assigned = flow::solve(fn_, ea, flow::Direction::Forward);

        collect_move_sites();

        for (ir::NodeId n = 0; n < fn_.nodes.size(); ++n) {
            // In-node evaluation order: reads, then the write, so checks
            // run against a state threaded through the same order.
            flow::InitState state = init.in_facts[n];
            check_node(n, state, assigned.in_facts[n]);
        }
        flush();
    }

private:
    const sem::Program& prog_;
    const ir::Function& fn_;
    DiagnosticBag& diags_;
    MovePaths paths_;
    InitAnalysis analysis_;
    BitSet move_sites_{0};
    std::set<std::tuple<int, uint32_t, std::string>> emitted_;
    std::vector<Diagnostic> pending_;

    void report(DiagCode code, Span span, std::string msg) {
        auto key = std::make_tuple(static_cast<int>(code), span.lo, msg);
        if (!emitted_.insert(key).second) return;
        pending_.push_back(Diagnostic{code, std::move(msg), span, {}, {}});
    }

    void flush() {
        for (auto& d : pending_) diags_.report(std::move(d));
    }

    // Paths that some instruction moves or drops; used to distinguish
    // "moved" from "never initialized" wording.
    void collect_move_sites() {
        move_sites_ = BitSet(paths_.size());
        for (const ir::Node& node : fn_.nodes) {
            auto on_move = [&](const ir::Operand& op) {
                if (op.kind != ir::Operand::Kind::Move) return;
                if (auto c = paths_.canonical_move_place(prog_, fn_, op.place)) {
                    PathId p = paths_.find(*c);
                    if (p != kNoPath) move_sites_.union_with(paths_.subtree(p));
                }
            };
            if (node.instr && node.instr->kind == ir::Instr::Kind::Assign) {
                visit_rvalue_operands(node.instr->rv, on_move);
            }
            if (node.instr && node.instr->kind == ir::Instr::Kind::Drop) {
                PathId p = paths_.find(node.instr->dest);
                if (p != kNoPath) move_sites_.union_with(paths_.subtree(p));
            }
            if (node.term.kind == ir::Terminator::Kind::Call) {
                for (const auto& a : node.term.args) on_move(a);
            }
        }
    }

    template <typename F>
    static void visit_rvalue_operands(const ir::Rvalue& rv, F&& f) {
        switch (rv.kind) {
            case ir::Rvalue::Kind::Use:
            case ir::Rvalue::Kind::Box:
            case ir::Rvalue::Kind::Unary: f(rv.a); break;
            case ir::Rvalue::Kind::Binary:
                f(rv.a);
                f(rv.b);
                break;
            case ir::Rvalue::Kind::Aggregate:
                for (const auto& op : rv.elems) f(op);
                break;
            case ir::Rvalue::Kind::Ref: break;
        }
    }

    bool definitely_init(const flow::InitState& s, PathId p) const {
        return !paths_.subtree(p).intersects(s.uninit);
    }

    // Wording depends on whether anything overlapping was ever moved.
    DiagCode uninit_code(const flow::InitState& s, PathId p, DiagCode moved_code) {
        BitSet overlap = paths_.subtree(p);
        overlap.intersect_with(s.uninit);
        return overlap.intersects(move_sites_) ? moved_code : DiagCode::UseOfUninit;
    }

    void check_read(const flow::InitState& s, const ir::Place& place, Span span,
                    bool borrow) {
        PathId p = paths_.deref_free_prefix(place);
        if (definitely_init(s, p)) return;
        DiagCode code =
            uninit_code(s, p, borrow ? DiagCode::BorrowAfterMove : DiagCode::UseAfterMove);
        std::string what = paths_.describe(p, prog_, fn_);
        if (code == DiagCode::UseOfUninit) {
            report(code, span,
                   (borrow ? "borrow of possibly-uninitialized value " : "use of "
                             "possibly-uninitialized value ") + what);
        } else {
            report(code, span,
                   (borrow ? "borrow of moved value " : "use of moved value ") + what);
        }
    }

    void check_move(flow::InitState& s, const ir::Operand& op, Span span) {
        if (!op.is_place()) return;
        if (op.kind == ir::Operand::Kind::Copy) {
            check_read(s, op.place, span, false);
            return;
        }
        auto canon = paths_.canonical_move_place(prog_, fn_, op.place);
        if (!canon) {
            // Walk to the offending deref to pick the right wording.
            sem::TypePtr t = fn_.locals[op.place.local].type;
            uint32_t variant = 0;
            for (size_t i = 0; i < op.place.proj.size(); ++i) {
                const auto& pr = op.place.proj[i];
                if (pr.kind == ir::Projection::Kind::Deref) {
                    if (t->kind == sem::Type::Kind::Ref) {
                        report(DiagCode::CannotMoveOutOfReference, span,
                               "cannot move out of " +
                                   place_text(op.place) + " which is behind a " +
                                   (t->ref_mut ? "`&mut` reference" : "`&` reference"));
                    } else {
                        report(DiagCode::UnsupportedPartialBoxMove, span,
                               "cannot move a projection out of a box; move the "
                               "whole boxed value first");
                    }
                    return;
                }
                if (pr.kind == ir::Projection::Kind::Downcast) {
                    variant = pr.index;
                } else {
                    t = prog_.adts[t->adt].variants[variant].fields[pr.index].type;
                    variant = 0;
                }
            }
            return;
        }
        check_read(s, *canon, span, false);
        PathId p = paths_.find(*canon);
        if (p != kNoPath) analysis_.apply_deinit(s, p);
    }

    std::string place_text(const ir::Place& p) const {
        return ir::print_place(p, prog_, fn_);
    }

    void check_write(flow::InitState& s, const BitSet& assigned,
                     const ir::Place& dest, Span span) {
        bool through_deref = false;
        for (const auto& pr : dest.proj)
            if (pr.kind == ir::Projection::Kind::Deref) through_deref = true;

        if (through_deref) {
            check_read(s, dest, span, false);  // prefix must be navigable
            return;
        }
        if (!dest.proj.empty()) {
            // Ancestors must be at least possibly initialized: writing a
            // field neither resurrects a moved container nor fills in a
            // wholly uninitialized one.
            PathId p = paths_.find(dest);
            for (PathId a = p == kNoPath ? kNoPath : paths_.data(p).parent;
                 a != kNoPath; a = paths_.data(a).parent) {
                if (!s.init.test(a)) {
                    bool moved = move_sites_.test(a);
                    report(moved ? DiagCode::UseAfterMove : DiagCode::UseOfUninit,
                           span,
                           std::string("cannot assign to part of a ") +
                               (moved ? "moved" : "possibly-uninitialized") +
                               " value: " + paths_.describe(a, prog_, fn_));
                    break;
                }
            }
            PathId pd = paths_.find(dest);
            if (pd != kNoPath) analysis_.apply_init(s, pd);
            return;
        }

        const ir::LocalDecl& decl = fn_.locals[dest.local];
        if (!decl.name.empty() && !decl.user_mut && assigned.test(dest.local)) {
            report(DiagCode::AssignToImmutable, span,
                   "cannot assign twice to immutable variable `" + decl.name + "`");
        }
        PathId pd = paths_.find(dest);
        if (pd != kNoPath) analysis_.apply_init(s, pd);
    }

    void check_node(ir::NodeId n, flow::InitState& state, const BitSet& assigned) {
        const ir::Node& node = fn_.nodes[n];
        if (node.instr) {
            const ir::Instr& in = *node.instr;
            switch (in.kind) {
                case ir::Instr::Kind::Assign: {
                    if (in.rv.kind == ir::Rvalue::Kind::Ref) {
                        check_read(state, in.rv.ref_place, in.span, /*borrow=*/true);
                    } else {
                        visit_rvalue_operands(in.rv, [&](const ir::Operand& op) {
                            check_move(state, op, in.span);
                        });
                    }
                    check_write(state, assigned, in.dest, in.span);
                    break;
                }
                case ir::Instr::Kind::Drop:
                case ir::Instr::Kind::CondDrop:
                case ir::Instr::Kind::StorageDead:
                case ir::Instr::Kind::Nop: break;
            }
        }
        const ir::Terminator& t = node.term;
        switch (t.kind) {
            case ir::Terminator::Kind::If: {
                ir::Operand op = t.cond;
                check_move(state, op, t.span);
                break;
            }
            case ir::Terminator::Kind::Switch:
                check_read(state, t.scrutinee, t.span, false);
                break;
            case ir::Terminator::Kind::Call: {
                for (const auto& a : t.args) check_move(state, a, t.span);
                check_write(state, assigned, t.dest, t.span);
                break;
            }
            case ir::Terminator::Kind::Return: {
                const sem::TypePtr& rt = fn_.locals[0].type;
                if (rt && rt->kind != sem::Type::Kind::Unit &&
                    rt->kind != sem::Type::Kind::Error &&
                    !definitely_init(state, paths_.local_root(0))) {
                    report(DiagCode::MissingReturnValue, t.span,
                           "not all control-flow paths return a value in `" +
                               fn_.name + "`");
                }
                break;
            }
            case ir::Terminator::Kind::Goto: break;
        }
    }
};

}  // namespace

void move_check(const sem::Program& prog, const ir::Function& fn,
                DiagnosticBag& diags) {
    Checker(prog, fn, diags).run();
}

}  // namespace rustlight

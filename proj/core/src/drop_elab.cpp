#include "rustlight/drop_elab.hpp"

#include <set>

#include "rustlight/dataflow.hpp"

namespace rustlight::flow {

namespace {

ir::Instr drop_instr(ir::Place p, Span sp) {
    ir::Instr ins;
    ins.kind = ir::Instr::Kind::Drop;
    ins.dest = std::move(p);
    ins.span = sp;
    return ins;
}

ir::Instr cond_drop_instr(ir::Place p, ir::LocalId flag, Span sp) {
    ir::Instr ins;
    ins.kind = ir::Instr::Kind::CondDrop;
    ins.dest = std::move(p);
    ins.flag = flag;
    ins.span = sp;
    return ins;
}

ir::Instr flag_set_instr(ir::LocalId flag, bool value, Span sp) {
    ir::Instr ins;
    ins.kind = ir::Instr::Kind::Assign;
    ins.dest = ir::Place::base(flag);
    ins.rv.kind = ir::Rvalue::Kind::Use;
    ins.rv.a = ir::Operand::imm_bool(value);
    ins.span = sp;
    return ins;
}

struct Elaborator {
    const sem::Program& prog;
    ir::Function& fn;
    MovePaths paths;
    std::vector<InitState> state_at;  // indexed by pre-elaboration node id
    std::set<PathId> flagged;
    std::vector<PathId> flag_order;
    std::vector<ir::LocalId> flag_local;  // per path
    uint32_t shift = 0;
    size_t orig_count = 0;
    DropElabStats stats;

    Elaborator(const sem::Program& p, ir::Function& f)
        : prog(p), fn(f), paths(MovePaths::build(p, f)) {}

    bool def_init(PathId p, const InitState& st) const {
        return !st.uninit.intersects(paths.subtree(p));
    }
    bool def_uninit(PathId p, const InitState& st) const {
        return !st.init.intersects(paths.subtree(p));
    }

    // A struct whose field paths are tracked can be dropped field by
    // field; everything else ambiguous needs a runtime flag.
    bool struct_with_children(PathId p) const {
        const auto& pd = paths.data(p);
        if (pd.children.empty()) return false;
        const sem::TypePtr& t = pd.type;
        return t && t->kind == sem::Type::Kind::Adt && !prog.adts[t->adt].is_enum;
    }

    void scan_flags(PathId p, const InitState& st) {
        if (!prog.needs_drop(paths.data(p).type)) return;
        if (def_init(p, st) || def_uninit(p, st)) return;
        if (struct_with_children(p)) {
            for (PathId c : paths.data(p).children) scan_flags(c, st);
            return;
        }
        flagged.insert(p);
    }

    void plan_drop(PathId p, const InitState& st, Span sp,
                   std::vector<ir::Instr>& out) {
        const auto& pd = paths.data(p);
        if (!prog.needs_drop(pd.type)) return;
        if (def_uninit(p, st)) {
            ++stats.drops_removed;
            return;
        }
        bool flagged_path = flag_local[p] != UINT32_MAX;
        if (def_init(p, st) && !flagged_path) {
            out.push_back(drop_instr(pd.place, sp));
            ++stats.drops_kept;
            return;
        }
        if (!def_init(p, st) && struct_with_children(p)) {
            ++stats.struct_expansions;
            const sem::Adt& adt = prog.adts[pd.type->adt];
            for (uint32_t i = 0; i < adt.variants[0].fields.size(); ++i) {
                ir::Place child = pd.place;
                child.proj.push_back(
                    {ir::Projection::Kind::Field, i});
                PathId c = paths.find(child);
                if (c != kNoPath) plan_drop(c, st, sp, out);
            }
            return;
        }
        out.push_back(cond_drop_instr(pd.place, flag_local[p], sp));
        ++stats.cond_drops;
    }

    // Inserts `seq` as a chain of fresh nodes between `n` and its single
    // successor. Returns the last node of the chain.
    ir::NodeId splice_after(ir::NodeId n, const std::vector<ir::Instr>& seq) {
        ir::NodeId prev = n;
        for (const ir::Instr& ins : seq) {
            ir::NodeId succ = fn.nodes[prev].term.next;
            ir::NodeId id = static_cast<ir::NodeId>(fn.nodes.size());
            ir::Node nd;
            nd.instr = ins;
            nd.term.kind = ir::Terminator::Kind::Goto;
            nd.term.next = succ;
            fn.nodes.push_back(std::move(nd));
            fn.nodes[prev].term.next = id;
            prev = id;
        }
        return prev;
    }

    void collect_move_places(const ir::Node& node,
                             std::vector<const ir::Place*>& out) const {
        out.clear();
        auto visit = [&](const ir::Operand& op) {
            if (op.kind == ir::Operand::Kind::Move) out.push_back(&op.place);
        };
        if (node.instr && node.instr->kind == ir::Instr::Kind::Assign) {
            const ir::Rvalue& rv = node.instr->rv;
            switch (rv.kind) {
                case ir::Rvalue::Kind::Use:
                case ir::Rvalue::Kind::Box:
                case ir::Rvalue::Kind::Unary:
                    visit(rv.a);
                    break;
                case ir::Rvalue::Kind::Binary:
                    visit(rv.a);
                    visit(rv.b);
                    break;
                case ir::Rvalue::Kind::Aggregate:
                    for (const auto& e : rv.elems) visit(e);
                    break;
                case ir::Rvalue::Kind::Ref: break;
            }
        }
        if (node.term.kind == ir::Terminator::Kind::Call)
            for (const auto& a : node.term.args) visit(a);
    }

    void flag_updates_for(ir::NodeId nn, const ir::Place* dest,
                          std::vector<std::pair<ir::LocalId, bool>>& updates) {
        std::vector<const ir::Place*> moves;
        collect_move_places(fn.nodes[nn], moves);
        for (const ir::Place* mp : moves) {
            auto canon = paths.canonical_move_place(prog, fn, *mp);
            if (!canon) continue;
            PathId m = paths.find(*canon);
            if (m == kNoPath) continue;
            for (PathId f : flag_order) {
                if (paths.subtree(m).test(f)) {
                    updates.push_back({flag_local[f], false});
                } else if (paths.subtree(f).test(m) &&
                           prog.needs_drop(paths.data(m).type)) {
                    // Moving a droppable piece out of a flagged value:
                    // the checker only admits such moves when nothing
                    // needing drop stays behind, so the whole flag drops.
                    updates.push_back({flag_local[f], false});
                }
            }
        }
        if (dest) {
            PathId q = paths.find(*dest);
            if (q != kNoPath)
                for (PathId f : flag_order)
                    if (paths.subtree(q).test(f))
                        updates.push_back({flag_local[f], true});
        }
    }

    void run() {
        InitAnalysis analysis(prog, paths);
        auto solved = solve(fn, analysis, Direction::Forward);
        state_at = std::move(solved.in_facts);
        orig_count = fn.nodes.size();

        // Pass 1: which paths need a runtime flag anywhere?
        for (ir::NodeId n = 0; n < orig_count; ++n) {
            const auto& node = fn.nodes[n];
            if (!node.instr || node.instr->kind != ir::Instr::Kind::Drop)
                continue;
            PathId p = paths.find(node.instr->dest);
            if (p != kNoPath) scan_flags(p, state_at[n]);
        }
        flag_order.assign(flagged.begin(), flagged.end());
        flag_local.assign(paths.size(), UINT32_MAX);
        for (PathId p : flag_order) {
            flag_local[p] = static_cast<ir::LocalId>(fn.locals.size());
            ir::LocalDecl d;
            d.type = sem::type_bool();
            d.is_drop_flag = true;
            fn.locals.push_back(std::move(d));
            ++stats.flags_added;
        }

        // Prepend the flag-initialization chain; parameters (which are
        // initialized at entry) start true, everything else false.
        shift = static_cast<uint32_t>(flag_order.size());
        if (shift) {
            std::vector<ir::Node> out;
            out.reserve(fn.nodes.size() + shift);
            for (uint32_t i = 0; i < shift; ++i) {
                PathId p = flag_order[i];
                ir::LocalId root = paths.data(p).place.local;
                bool initial = root >= 1 && root <= fn.num_params;
                ir::Node nd;
                nd.instr = flag_set_instr(flag_local[p], initial, Span{});
                nd.term.kind = ir::Terminator::Kind::Goto;
                nd.term.next = i + 1;
                out.push_back(std::move(nd));
            }
            for (ir::Node& nd : fn.nodes) {
                ir::Terminator& t = nd.term;
                t.next += shift;
                t.alt += shift;
                for (ir::NodeId& tg : t.targets) tg += shift;
                out.push_back(std::move(nd));
            }
            fn.nodes = std::move(out);
            fn.return_node += shift;
        }

        // Pass 2: rewrite drops and install flag updates.
        std::vector<std::pair<ir::LocalId, bool>> updates;
        std::vector<ir::Instr> seq;
        for (ir::NodeId old_n = 0; old_n < orig_count; ++old_n) {
            ir::NodeId nn = old_n + shift;
            const InitState& st = state_at[old_n];
            ir::Node& node = fn.nodes[nn];

            if (node.instr && node.instr->kind == ir::Instr::Kind::Drop) {
                PathId p = paths.find(node.instr->dest);
                if (p == kNoPath) {
                    // Through-deref drop (write into borrowed storage):
                    // the referent is known initialized, keep it plain.
                    ++stats.drops_kept;
                    continue;
                }
                Span sp = node.instr->span;
                seq.clear();
                plan_drop(p, st, sp, seq);
                if (!seq.empty()) {
                    // Flags nested beneath the dropped value are false
                    // afterwards regardless of whether the drop fired.
                    for (PathId f : flag_order)
                        if (f != p && paths.subtree(p).test(f))
                            seq.push_back(flag_set_instr(flag_local[f], false, sp));
                }
                if (seq.empty()) {
                    node.instr->kind = ir::Instr::Kind::Nop;
                    node.instr->rv = ir::Rvalue{};
                } else {
                    ir::Instr first = seq.front();
                    node.instr = first;
                    splice_after(nn, {seq.begin() + 1, seq.end()});
                }
                continue;
            }

            if (shift == 0) continue;
            bool is_assign =
                node.instr && node.instr->kind == ir::Instr::Kind::Assign;
            bool is_call = node.term.kind == ir::Terminator::Kind::Call;
            if (!is_assign && !is_call) continue;
            const ir::Place* dest =
                is_assign ? &node.instr->dest
                          : (is_call ? &node.term.dest : nullptr);
            updates.clear();
            flag_updates_for(nn, dest, updates);
            if (updates.empty()) continue;
            seq.clear();
            Span sp = is_assign ? node.instr->span : node.term.span;
            for (auto [flag, v] : updates) seq.push_back(flag_set_instr(flag, v, sp));
            splice_after(nn, seq);
        }
    }
};

}  // namespace

DropElabStats elaborate_drops(const sem::Program& prog, ir::Function& fn) {
    Elaborator e(prog, fn);
    e.run();
    return e.stats;
}

void elaborate_program(const sem::Program& prog, ir::Program& irp) {
    for (auto& fn : irp.fns) elaborate_drops(prog, fn);
}

}  // namespace rustlight::flow

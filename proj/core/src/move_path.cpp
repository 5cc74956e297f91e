#include "rustlight/move_path.hpp"

namespace rustlight::flow {

namespace {

// Truncate a place at its first Deref projection.
ir::Place deref_free(const ir::Place& p) {
    ir::Place out;
    out.local = p.local;
    for (const auto& pr : p.proj) {
        if (pr.kind == ir::Projection::Kind::Deref) break;
        out.proj.push_back(pr);
    }
    return out;
}

}  // namespace

PathId MovePaths::find(const ir::Place& place) const {
    PathId cur = local_roots_[place.local];
    for (const auto& pr : place.proj) {
        PathId next = kNoPath;
        for (PathId c : paths_[cur].children) {
            const ir::Place& cp = paths_[c].place;
            if (cp.proj.back() == pr) {
                next = c;
                break;
            }
        }
        if (next == kNoPath) return kNoPath;
        cur = next;
    }
    return cur;
}

PathId MovePaths::deref_free_prefix(const ir::Place& place) const {
    ir::Place p = deref_free(place);
    // The prefix may be longer than any tracked path (untouched sibling
    // structure is closed over, so this only happens for places that are
    // only ever read whole); walk down as far as the tree goes.
    PathId cur = local_roots_[p.local];
    for (const auto& pr : p.proj) {
        PathId next = kNoPath;
        for (PathId c : paths_[cur].children) {
            if (paths_[c].place.proj.back() == pr) {
                next = c;
                break;
            }
        }
        if (next == kNoPath) return cur;
        cur = next;
    }
    return cur;
}

std::optional<ir::Place> MovePaths::canonical_move_place(
    const sem::Program& prog, const ir::Function& fn, const ir::Place& place) const {
    // Find the first Deref and the type it dereferences.
    sem::TypePtr t = fn.locals[place.local].type;
    uint32_t variant = 0;
    for (size_t i = 0; i < place.proj.size(); ++i) {
        const ir::Projection& pr = place.proj[i];
        switch (pr.kind) {
            case ir::Projection::Kind::Deref: {
                if (t->kind == sem::Type::Kind::Ref) return std::nullopt;
                // Box deref: legal only as the final projection; the box
                // itself is what gets consumed.
                if (i + 1 != place.proj.size()) return std::nullopt;
                ir::Place boxed;
                boxed.local = place.local;
                boxed.proj.assign(place.proj.begin(), place.proj.end() - 1);
                return boxed;
            }
            case ir::Projection::Kind::Downcast:
                variant = pr.index;
                continue;
            case ir::Projection::Kind::Field:
                t = prog.adts[t->adt].variants[variant].fields[pr.index].type;
                variant = 0;
                continue;
        }
    }
    return place;
}

std::string MovePaths::describe(PathId p, const sem::Program& prog,
                                const ir::Function& fn) const {
    const ir::Place& pl = paths_[p].place;
    const std::string& name = fn.locals[pl.local].name;
    if (pl.proj.empty() && !name.empty()) return "`" + name + "`";
    std::string base = name.empty() ? ir::print_place(pl, prog, fn) : name;
    if (!name.empty()) {
        // Re-print with the user name for the base local.
        std::string printed = ir::print_place(pl, prog, fn);
        std::string anchor = "_" + std::to_string(pl.local);
        size_t pos = printed.find(anchor);
        if (pos != std::string::npos) printed.replace(pos, anchor.size(), name);
        return "`" + printed + "`";
    }
    return "`" + base + "`";
}

PathId MovePaths::ensure(const sem::Program& prog, const ir::Function& fn,
                         const ir::Place& place) {
    ir::Place p = deref_free(place);
    PathId cur = local_roots_[p.local];
    ir::Place partial = ir::Place::base(p.local);
    for (const auto& pr : p.proj) {
        partial.proj.push_back(pr);
        PathId next = kNoPath;
        for (PathId c : paths_[cur].children) {
            if (paths_[c].place.proj.back() == pr) {
                next = c;
                break;
            }
        }
        if (next == kNoPath) {
            next = static_cast<PathId>(paths_.size());
            PathData d;
            d.place = partial;
            d.parent = cur;
            d.type = ir::place_type(prog, fn, partial);
            paths_.push_back(std::move(d));
            paths_[cur].children.push_back(next);
        }
        cur = next;
    }
    return cur;
}

void MovePaths::close_siblings(const sem::Program& prog, const ir::Function& fn) {
    // For every path that has children, materialize all of its direct
    // children (all fields; for enums all variants) so sibling states are
    // individually visible to drop elaboration. ensure() may append; the
    // index loop re-reads size() and newly added paths have no children,
    // so the sweep terminates.
    for (PathId p = 0; p < paths_.size(); ++p) {
        if (paths_[p].children.empty()) continue;
        const ir::Place& pl = paths_[p].place;
        const sem::TypePtr& t = paths_[p].type;
        if (!t || t->kind != sem::Type::Kind::Adt) continue;
        const sem::Adt& adt = prog.adts[t->adt];

        bool at_downcast = !pl.proj.empty() &&
                           pl.proj.back().kind == ir::Projection::Kind::Downcast;
        if (at_downcast) {
            uint32_t v = pl.proj.back().index;
            for (uint32_t i = 0; i < adt.variants[v].fields.size(); ++i) {
                ir::Place f = pl;
                f.proj.push_back({ir::Projection::Kind::Field, i});
                ensure(prog, fn, f);
            }
        } else if (adt.is_enum) {
            for (uint32_t v = 0; v < adt.variants.size(); ++v) {
                ir::Place dc = pl;
                dc.proj.push_back({ir::Projection::Kind::Downcast, v});
                ensure(prog, fn, dc);
            }
        } else {
            for (uint32_t i = 0; i < adt.variants[0].fields.size(); ++i) {
                ir::Place f = pl;
                f.proj.push_back({ir::Projection::Kind::Field, i});
                ensure(prog, fn, f);
            }
        }
    }
}

void MovePaths::build_subtrees() {
    subtrees_.assign(paths_.size(), BitSet(paths_.size()));
    // Children always have larger ids than parents, so one reverse sweep
    // accumulates subtrees bottom-up.
    for (PathId p = static_cast<PathId>(paths_.size()); p-- > 0;) {
        subtrees_[p].set(p);
        for (PathId c : paths_[p].children) subtrees_[p].union_with(subtrees_[c]);
    }
}

MovePaths MovePaths::build(const sem::Program& prog, const ir::Function& fn) {
    MovePaths mp;
    for (ir::LocalId l = 0; l < fn.locals.size(); ++l) {
        mp.local_roots_.push_back(static_cast<PathId>(mp.paths_.size()));
        PathData d;
        d.place = ir::Place::base(l);
        d.type = fn.locals[l].type;
        mp.paths_.push_back(std::move(d));
    }

    auto touch = [&](const ir::Place& p) { mp.ensure(prog, fn, p); };
    auto touch_operand = [&](const ir::Operand& op) {
        if (!op.is_place()) return;
        touch(op.place);
        if (op.kind == ir::Operand::Kind::Move) {
            if (auto canon = mp.canonical_move_place(prog, fn, op.place))
                touch(*canon);
        }
    };

    for (const ir::Node& node : fn.nodes) {
        if (node.instr) {
            const ir::Instr& in = *node.instr;
            switch (in.kind) {
                case ir::Instr::Kind::Assign:
                    touch(in.dest);
                    switch (in.rv.kind) {
                        case ir::Rvalue::Kind::Use:
                        case ir::Rvalue::Kind::Box:
                        case ir::Rvalue::Kind::Unary:
                            touch_operand(in.rv.a);
                            break;
                        case ir::Rvalue::Kind::Binary:
                            touch_operand(in.rv.a);
                            touch_operand(in.rv.b);
                            break;
                        case ir::Rvalue::Kind::Ref: touch(in.rv.ref_place); break;
                        case ir::Rvalue::Kind::Aggregate:
                            for (const auto& op : in.rv.elems) touch_operand(op);
                            break;
                    }
                    break;
                case ir::Instr::Kind::Drop:
                case ir::Instr::Kind::CondDrop:
                case ir::Instr::Kind::StorageDead:
                    touch(in.dest);
                    break;
                case ir::Instr::Kind::Nop: break;
            }
        }
        const ir::Terminator& t = node.term;
        switch (t.kind) {
            case ir::Terminator::Kind::If: touch_operand(t.cond); break;
            case ir::Terminator::Kind::Switch: touch(t.scrutinee); break;
            case ir::Terminator::Kind::Call:
                for (const auto& a : t.args) touch_operand(a);
                touch(t.dest);
                break;
            default: break;
        }
    }
    mp.close_siblings(prog, fn);
    mp.build_subtrees();
    return mp;
}

}  // namespace rustlight::flow

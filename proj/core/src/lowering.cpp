#include "rustlight/lowering.hpp"

#include <deque>
#include <unordered_map>

namespace rustlight {
namespace {

using ir::Instr;
using ir::LocalId;
using ir::NodeId;
using ir::Operand;
using ir::Place;
using ir::Projection;
using ir::Rvalue;
using ir::Terminator;
using sem::RegionId;
using sem::TypePtr;

// Patch slot inside a terminator that still needs its target node.
struct PendingEdge {
    NodeId node;
    int slot;  // -1 = next, -2 = alt, >= 0 = targets[slot]
};

class FnLowerer {
public:
    FnLowerer(const ast::FnDef& def, const sem::FnInfo& info, uint32_t fn_index,
              const sem::Program& prog, DiagnosticBag& diags)
        : def_(def), info_(info), prog_(prog), diags_(diags) {
        fn_.name = def.name;
        fn_.fn_index = fn_index;
        fn_.num_params = static_cast<uint32_t>(def.params.size());
        fn_.num_universals = info.sig.num_universals();
        fn_.num_regions = fn_.num_universals;
        fn_.outlives = info.sig.outlives;
    }

    ir::Function run() {
        // _0: the return slot keeps the signature's universal regions.
        new_local(info_.sig.return_type, "", false, false, def_.span);
        for (size_t i = 0; i < def_.params.size(); ++i) {
            LocalId l = new_local(info_.sig.param_types[i], def_.params[i].name,
                                  def_.params[i].is_mut, false, def_.params[i].span);
            // Parameters were declared by the checker as bindings 0..n-1.
            binding_local_[static_cast<sem::BindingId>(i)] = l;
        }

        push_scope();
        lower_block(def_.body);
        // Implicit fallthrough: drop everything still in scope, then head
        // to the return funnel. The move checker rejects falling off the
        // end of a non-unit function via the uninitialized return slot.
        pop_scope();

        // Return funnel: parameter drops in reverse order, then Return.
        // Explicit returns join the fallthrough before the first drop.
        for (const PendingEdge& e : return_edges_) pending_.push_back(e);
        return_edges_.clear();
        for (uint32_t i = fn_.num_params; i >= 1; --i) {
            if (prog_.needs_drop(fn_.locals[i].type))
                emit(Instr{Instr::Kind::Drop, Place::base(i), {}, 0, def_.span});
        }
        fn_.return_node = fresh_node(make_term(Terminator::Kind::Return, def_.span));

        prune_unreachable();
        return std::move(fn_);
    }

private:
    const ast::FnDef& def_;
    const sem::FnInfo& info_;
    const sem::Program& prog_;
    DiagnosticBag& diags_;
    ir::Function fn_;

    std::unordered_map<sem::BindingId, LocalId> binding_local_;
    std::vector<PendingEdge> pending_;
    std::vector<PendingEdge> return_edges_;  // jumps waiting for the funnel
    // Innermost scope last; each holds locals in declaration order.
    std::vector<std::vector<LocalId>> scopes_;

    void ice(Span span, const std::string& msg) {
        diags_.report(DiagCode::InternalError, span, "lowering: " + msg);
    }

    // --- locals / regions ------------------------------------------------

    // Replaces every un-annotated region with a fresh existential.
    TypePtr instantiate(const TypePtr& t) {
        if (!t) return t;
        TypePtr elem = instantiate(t->elem);
        if (t->kind == sem::Type::Kind::Ref && t->region == sem::kNoRegion) {
            return sem::type_ref(fn_.num_regions++, t->ref_mut, elem);
        }
        if (elem.get() != t->elem.get()) {
            sem::Type copy = *t;
            copy.elem = elem;
            return std::make_shared<const sem::Type>(std::move(copy));
        }
        return t;
    }

    LocalId new_local(const TypePtr& t, std::string name, bool user_mut,
                      bool instantiate_regions, Span span) {
        LocalId id = static_cast<LocalId>(fn_.locals.size());
        fn_.locals.push_back(ir::LocalDecl{
            instantiate_regions ? instantiate(t) : t, std::move(name), user_mut,
            false, span});
        return id;
    }

    LocalId new_temp(const TypePtr& t, Span span) {
        return new_local(t, "", false, true, span);
    }

    // --- node plumbing ---------------------------------------------------

    void patch(PendingEdge e, NodeId target) {
        Terminator& t = fn_.nodes[e.node].term;
        if (e.slot == -1) {
            t.next = target;
        } else if (e.slot == -2) {
            t.alt = target;
        } else {
            t.targets[e.slot] = target;
        }
    }

    NodeId fresh_node(Terminator term) {
        NodeId id = static_cast<NodeId>(fn_.nodes.size());
        fn_.nodes.push_back(ir::Node{std::nullopt, std::move(term)});
        for (const PendingEdge& e : pending_) patch(e, id);
        pending_.clear();
        return id;
    }

    static Terminator make_term(Terminator::Kind k, Span span) {
        Terminator t;
        t.kind = k;
        t.span = span;
        return t;
    }

    void emit(Instr in) {
        Span span = in.span;
        NodeId id = fresh_node(make_term(Terminator::Kind::Goto, span));
        fn_.nodes[id].instr = std::move(in);
        pending_.push_back(PendingEdge{id, -1});
    }

    void emit_assign(Place dest, Rvalue rv, Span span) {
        emit(Instr{Instr::Kind::Assign, std::move(dest), std::move(rv), 0, span});
    }

    std::vector<PendingEdge> take_pending() {
        std::vector<PendingEdge> out = std::move(pending_);
        pending_.clear();
        return out;
    }

    // --- scopes ----------------------------------------------------------

    void push_scope() { scopes_.emplace_back(); }

    void emit_scope_exit(const std::vector<LocalId>& locals, Span span) {
        for (auto it = locals.rbegin(); it != locals.rend(); ++it) {
            if (prog_.needs_drop(fn_.locals[*it].type))
                emit(Instr{Instr::Kind::Drop, Place::base(*it), {}, 0, span});
            emit(Instr{Instr::Kind::StorageDead, Place::base(*it), {}, 0, span});
        }
    }

    void pop_scope() {
        emit_scope_exit(scopes_.back(), def_.span);
        scopes_.pop_back();
    }

    // `return` unwinds every open scope without popping the structures.
    void unwind_all_scopes(Span span) {
        for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it)
            emit_scope_exit(*it, span);
    }

    // --- places ----------------------------------------------------------

    TypePtr expr_type(const ast::Expr& e) {
        auto it = info_.expr_type.find(&e);
        return it == info_.expr_type.end() ? sem::type_error() : it->second;
    }

    Place lower_place(const ast::Expr& e) {
        switch (e.kind) {
            case ast::Expr::Kind::Var: {
                auto it = info_.var_binding.find(&e);
                if (it == info_.var_binding.end()) {
                    ice(e.span, "unresolved variable");
                    return Place::base(0);
                }
                return Place::base(binding_local_.at(it->second));
            }
            case ast::Expr::Kind::Field: {
                Place p = lower_place(*e.lhs);
                uint32_t derefs = 0;
                if (auto it = info_.autoderef.find(&e); it != info_.autoderef.end())
                    derefs = it->second;
                for (uint32_t i = 0; i < derefs; ++i)
                    p.proj.push_back(Projection{Projection::Kind::Deref, 0});
                uint32_t idx = info_.field_index.at(&e);
                p.proj.push_back(Projection{Projection::Kind::Field, idx});
                return p;
            }
            case ast::Expr::Kind::Unary: {
                Place p = lower_place(*e.lhs);
                p.proj.push_back(Projection{Projection::Kind::Deref, 0});
                return p;
            }
            default:
                ice(e.span, "expression is not a place");
                return Place::base(0);
        }
    }

    static bool is_place_shaped(const ast::Expr& e) {
        switch (e.kind) {
            case ast::Expr::Kind::Var: return true;
            case ast::Expr::Kind::Field: return is_place_shaped(*e.lhs);
            case ast::Expr::Kind::Unary:
                return e.un_op == ast::UnOp::Deref && is_place_shaped(*e.lhs);
            default: return false;
        }
    }

    // --- expressions -----------------------------------------------------

    Operand lower_operand(const ast::Expr& e) {
        switch (e.kind) {
            case ast::Expr::Kind::Unit: return Operand::unit();
            case ast::Expr::Kind::IntLit: return Operand::imm(e.int_value);
            case ast::Expr::Kind::BoolLit: return Operand::imm_bool(e.bool_value);
            default: break;
        }
        if (is_place_shaped(e)) {
            Place p = lower_place(e);
            return prog_.is_copy(expr_type(e)) ? Operand::copy(std::move(p))
                                               : Operand::move(std::move(p));
        }
        LocalId tmp = new_temp(expr_type(e), e.span);
        lower_into(Place::base(tmp), e);
        return Operand::move(Place::base(tmp));
    }

    void lower_into(const Place& dest, const ast::Expr& e) {
        switch (e.kind) {
            case ast::Expr::Kind::Unit:
            case ast::Expr::Kind::IntLit:
            case ast::Expr::Kind::BoolLit:
            case ast::Expr::Kind::Var:
            case ast::Expr::Kind::Field: {
                Rvalue rv;
                rv.kind = Rvalue::Kind::Use;
                rv.a = lower_operand(e);
                emit_assign(dest, std::move(rv), e.span);
                return;
            }
            case ast::Expr::Kind::Unary: {
                if (e.un_op == ast::UnOp::Deref) {
                    Rvalue rv;
                    rv.kind = Rvalue::Kind::Use;
                    rv.a = lower_operand(e);
                    emit_assign(dest, std::move(rv), e.span);
                    return;
                }
                Rvalue rv;
                rv.kind = Rvalue::Kind::Unary;
                rv.un_op = e.un_op;
                rv.a = lower_operand(*e.lhs);
                emit_assign(dest, std::move(rv), e.span);
                return;
            }
            case ast::Expr::Kind::Binary: {
                Rvalue rv;
                rv.kind = Rvalue::Kind::Binary;
                rv.bin_op = e.bin_op;
                rv.a = lower_operand(*e.lhs);
                rv.b = lower_operand(*e.rhs);
                emit_assign(dest, std::move(rv), e.span);
                return;
            }
            case ast::Expr::Kind::Borrow: {
                TypePtr dt = ir::place_type(prog_, fn_, dest);
                Rvalue rv;
                rv.kind = Rvalue::Kind::Ref;
                rv.ref_place = lower_place(*e.lhs);
                rv.ref_mut = e.borrow_mut;
                // The loan is born directly in the destination's region.
                rv.ref_region =
                    (dt && dt->kind == sem::Type::Kind::Ref) ? dt->region
                                                             : sem::kNoRegion;
                if (rv.ref_region == sem::kNoRegion) {
                    ice(e.span, "borrow destination has no region");
                    rv.ref_region = fn_.num_regions++;
                }
                emit_assign(dest, std::move(rv), e.span);
                return;
            }
            case ast::Expr::Kind::BoxNew: {
                Rvalue rv;
                rv.kind = Rvalue::Kind::Box;
                rv.a = lower_operand(*e.args[0]);
                emit_assign(dest, std::move(rv), e.span);
                return;
            }
            case ast::Expr::Kind::Call: {
                lower_call(dest, e);
                return;
            }
            case ast::Expr::Kind::StructLit:
            case ast::Expr::Kind::EnumLit: {
                sem::AdtId adt = info_.lit_adt.at(&e);
                uint32_t variant = 0;
                if (e.kind == ast::Expr::Kind::EnumLit)
                    variant = info_.lit_variant.at(&e);
                const sem::AdtVariant& v = prog_.adts[adt].variants[variant];

                // Initializers run in source order; the aggregate then
                // consumes them in field order.
                std::vector<Operand> by_field(v.fields.size());
                std::vector<bool> have(v.fields.size(), false);
                for (const auto& fi : e.fields) {
                    auto it = info_.field_index.find(&fi);
                    if (it == info_.field_index.end()) continue;
                    by_field[it->second] = lower_operand(*fi.value);
                    have[it->second] = true;
                }
                Rvalue rv;
                rv.kind = Rvalue::Kind::Aggregate;
                rv.adt = adt;
                rv.variant = variant;
                for (size_t i = 0; i < by_field.size(); ++i) {
                    if (!have[i]) {
                        ice(e.span, "missing field in aggregate");
                        return;
                    }
                    rv.elems.push_back(std::move(by_field[i]));
                }
                emit_assign(dest, std::move(rv), e.span);
                return;
            }
        }
    }

    void lower_call(const Place& dest, const ast::Expr& e) {
        auto it = info_.callee.find(&e);
        if (it == info_.callee.end()) {
            ice(e.span, "unresolved call");
            return;
        }
        Terminator t = make_term(Terminator::Kind::Call, e.span);
        t.callee = it->second;
        for (const auto& a : e.args) t.args.push_back(lower_operand(*a));
        t.dest = dest;
        uint32_t n = prog_.fns[t.callee].sig.num_universals();
        for (uint32_t i = 0; i < n; ++i) t.inst_regions.push_back(fn_.num_regions++);
        NodeId id = fresh_node(std::move(t));
        pending_.push_back(PendingEdge{id, -1});
    }

    // --- statements ------------------------------------------------------

    void lower_block(const ast::Block& b) {
        push_scope();
        for (const auto& s : b.stmts) lower_stmt(*s);
        pop_scope();
    }

    void lower_stmt(const ast::Stmt& s) {
        switch (s.kind) {
            case ast::Stmt::Kind::Let: {
                auto bit = info_.decl_binding.find(&s);
                if (bit == info_.decl_binding.end()) return;
                const sem::Binding& binding = info_.bindings[bit->second];
                // Evaluate the initializer before the binding exists
                // (`let x = x + 1;` reads the shadowed x).
                if (s.init) {
                    if (is_place_shaped(*s.init) || s.init->kind == ast::Expr::Kind::IntLit ||
                        s.init->kind == ast::Expr::Kind::BoolLit ||
                        s.init->kind == ast::Expr::Kind::Unit) {
                        Rvalue rv;
                        rv.kind = Rvalue::Kind::Use;
                        rv.a = lower_operand(*s.init);
                        LocalId l = declare(bit->second, binding, s.span);
                        emit_assign(Place::base(l), std::move(rv), s.span);
                    } else {
                        // Lower directly into the new local: safe because
                        // a non-place initializer cannot mention the new
                        // binding (it was not in scope), and the local id
                        // must exist before lower_into targets it.
                        LocalId l = declare_after_eval(bit->second, binding, s.span,
                                                       *s.init);
                        (void)l;
                    }
                } else {
                    declare(bit->second, binding, s.span);
                }
                return;
            }
            case ast::Stmt::Kind::Assign: {
                Place dest = lower_place(*s.lhs);
                TypePtr dt = ir::place_type(prog_, fn_, dest);
                if (prog_.needs_drop(dt)) {
                    // Evaluate, drop the old value, then move in: the drop
                    // elaboration pass deletes the Drop when the place is
                    // statically uninitialized.
                    LocalId tmp = new_temp(dt, s.span);
                    lower_into(Place::base(tmp), *s.rhs);
                    emit(Instr{Instr::Kind::Drop, dest, {}, 0, s.span});
                    Rvalue rv;
                    rv.kind = Rvalue::Kind::Use;
                    rv.a = Operand::move(Place::base(tmp));
                    emit_assign(dest, std::move(rv), s.span);
                } else {
                    lower_into(dest, *s.rhs);
                }
                return;
            }
            case ast::Stmt::Kind::Expr: {
                TypePtr t = expr_type(*s.expr);
                LocalId tmp = new_temp(t, s.span);
                lower_into(Place::base(tmp), *s.expr);
                if (prog_.needs_drop(t))
                    emit(Instr{Instr::Kind::Drop, Place::base(tmp), {}, 0, s.span});
                return;
            }
            case ast::Stmt::Kind::If: {
                Operand cond = lower_operand(*s.expr);
                Terminator t = make_term(Terminator::Kind::If, s.span);
                t.cond = std::move(cond);
                NodeId ifn = fresh_node(std::move(t));

                pending_.push_back(PendingEdge{ifn, -1});
                lower_block(s.body);
                std::vector<PendingEdge> join = take_pending();

                pending_.push_back(PendingEdge{ifn, -2});
                if (s.has_else) lower_block(s.else_body);
                for (const PendingEdge& e : join) pending_.push_back(e);
                return;
            }
            case ast::Stmt::Kind::While: {
                NodeId head = static_cast<NodeId>(fn_.nodes.size());
                Operand cond = lower_operand(*s.expr);
                Terminator t = make_term(Terminator::Kind::If, s.span);
                t.cond = std::move(cond);
                NodeId ifn = fresh_node(std::move(t));

                pending_.push_back(PendingEdge{ifn, -1});
                lower_block(s.body);
                // Back edges re-enter at the condition evaluation.
                for (const PendingEdge& e : take_pending()) patch(e, head);

                pending_.push_back(PendingEdge{ifn, -2});
                return;
            }
            case ast::Stmt::Kind::Match:
                lower_match(s);
                return;
            case ast::Stmt::Kind::Return: {
                if (s.expr) {
                    lower_into(Place::base(0), *s.expr);
                }
                unwind_all_scopes(s.span);
                for (const PendingEdge& e : take_pending())
                    return_edges_.push_back(e);
                return;
            }
            case ast::Stmt::Kind::Block:
                lower_block(s.body);
                return;
        }
    }

    LocalId declare(sem::BindingId b, const sem::Binding& binding, Span span) {
        LocalId l = new_local(binding.type, binding.name, binding.is_mut,
                              /*instantiate_regions=*/true, span);
        binding_local_[b] = l;
        scopes_.back().push_back(l);
        return l;
    }

    LocalId declare_after_eval(sem::BindingId b, const sem::Binding& binding,
                               Span span, const ast::Expr& init) {
        // The local must exist before lower_into writes to it, but the
        // binding only becomes visible now (the checker already enforced
        // scoping), so creating it up front is safe.
        LocalId l = declare(b, binding, span);
        lower_into(Place::base(l), init);
        return l;
    }

    void lower_match(const ast::Stmt& s) {
        auto ait = info_.lit_adt.find(&s);
        if (ait == info_.lit_adt.end()) return;
        const sem::Adt& adt = prog_.adts[ait->second];

        Place scrut;
        LocalId scrut_tmp = UINT32_MAX;
        if (is_place_shaped(*s.expr)) {
            scrut = lower_place(*s.expr);
        } else {
            scrut_tmp = new_temp(expr_type(*s.expr), s.span);
            lower_into(Place::base(scrut_tmp), *s.expr);
            scrut = Place::base(scrut_tmp);
        }

        Terminator t = make_term(Terminator::Kind::Switch, s.span);
        t.scrutinee = scrut;
        t.targets.assign(adt.variants.size(), 0);
        NodeId sw = fresh_node(std::move(t));

        std::vector<PendingEdge> join;
        for (const auto& arm : s.arms) {
            auto vit = info_.lit_variant.find(&arm.pat);
            if (vit == info_.lit_variant.end()) continue;
            uint32_t variant = vit->second;

            pending_.clear();
            pending_.push_back(PendingEdge{sw, static_cast<int>(variant)});

            push_scope();
            Place down = scrut;
            down.proj.push_back(Projection{Projection::Kind::Downcast, variant});
            for (const auto& pf : arm.pat.fields) {
                if (pf.wildcard) continue;
                auto bit = info_.decl_binding.find(&pf);
                if (bit == info_.decl_binding.end()) continue;
                const sem::Binding& binding = info_.bindings[bit->second];
                LocalId l = declare(bit->second, binding, pf.span);

                Place field = down;
                field.proj.push_back(
                    Projection{Projection::Kind::Field, info_.field_index.at(&pf)});
                Rvalue rv;
                if (pf.by_ref) {
                    rv.kind = Rvalue::Kind::Ref;
                    rv.ref_place = std::move(field);
                    rv.ref_mut = pf.ref_mut;
                    TypePtr bt = fn_.locals[l].type;
                    rv.ref_region = bt->region;
                } else {
                    rv.kind = Rvalue::Kind::Use;
                    rv.a = prog_.is_copy(binding.type)
                               ? Operand::copy(std::move(field))
                               : Operand::move(std::move(field));
                }
                emit_assign(Place::base(l), std::move(rv), pf.span);
            }
            for (const auto& st : arm.body.stmts) lower_stmt(*st);
            pop_scope();
            for (const PendingEdge& e : take_pending()) join.push_back(e);
        }
        pending_ = std::move(join);

        if (scrut_tmp != UINT32_MAX &&
            prog_.needs_drop(fn_.locals[scrut_tmp].type)) {
            emit(Instr{Instr::Kind::Drop, Place::base(scrut_tmp), {}, 0, s.span});
        }
    }

    // --- cleanup ---------------------------------------------------------

    void prune_unreachable() {
        std::vector<bool> reach(fn_.nodes.size(), false);
        std::deque<NodeId> work{0};
        reach[0] = true;
        std::vector<NodeId> succ;
        while (!work.empty()) {
            NodeId n = work.front();
            work.pop_front();
            fn_.nodes[n].term.successors(succ);
            for (NodeId s : succ) {
                if (!reach[s]) {
                    reach[s] = true;
                    work.push_back(s);
                }
            }
        }
        std::vector<NodeId> remap(fn_.nodes.size(), 0);
        std::vector<ir::Node> kept;
        for (NodeId n = 0; n < fn_.nodes.size(); ++n) {
            if (reach[n]) {
                remap[n] = static_cast<NodeId>(kept.size());
                kept.push_back(std::move(fn_.nodes[n]));
            }
        }
        for (ir::Node& node : kept) {
            Terminator& t = node.term;
            switch (t.kind) {
                case Terminator::Kind::Goto:
                case Terminator::Kind::Call: t.next = remap[t.next]; break;
                case Terminator::Kind::If:
                    t.next = remap[t.next];
                    t.alt = remap[t.alt];
                    break;
                case Terminator::Kind::Switch:
                    for (NodeId& x : t.targets) x = remap[x];
                    break;
                case Terminator::Kind::Return: break;
            }
        }
        fn_.nodes = std::move(kept);
        fn_.return_node = remap[fn_.return_node];
    }
};

}  // namespace

ir::Program lower_module(const ast::Module& m, const sem::Program& prog,
                         DiagnosticBag& diags) {
    ir::Program out;
    for (const auto& def : m.fns) {
        auto it = prog.fn_by_name.find(def.name);
        if (it == prog.fn_by_name.end()) continue;
        const sem::FnInfo& info = prog.fns[it->second];
        out.fns.push_back(FnLowerer(def, info, it->second, prog, diags).run());
    }
    return out;
}

}  // namespace rustlight

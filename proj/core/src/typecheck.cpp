#include "rustlight/typecheck.hpp"

#include <algorithm>
#include <functional>
#include <optional>

namespace rustlight {
namespace {

using sem::AdtId;
using sem::BindingId;
using sem::FnInfo;
using sem::RegionId;
using sem::TypePtr;

class ModuleChecker {
public:
    ModuleChecker(const ast::Module& m, DiagnosticBag& diags)
        : mod_(m), diags_(diags) {}

    sem::Program run() {
        collect_adts();
        check_adt_recursion();
        collect_signatures();
        for (size_t i = 0; i < mod_.fns.size(); ++i) check_body(i);
        return std::move(prog_);
    }

private:
    const ast::Module& mod_;
    DiagnosticBag& diags_;
    sem::Program prog_;

    void err(DiagCode code, Span span, std::string msg) {
        diags_.report(code, span, std::move(msg));
    }

    // --- ADT collection --------------------------------------------------

    void declare_adt(const std::string& name, Span span, bool is_enum) {
        if (prog_.adt_by_name.count(name) || prog_.fn_by_name.count(name)) {
            err(DiagCode::DuplicateDefinition, span,
                "the name `" + name + "` is defined multiple times");
            return;
        }
        AdtId id = static_cast<AdtId>(prog_.adts.size());
        sem::Adt adt;
        adt.name = name;
        adt.is_enum = is_enum;
        adt.span = span;
        prog_.adts.push_back(std::move(adt));
        prog_.adt_by_name.emplace(name, id);
    }

    void collect_adts() {
        for (const auto& s : mod_.structs) declare_adt(s.name, s.span, false);
        for (const auto& e : mod_.enums) declare_adt(e.name, e.span, true);

        for (const auto& s : mod_.structs) {
            auto it = prog_.adt_by_name.find(s.name);
            if (it == prog_.adt_by_name.end()) continue;
            sem::Adt& adt = prog_.adts[it->second];
            if (!adt.variants.empty()) continue;  // duplicate name, first wins
            sem::AdtVariant v;
            v.name = s.name;
            v.span = s.span;
            fill_fields(v, s.fields);
            adt.variants.push_back(std::move(v));
        }
        for (const auto& e : mod_.enums) {
            auto it = prog_.adt_by_name.find(e.name);
            if (it == prog_.adt_by_name.end()) continue;
            sem::Adt& adt = prog_.adts[it->second];
            if (!adt.is_enum || !adt.variants.empty()) continue;
            for (const auto& var : e.variants) {
                for (const auto& prev : adt.variants) {
                    if (prev.name == var.name) {
                        err(DiagCode::DuplicateDefinition, var.span,
                            "variant `" + var.name + "` is defined multiple times");
                    }
                }
                sem::AdtVariant v;
                v.name = var.name;
                v.span = var.span;
                fill_fields(v, var.fields);
                adt.variants.push_back(std::move(v));
            }
        }
    }

    void fill_fields(sem::AdtVariant& v, const std::vector<ast::FieldDef>& fields) {
        for (const auto& f : fields) {
            for (const auto& prev : v.fields) {
                if (prev.name == f.name) {
                    err(DiagCode::DuplicateDefinition, f.span,
                        "field `" + f.name + "` is declared multiple times");
                }
            }
            TypePtr t = resolve_type(*f.type, nullptr);
            if (contains_ref(t)) {
                err(DiagCode::MissingLifetime, f.span,
                    "reference types are not supported in struct or enum fields");
                t = sem::type_error();
            }
            v.fields.push_back(sem::AdtField{f.name, std::move(t), f.span});
        }
    }

    static bool contains_ref(const TypePtr& t) {
        if (!t) return false;
        if (t->kind == sem::Type::Kind::Ref) return true;
        return contains_ref(t->elem);
    }

    // Types of infinite size: a cycle among ADTs through directly embedded
    // fields. Box breaks the cycle (heap indirection).
    void check_adt_recursion() {
        enum class Color { White, Gray, Black };
        std::vector<Color> color(prog_.adts.size(), Color::White);
        std::vector<AdtId> stack;

        auto edges = [&](AdtId id, auto&& visit) {
            for (const auto& v : prog_.adts[id].variants)
                for (const auto& f : v.fields)
                    if (f.type && f.type->kind == sem::Type::Kind::Adt)
                        visit(f.type->adt);
        };

        std::function<bool(AdtId)> dfs = [&](AdtId id) -> bool {
            color[id] = Color::Gray;
            bool cyclic = false;
            edges(id, [&](AdtId next) {
                if (cyclic) return;
                if (color[next] == Color::Gray) {
                    cyclic = true;
                } else if (color[next] == Color::White) {
                    cyclic = dfs(next);
                }
            });
            color[id] = Color::Black;
            if (cyclic) {
                err(DiagCode::RecursiveType, prog_.adts[id].span,
                    "recursive type `" + prog_.adts[id].name +
                        "` has infinite size; insert a `Box` to break the cycle");
            }
            return cyclic;
        };

        for (AdtId id = 0; id < prog_.adts.size(); ++id) {
            if (color[id] == Color::White) {
                (void)stack;
                dfs(id);
            }
        }
    }

    // --- signatures ------------------------------------------------------

    // Resolution context for lifetimes: maps a name to a universal index.
    // `universals == nullptr` means lifetimes are not allowed at all
    // (ADT fields).
    struct LifetimeCtx {
        std::vector<std::string>* names = nullptr;  // appended for elision
        bool allow_elision_fresh = false;           // param position
        bool in_signature = false;
    };

    TypePtr resolve_type(const ast::Type& t, LifetimeCtx* ctx) {
        switch (t.kind) {
            case ast::Type::Kind::Unit: return sem::type_unit();
            case ast::Type::Kind::Bool: return sem::type_bool();
            case ast::Type::Kind::I32: return sem::type_i32();
            case ast::Type::Kind::Box: return sem::type_box(resolve_type(*t.elem, ctx));
            case ast::Type::Kind::Ref: {
                RegionId region = sem::kNoRegion;
                if (!t.lifetime.empty()) {
                    if (!ctx || !ctx->names) {
                        err(DiagCode::UnknownLifetime, t.span,
                            "lifetime annotations are not allowed here");
                    } else {
                        auto it = std::find(ctx->names->begin(), ctx->names->end(),
                                            t.lifetime);
                        if (it == ctx->names->end()) {
                            err(DiagCode::UnknownLifetime, t.span,
                                "use of undeclared lifetime name `'" + t.lifetime + "`");
                        } else {
                            region = static_cast<RegionId>(it - ctx->names->begin());
                        }
                    }
                } else if (ctx && ctx->allow_elision_fresh) {
                    region = static_cast<RegionId>(ctx->names->size());
                    ctx->names->push_back("#" + std::to_string(region));
                }
                return sem::type_ref(region, t.ref_mut, resolve_type(*t.elem, ctx));
            }
            case ast::Type::Kind::Named: {
                auto it = prog_.adt_by_name.find(t.name);
                if (it == prog_.adt_by_name.end()) {
                    err(DiagCode::UnknownName, t.span,
                        "cannot find type `" + t.name + "`");
                    return sem::type_error();
                }
                return sem::type_adt(it->second);
            }
        }
        return sem::type_error();
    }

    static void count_elided_refs(const TypePtr& t, uint32_t& n) {
        if (!t) return;
        if (t->kind == sem::Type::Kind::Ref && t->region == sem::kNoRegion) ++n;
        count_elided_refs(t->elem, n);
    }

    static TypePtr fill_elided(const TypePtr& t, RegionId r) {
        if (!t) return t;
        TypePtr elem = fill_elided(t->elem, r);
        if (t->kind == sem::Type::Kind::Ref && t->region == sem::kNoRegion)
            return sem::type_ref(r, t->ref_mut, elem);
        if (elem.get() != t->elem.get()) {
            sem::Type copy = *t;
            copy.elem = elem;
            return std::make_shared<const sem::Type>(std::move(copy));
        }
        return t;
    }

    void collect_signatures() {
        for (const auto& f : mod_.fns) {
            if (prog_.fn_by_name.count(f.name) || prog_.adt_by_name.count(f.name)) {
                err(DiagCode::DuplicateDefinition, f.span,
                    "the name `" + f.name + "` is defined multiple times");
                continue;
            }
            sem::FnSig sig;
            sig.name = f.name;
            sig.span = f.span;
            for (const auto& lt : f.lifetime_params) {
                if (std::find(sig.universal_names.begin(), sig.universal_names.end(),
                              lt) != sig.universal_names.end()) {
                    err(DiagCode::DuplicateDefinition, f.span,
                        "lifetime `'" + lt + "` is declared multiple times");
                    continue;
                }
                sig.universal_names.push_back(lt);
            }

            LifetimeCtx ctx;
            ctx.names = &sig.universal_names;
            ctx.allow_elision_fresh = true;
            ctx.in_signature = true;

            for (const auto& p : f.params) {
                sig.param_types.push_back(resolve_type(*p.type, &ctx));
                sig.param_mut.push_back(p.is_mut);
            }
            for (size_t i = 0; i < f.params.size(); ++i) {
                for (size_t j = 0; j < i; ++j) {
                    if (f.params[i].name == f.params[j].name) {
                        err(DiagCode::DuplicateDefinition, f.params[i].span,
                            "identifier `" + f.params[i].name +
                                "` is bound more than once in this parameter list");
                    }
                }
            }

            if (f.return_type) {
                ctx.allow_elision_fresh = false;
                TypePtr ret = resolve_type(*f.return_type, &ctx);
                uint32_t elided = 0;
                count_elided_refs(ret, elided);
                if (elided > 0) {
                    // Elision: the return position borrows from the unique
                    // input lifetime if there is one.
                    std::vector<RegionId> inputs;
                    for (const auto& pt : sig.param_types) sem::collect_regions(pt, inputs);
                    std::sort(inputs.begin(), inputs.end());
                    inputs.erase(std::unique(inputs.begin(), inputs.end()), inputs.end());
                    if (inputs.size() == 1) {
                        ret = fill_elided(ret, inputs[0]);
                    } else {
                        err(DiagCode::MissingLifetime, f.return_type->span,
                            "missing lifetime specifier in return type: expected a "
                            "named lifetime parameter");
                        ret = fill_elided(ret, 0);
                        if (sig.universal_names.empty())
                            sig.universal_names.push_back("#0");
                    }
                }
                sig.return_type = ret;
            } else {
                sig.return_type = sem::type_unit();
            }

            for (const auto& o : f.outlives) {
                auto find = [&](const std::string& n) -> std::optional<RegionId> {
                    auto it = std::find(sig.universal_names.begin(),
                                        sig.universal_names.end(), n);
                    if (it == sig.universal_names.end()) {
                        err(DiagCode::UnknownLifetime, o.span,
                            "use of undeclared lifetime name `'" + n + "`");
                        return std::nullopt;
                    }
                    return static_cast<RegionId>(it - sig.universal_names.begin());
                };
                auto lo = find(o.longer), sh = find(o.shorter);
                if (lo && sh) sig.outlives.push_back(sem::OutlivesPair{*lo, *sh});
            }

            uint32_t idx = static_cast<uint32_t>(prog_.fns.size());
            FnInfo info;
            info.sig = std::move(sig);
            prog_.fns.push_back(std::move(info));
            prog_.fn_by_name.emplace(f.name, idx);
        }
    }

    // --- bodies ----------------------------------------------------------

    struct Scope {
        std::vector<std::pair<std::string, BindingId>> names;
    };

    struct BodyCtx {
        FnInfo* info = nullptr;
        const ast::FnDef* def = nullptr;
        std::vector<Scope> scopes;

        BindingId declare(std::string name, TypePtr type, bool is_mut, bool is_param,
                          Span span) {
            BindingId id = static_cast<BindingId>(info->bindings.size());
            info->bindings.push_back(
                sem::Binding{name, std::move(type), is_mut, is_param, span});
            scopes.back().names.emplace_back(std::move(name), id);
            return id;
        }
        std::optional<BindingId> lookup(const std::string& name) const {
            for (auto it = scopes.rbegin(); it != scopes.rend(); ++it) {
                for (auto nit = it->names.rbegin(); nit != it->names.rend(); ++nit) {
                    if (nit->first == name) return nit->second;
                }
            }
            return std::nullopt;
        }
    };

    BodyCtx* b_ = nullptr;

    void check_body(size_t fn_index) {
        const ast::FnDef& def = mod_.fns[fn_index];
        auto it = prog_.fn_by_name.find(def.name);
        if (it == prog_.fn_by_name.end() || it->second != fn_index) return;  // dup
        FnInfo& info = prog_.fns[it->second];

        BodyCtx ctx;
        ctx.info = &info;
        ctx.def = &def;
        ctx.scopes.emplace_back();
        b_ = &ctx;
        for (size_t i = 0; i < def.params.size(); ++i) {
            ctx.declare(def.params[i].name, info.sig.param_types[i],
                        def.params[i].is_mut, true, def.params[i].span);
        }
        check_block(def.body);
        b_ = nullptr;
    }

    FnInfo& info() { return *b_->info; }

    void check_block(const ast::Block& blk) {
        b_->scopes.emplace_back();
        for (const auto& s : blk.stmts) check_stmt(*s);
        b_->scopes.pop_back();
    }

    LifetimeCtx body_lifetime_ctx() {
        LifetimeCtx ctx;
        ctx.names = &info().sig.universal_names;
        ctx.allow_elision_fresh = false;  // body elision = fresh existential later
        return ctx;
    }

    void check_stmt(const ast::Stmt& s) {
        switch (s.kind) {
            case ast::Stmt::Kind::Let: {
                TypePtr declared;
                if (s.let_type) {
                    LifetimeCtx ctx = body_lifetime_ctx();
                    declared = resolve_type(*s.let_type, &ctx);
                }
                TypePtr init_ty;
                if (s.init) init_ty = check_expr(*s.init);
                TypePtr ty;
                if (declared && init_ty) {
                    if (!sem::same_type(declared, init_ty) && !is_error(declared) &&
                        !is_error(init_ty)) {
                        err(DiagCode::TypeMismatch, s.init->span,
                            "mismatched types: expected `" + prog_.type_name(declared) +
                                "`, found `" + prog_.type_name(init_ty) + "`");
                    }
                    ty = declared;
                } else if (declared) {
                    ty = declared;
                } else if (init_ty) {
                    ty = init_ty;
                } else {
                    err(DiagCode::TypeMismatch, s.span,
                        "type annotation needed for `" + s.let_name + "`");
                    ty = sem::type_error();
                }
                BindingId id = b_->declare(s.let_name, ty, s.let_mut, false, s.span);
                info().decl_binding[&s] = id;
                break;
            }
            case ast::Stmt::Kind::Assign: {
                TypePtr rhs = check_expr(*s.rhs);
                PlaceCk pl = check_place(*s.lhs, /*for_write=*/true);
                if (!pl.is_place) break;
                // Bare variables get a flow-sensitive check instead (the
                // first assignment to an uninitialized `let` is allowed).
                if (!pl.bare_var && !pl.mut_ok) {
                    err(DiagCode::AssignToImmutable, s.lhs->span,
                        "cannot assign to this place; it is not declared as "
                        "mutable or is behind a `&` reference");
                }
                if (rhs && !sem::same_type(pl.ty, rhs) && !is_error(pl.ty) &&
                    !is_error(rhs)) {
                    err(DiagCode::TypeMismatch, s.rhs->span,
                        "mismatched types: expected `" + prog_.type_name(pl.ty) +
                            "`, found `" + prog_.type_name(rhs) + "`");
                }
                break;
            }
            case ast::Stmt::Kind::Expr:
                check_expr(*s.expr);
                break;
            case ast::Stmt::Kind::If: {
                expect_bool(*s.expr);
                check_block(s.body);
                if (s.has_else) check_block(s.else_body);
                break;
            }
            case ast::Stmt::Kind::While: {
                expect_bool(*s.expr);
                check_block(s.body);
                break;
            }
            case ast::Stmt::Kind::Match:
                check_match(s);
                break;
            case ast::Stmt::Kind::Return: {
                const TypePtr& want = info().sig.return_type;
                if (s.expr) {
                    TypePtr got = check_expr(*s.expr);
                    if (got && !sem::same_type(want, got) && !is_error(want) &&
                        !is_error(got)) {
                        err(DiagCode::TypeMismatch, s.expr->span,
                            "mismatched types: expected `" + prog_.type_name(want) +
                                "`, found `" + prog_.type_name(got) + "`");
                    }
                } else if (want->kind != sem::Type::Kind::Unit) {
                    err(DiagCode::TypeMismatch, s.span,
                        "mismatched types: expected `" + prog_.type_name(want) +
                            "`, found `()`");
                }
                break;
            }
            case ast::Stmt::Kind::Block:
                check_block(s.body);
                break;
        }
    }

    static bool is_error(const TypePtr& t) {
        return !t || t->kind == sem::Type::Kind::Error;
    }

    void expect_bool(const ast::Expr& e) {
        TypePtr t = check_expr(e);
        if (!is_error(t) && t->kind != sem::Type::Kind::Bool) {
            err(DiagCode::TypeMismatch, e.span,
                "mismatched types: expected `bool`, found `" + prog_.type_name(t) + "`");
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

    void check_match(const ast::Stmt& s) {
        TypePtr scrut;
        bool scrut_mut = true;  // non-place scrutinees are owned temporaries
        if (is_place_shaped(*s.expr)) {
            PlaceCk pl = check_place(*s.expr, false);
            scrut = pl.is_place ? pl.ty : sem::type_error();
            scrut_mut = pl.mut_ok;
        } else {
            scrut = check_expr(*s.expr);
        }
        const sem::Adt* adt = nullptr;
        AdtId adt_id = 0;
        if (!is_error(scrut)) {
            const TypePtr& t = scrut;
            if (t->kind == sem::Type::Kind::Adt && prog_.adts[t->adt].is_enum) {
                adt_id = t->adt;
                adt = &prog_.adts[adt_id];
                info().lit_adt[&s] = adt_id;
            } else {
                err(DiagCode::TypeMismatch, s.expr->span,
                    "`match` scrutinee must be an enum, found `" +
                        prog_.type_name(scrut) + "`");
            }
        }

        std::vector<bool> seen(adt ? adt->variants.size() : 0, false);
        for (const auto& arm : s.arms) {
            b_->scopes.emplace_back();
            check_arm(arm, adt, adt_id, seen, scrut_mut);
            check_block(arm.body);
            b_->scopes.pop_back();
        }
        if (adt) {
            std::string missing;
            for (size_t i = 0; i < seen.size(); ++i) {
                if (!seen[i]) {
                    if (!missing.empty()) missing += "`, `";
                    missing += adt->name + "::" + adt->variants[i].name;
                }
            }
            if (!missing.empty()) {
                err(DiagCode::NonExhaustiveMatch, s.span,
                    "non-exhaustive match: variant `" + missing + "` not covered");
            }
        }
    }

    void check_arm(const ast::MatchArm& arm, const sem::Adt* adt, AdtId adt_id,
                   std::vector<bool>& seen, bool scrut_mut) {
        const ast::Pattern& p = arm.pat;
        auto it = prog_.adt_by_name.find(p.enum_name);
        if (it == prog_.adt_by_name.end()) {
            err(DiagCode::UnknownName, p.span,
                "cannot find type `" + p.enum_name + "`");
            return;
        }
        if (adt && it->second != adt_id) {
            err(DiagCode::TypeMismatch, p.span,
                "mismatched types in pattern: expected `" + adt->name + "`, found `" +
                    p.enum_name + "`");
            return;
        }
        if (!adt) return;

        uint32_t vidx = 0;
        bool found = false;
        for (uint32_t i = 0; i < adt->variants.size(); ++i) {
            if (adt->variants[i].name == p.variant) {
                vidx = i;
                found = true;
                break;
            }
        }
        if (!found) {
            err(DiagCode::UnknownName, p.span,
                "no variant `" + p.variant + "` on enum `" + adt->name + "`");
            return;
        }
        if (seen[vidx]) {
            err(DiagCode::DuplicateDefinition, p.span,
                "variant `" + p.variant + "` covered by a previous arm");
        }
        seen[vidx] = true;
        info().lit_adt[&p] = adt_id;
        info().lit_variant[&p] = vidx;

        const sem::AdtVariant& variant = adt->variants[vidx];
        if (!p.has_fields) {
            if (!variant.fields.empty()) {
                err(DiagCode::ArityMismatch, p.span,
                    "pattern for `" + p.variant + "` does not mention its fields");
            }
            return;
        }

        std::vector<bool> field_seen(variant.fields.size(), false);
        std::vector<bool> field_by_value(variant.fields.size(), false);
        std::vector<std::string> bound;
        for (const auto& pf : p.fields) {
            uint32_t fidx = 0;
            bool ffound = false;
            for (uint32_t i = 0; i < variant.fields.size(); ++i) {
                if (variant.fields[i].name == pf.field) {
                    fidx = i;
                    ffound = true;
                    break;
                }
            }
            if (!ffound) {
                err(DiagCode::UnknownName, pf.span,
                    "variant `" + p.variant + "` has no field `" + pf.field + "`");
                continue;
            }
            if (field_seen[fidx]) {
                err(DiagCode::DuplicateDefinition, pf.span,
                    "field `" + pf.field + "` bound multiple times in pattern");
                continue;
            }
            field_seen[fidx] = true;
            if (!pf.wildcard && !pf.by_ref) field_by_value[fidx] = true;
            if (pf.wildcard) continue;
            if (std::find(bound.begin(), bound.end(), pf.binding) != bound.end()) {
                err(DiagCode::DuplicateMatchBinding, pf.span,
                    "identifier `" + pf.binding + "` is bound more than once in the "
                    "same pattern");
                continue;
            }
            bound.push_back(pf.binding);

            if (pf.by_ref && pf.ref_mut && !scrut_mut) {
                err(DiagCode::MutBorrowOfImmutable, pf.span,
                    "cannot bind `" + pf.binding +
                        "` with `ref mut`; the matched place is not mutable");
            }
            TypePtr fty = variant.fields[fidx].type;
            TypePtr bty = pf.by_ref
                              ? sem::type_ref(sem::kNoRegion, pf.ref_mut, fty)
                              : fty;
            BindingId id = b_->declare(pf.binding, std::move(bty),
                                       /*is_mut=*/false, false, pf.span);
            info().decl_binding[&pf] = id;
            info().field_index[&pf] = fidx;
        }
        for (size_t i = 0; i < field_seen.size(); ++i) {
            if (!field_seen[i]) {
                err(DiagCode::ArityMismatch, p.span,
                    "pattern does not mention field `" + variant.fields[i].name + "`");
            }
        }

        // A by-value binding of a non-Copy field moves it out of the matched
        // value. Drops release a value as a unit, so an arm that moves one
        // owning field must move every owning field of the variant; leaving
        // one behind (wildcarded or bound by reference) would strand it with
        // no drop obligation attached.
        bool arm_moves = false;
        for (size_t i = 0; i < field_by_value.size(); ++i)
            if (field_by_value[i] && !prog_.is_copy(variant.fields[i].type))
                arm_moves = true;
        if (arm_moves) {
            for (size_t i = 0; i < variant.fields.size(); ++i) {
                if (!field_by_value[i] && prog_.needs_drop(variant.fields[i].type)) {
                    err(DiagCode::UnsupportedPartialBoxMove, p.span,
                        "arm moves out of `" + p.variant + "` but leaves owning "
                        "field `" + variant.fields[i].name +
                        "` behind; bind every owning field by value, or none");
                }
            }
        }
    }

    // --- places ----------------------------------------------------------

    struct PlaceCk {
        bool is_place = false;
        TypePtr ty;          // type of the place
        bool mut_ok = false; // writable / &mut-borrowable
        bool bare_var = false;
    };

    // Checks that `e` denotes a place and computes its mutability the way
    // the projection chain determines it: a deref of `&mut` is always
    // writable, a deref of `&` never is, Box and fields inherit from the
    // container.
    PlaceCk check_place(const ast::Expr& e, bool for_write) {
        PlaceCk out;
        switch (e.kind) {
            case ast::Expr::Kind::Var: {
                TypePtr t = check_expr(e);
                auto bit = info().var_binding.find(&e);
                out.is_place = true;
                out.ty = t;
                out.bare_var = true;
                out.mut_ok = bit != info().var_binding.end() &&
                             info().bindings[bit->second].is_mut;
                return out;
            }
            case ast::Expr::Kind::Field: {
                PlaceCk base = check_place(*e.lhs, for_write);
                if (!base.is_place) return out;
                TypePtr t = base.ty;
                bool mut_ok = base.mut_ok;
                uint32_t derefs = 0;
                while (!is_error(t) && (t->kind == sem::Type::Kind::Box ||
                                        t->kind == sem::Type::Kind::Ref)) {
                    if (t->kind == sem::Type::Kind::Ref) mut_ok = t->ref_mut;
                    t = t->elem;
                    ++derefs;
                }
                if (is_error(t)) return out;
                if (t->kind != sem::Type::Kind::Adt || prog_.adts[t->adt].is_enum) {
                    err(DiagCode::TypeMismatch, e.span,
                        "no field `" + e.name + "` on type `" + prog_.type_name(t) +
                            "`");
                    return out;
                }
                const sem::AdtVariant& v = prog_.adts[t->adt].variants[0];
                for (uint32_t i = 0; i < v.fields.size(); ++i) {
                    if (v.fields[i].name == e.name) {
                        out.is_place = true;
                        out.ty = v.fields[i].type;
                        out.mut_ok = mut_ok;
                        info().expr_type[&e] = out.ty;
                        info().field_index[&e] = i;
                        info().autoderef[&e] = derefs;
                        return out;
                    }
                }
                err(DiagCode::UnknownName, e.span,
                    "no field `" + e.name + "` on struct `" + prog_.adts[t->adt].name +
                        "`");
                return out;
            }
            case ast::Expr::Kind::Unary: {
                if (e.un_op != ast::UnOp::Deref) break;
                PlaceCk base = check_place(*e.lhs, for_write);
                if (!base.is_place) return out;
                if (is_error(base.ty)) return out;
                if (base.ty->kind == sem::Type::Kind::Ref) {
                    out.is_place = true;
                    out.ty = base.ty->elem;
                    out.mut_ok = base.ty->ref_mut;
                    info().expr_type[&e] = out.ty;
                    return out;
                }
                if (base.ty->kind == sem::Type::Kind::Box) {
                    out.is_place = true;
                    out.ty = base.ty->elem;
                    out.mut_ok = base.mut_ok;
                    info().expr_type[&e] = out.ty;
                    return out;
                }
                err(DiagCode::TypeMismatch, e.span,
                    "type `" + prog_.type_name(base.ty) + "` cannot be dereferenced");
                return out;
            }
            default: break;
        }
        if (for_write) {
            err(DiagCode::InvalidPlaceExpr, e.span,
                "invalid left-hand side of assignment");
        } else {
            err(DiagCode::InvalidPlaceExpr, e.span,
                "cannot borrow this expression; only variables, fields, and "
                "dereferences can be borrowed");
        }
        return out;
    }

    // --- expressions -----------------------------------------------------

    TypePtr check_expr(const ast::Expr& e) {
        TypePtr t = check_expr_inner(e);
        info().expr_type[&e] = t;
        return t;
    }

    TypePtr check_expr_inner(const ast::Expr& e) {
        switch (e.kind) {
            case ast::Expr::Kind::Unit: return sem::type_unit();
            case ast::Expr::Kind::IntLit: return sem::type_i32();
            case ast::Expr::Kind::BoolLit: return sem::type_bool();
            case ast::Expr::Kind::Var: {
                auto id = b_->lookup(e.name);
                if (!id) {
                    err(DiagCode::UnknownName, e.span,
                        "cannot find value `" + e.name + "` in this scope");
                    return sem::type_error();
                }
                info().var_binding[&e] = *id;
                return info().bindings[*id].type;
            }
            case ast::Expr::Kind::Field: {
                PlaceCk pl = check_place(e, false);
                return pl.is_place ? pl.ty : sem::type_error();
            }
            case ast::Expr::Kind::Unary: {
                if (e.un_op == ast::UnOp::Deref) {
                    PlaceCk pl = check_place(e, false);
                    return pl.is_place ? pl.ty : sem::type_error();
                }
                TypePtr t = check_expr(*e.lhs);
                if (is_error(t)) return t;
                if (e.un_op == ast::UnOp::Neg) {
                    if (t->kind != sem::Type::Kind::I32) {
                        err(DiagCode::TypeMismatch, e.span,
                            "cannot negate `" + prog_.type_name(t) + "`");
                        return sem::type_error();
                    }
                    return sem::type_i32();
                }
                if (t->kind != sem::Type::Kind::Bool) {
                    err(DiagCode::TypeMismatch, e.span,
                        "cannot apply `!` to `" + prog_.type_name(t) + "`");
                    return sem::type_error();
                }
                return sem::type_bool();
            }
            case ast::Expr::Kind::Binary: {
                TypePtr lt = check_expr(*e.lhs);
                TypePtr rt = check_expr(*e.rhs);
                if (is_error(lt) || is_error(rt)) return sem::type_error();
                bool cmp_eq = e.bin_op == ast::BinOp::Eq || e.bin_op == ast::BinOp::Ne;
                bool cmp = cmp_eq || e.bin_op == ast::BinOp::Lt ||
                           e.bin_op == ast::BinOp::Le || e.bin_op == ast::BinOp::Gt ||
                           e.bin_op == ast::BinOp::Ge;
                if (!sem::same_type(lt, rt)) {
                    err(DiagCode::TypeMismatch, e.span,
                        "mismatched operand types `" + prog_.type_name(lt) + "` and `" +
                            prog_.type_name(rt) + "`");
                    return sem::type_error();
                }
                bool lt_i32 = lt->kind == sem::Type::Kind::I32;
                bool lt_bool = lt->kind == sem::Type::Kind::Bool;
                if (cmp_eq ? !(lt_i32 || lt_bool) : !lt_i32) {
                    err(DiagCode::TypeMismatch, e.span,
                        std::string("binary operation not supported for `") +
                            prog_.type_name(lt) + "`");
                    return sem::type_error();
                }
                return cmp ? sem::type_bool() : lt;
            }
            case ast::Expr::Kind::Borrow: {
                PlaceCk pl = check_place(*e.lhs, false);
                if (!pl.is_place) return sem::type_error();
                if (e.borrow_mut && !pl.mut_ok) {
                    err(DiagCode::MutBorrowOfImmutable, e.span,
                        "cannot borrow this place as mutable; it is not declared "
                        "as mutable");
                }
                return sem::type_ref(sem::kNoRegion, e.borrow_mut, pl.ty);
            }
            case ast::Expr::Kind::BoxNew: {
                TypePtr t = check_expr(*e.args[0]);
                return is_error(t) ? sem::type_error() : sem::type_box(t);
            }
            case ast::Expr::Kind::Call: {
                auto it = prog_.fn_by_name.find(e.name);
                if (it == prog_.fn_by_name.end()) {
                    err(DiagCode::UnknownName, e.span,
                        "cannot find function `" + e.name + "`");
                    for (const auto& a : e.args) check_expr(*a);
                    return sem::type_error();
                }
                const sem::FnSig& sig = prog_.fns[it->second].sig;
                info().callee[&e] = it->second;
                if (e.args.size() != sig.param_types.size()) {
                    err(DiagCode::ArityMismatch, e.span,
                        "`" + e.name + "` takes " +
                            std::to_string(sig.param_types.size()) +
                            " argument(s) but " + std::to_string(e.args.size()) +
                            " were supplied");
                }
                for (size_t i = 0; i < e.args.size(); ++i) {
                    TypePtr at = check_expr(*e.args[i]);
                    if (i < sig.param_types.size() && !is_error(at) &&
                        !sem::same_type(at, sig.param_types[i])) {
                        err(DiagCode::TypeMismatch, e.args[i]->span,
                            "mismatched types: expected `" +
                                prog_.type_name(sig.param_types[i]) + "`, found `" +
                                prog_.type_name(at) + "`");
                    }
                }
                return sig.return_type;
            }
            case ast::Expr::Kind::StructLit: {
                auto it = prog_.adt_by_name.find(e.name);
                if (it == prog_.adt_by_name.end() || prog_.adts[it->second].is_enum) {
                    err(DiagCode::UnknownName, e.span,
                        "cannot find struct `" + e.name + "`");
                    for (const auto& f : e.fields) check_expr(*f.value);
                    return sem::type_error();
                }
                info().lit_adt[&e] = it->second;
                check_field_inits(e, prog_.adts[it->second].variants[0]);
                return sem::type_adt(it->second);
            }
            case ast::Expr::Kind::EnumLit: {
                auto it = prog_.adt_by_name.find(e.name);
                if (it == prog_.adt_by_name.end() || !prog_.adts[it->second].is_enum) {
                    err(DiagCode::UnknownName, e.span,
                        "cannot find enum `" + e.name + "`");
                    for (const auto& f : e.fields) check_expr(*f.value);
                    return sem::type_error();
                }
                const sem::Adt& adt = prog_.adts[it->second];
                uint32_t vidx = 0;
                bool found = false;
                for (uint32_t i = 0; i < adt.variants.size(); ++i) {
                    if (adt.variants[i].name == e.variant) {
                        vidx = i;
                        found = true;
                        break;
                    }
                }
                if (!found) {
                    err(DiagCode::UnknownName, e.span,
                        "no variant `" + e.variant + "` on enum `" + adt.name + "`");
                    return sem::type_error();
                }
                info().lit_adt[&e] = it->second;
                info().lit_variant[&e] = vidx;
                if (e.fields.empty() && !adt.variants[vidx].fields.empty()) {
                    err(DiagCode::ArityMismatch, e.span,
                        "variant `" + e.variant + "` requires field values");
                } else {
                    check_field_inits(e, adt.variants[vidx]);
                }
                return sem::type_adt(it->second);
            }
        }
        return sem::type_error();
    }

    void check_field_inits(const ast::Expr& e, const sem::AdtVariant& variant) {
        std::vector<bool> seen(variant.fields.size(), false);
        for (const auto& fi : e.fields) {
            uint32_t idx = 0;
            bool found = false;
            for (uint32_t i = 0; i < variant.fields.size(); ++i) {
                if (variant.fields[i].name == fi.name) {
                    idx = i;
                    found = true;
                    break;
                }
            }
            TypePtr vt = check_expr(*fi.value);
            if (!found) {
                err(DiagCode::UnknownName, fi.span,
                    "`" + variant.name + "` has no field named `" + fi.name + "`");
                continue;
            }
            if (seen[idx]) {
                err(DiagCode::DuplicateDefinition, fi.span,
                    "field `" + fi.name + "` specified more than once");
                continue;
            }
            seen[idx] = true;
            info().field_index[&fi] = idx;
            if (!is_error(vt) && !sem::same_type(vt, variant.fields[idx].type)) {
                err(DiagCode::TypeMismatch, fi.value->span,
                    "mismatched types: expected `" +
                        prog_.type_name(variant.fields[idx].type) + "`, found `" +
                        prog_.type_name(vt) + "`");
            }
        }
        std::string missing;
        for (size_t i = 0; i < seen.size(); ++i) {
            if (!seen[i]) {
                if (!missing.empty()) missing += "`, `";
                missing += variant.fields[i].name;
            }
        }
        if (!missing.empty()) {
            err(DiagCode::ArityMismatch, e.span,
                "missing field `" + missing + "` in initializer");
        }
    }
};

}  // namespace

sem::Program typecheck(const ast::Module& m, DiagnosticBag& diags) {
    return ModuleChecker(m, diags).run();
}

}  // namespace rustlight

#include "rustlight/borrow_check.hpp"

#include <set>
#include <sstream>

namespace rustlight::flow {

namespace {

ir::Place place_prefix_of(const ir::Place& p, size_t len) {
    return ir::Place{p.local,
                     {p.proj.begin(), p.proj.begin() + static_cast<long>(len)}};
}

// User-facing rendering of a place: locals by source name, fields by
// field name, derefs with minimal parentheses.
std::string place_display(const sem::Program& prog, const ir::Function& fn,
                          const ir::Place& pl) {
    std::string s = fn.locals[pl.local].name.empty()
                        ? "_" + std::to_string(pl.local)
                        : fn.locals[pl.local].name;
    bool atom = true;
    sem::TypePtr t = fn.local_type(pl.local);
    uint32_t variant = 0;
    bool have_variant = false;
    for (const auto& pr : pl.proj) {
        switch (pr.kind) {
            case ir::Projection::Kind::Deref:
                s = "*" + s;
                atom = false;
                t = t ? t->elem : nullptr;
                have_variant = false;
                break;
            case ir::Projection::Kind::Downcast:
                variant = pr.index;
                have_variant = true;
                break;
            case ir::Projection::Kind::Field: {
                if (!atom) {
                    s = "(" + s + ")";
                    atom = true;
                }
                std::string fname = std::to_string(pr.index);
                if (t && t->kind == sem::TypeKind::Adt && t->adt < prog.adts.size()) {
                    const sem::Adt& adt = prog.adts[t->adt];
                    uint32_t v = have_variant ? variant : 0;
                    if (v < adt.variants.size() &&
                        pr.index < adt.variants[v].fields.size()) {
                        const auto& f = adt.variants[v].fields[pr.index];
                        fname = f.name;
                        t = f.type;
                    } else {
                        t = nullptr;
                    }
                } else {
                    t = nullptr;
                }
                s += "." + fname;
                have_variant = false;
                break;
            }
        }
    }
    return s;
}

sem::RegionId resolve_region(sem::RegionId r,
                             const std::vector<sem::RegionId>* map) {
    if (r == sem::kNoRegion || map == nullptr) return r;
    if (r < map->size()) return (*map)[r];
    return sem::kNoRegion;
}

}  // namespace

BorrowAnalysis::BorrowAnalysis(const sem::Program& prog, const ir::Function& fn,
                               const LoanTable& table,
                               const LivenessResult& live)
    : prog_(&prog), fn_(&fn), table_(&table), live_(&live),
      loan_at_(fn.nodes.size(), UINT32_MAX) {
    for (uint32_t lid = table.num_universals; lid < table.loans.size(); ++lid)
        loan_at_[table.loans[lid].origin] = lid;
}

BorrowState BorrowAnalysis::bottom(const ir::Function& fn) const {
    BorrowState st(fn.num_regions, static_cast<uint32_t>(table_->loans.size()));
    for (uint32_t r = 0; r < fn.num_regions; ++r) st.dead.set(r);
    return st;
}

BorrowState BorrowAnalysis::boundary(const ir::Function& fn) const {
    BorrowState st(fn.num_regions, static_cast<uint32_t>(table_->loans.size()));
    // Existential regions are not yet in scope; universal regions are
    // alive for the whole body and carry their placeholder loan.
    for (uint32_t r = fn.num_universals; r < fn.num_regions; ++r) st.dead.set(r);
    for (uint32_t u = 0; u < fn.num_universals; ++u) st.add_loan(u, u);
    return st;
}

void BorrowAnalysis::flow_types(State& st, const sem::TypePtr& src,
                                const sem::TypePtr& dst, bool invariant,
                                const std::vector<sem::RegionId>* src_map,
                                const std::vector<sem::RegionId>* dst_map) const {
    if (!src || !dst) return;
    if (src->kind == sem::TypeKind::Ref && dst->kind == sem::TypeKind::Ref) {
        sem::RegionId rs = resolve_region(src->region, src_map);
        sem::RegionId rd = resolve_region(dst->region, dst_map);
        if (rs != sem::kNoRegion && rd != sem::kNoRegion &&
            rs < st.num_regions() && rd < st.num_regions()) {
            if (invariant)
                st.merge(rs, rd);
            else
                st.flow_loans(rs, rd);
        }
        // The referent of a `&mut` is invariant: writes through the
        // destination could smuggle a shorter-lived reference back.
        flow_types(st, src->elem, dst->elem, invariant || dst->ref_mut,
                   src_map, dst_map);
        return;
    }
    if (src->kind == sem::TypeKind::Box && dst->kind == sem::TypeKind::Box) {
        flow_types(st, src->elem, dst->elem, invariant, src_map, dst_map);
    }
}

void BorrowAnalysis::transfer(const ir::Function& fn, ir::NodeId n,
                              const State& in, State& out) const {
    out = in;
    const ir::Node& node = fn.nodes[n];

    if (node.instr && node.instr->kind == ir::Instr::Kind::Assign) {
        const ir::Instr& ins = *node.instr;
        sem::TypePtr dest_ty = ir::place_type(*prog_, fn, ins.dest);
        const ir::Rvalue& rv = ins.rv;
        switch (rv.kind) {
            case ir::Rvalue::Kind::Use:
                if (rv.a.is_place())
                    flow_types(out, ir::place_type(*prog_, fn, rv.a.place),
                               dest_ty, false, nullptr, nullptr);
                break;
            case ir::Rvalue::Kind::Box:
                if (rv.a.is_place() && dest_ty &&
                    dest_ty->kind == sem::TypeKind::Box)
                    flow_types(out, ir::place_type(*prog_, fn, rv.a.place),
                               dest_ty->elem, false, nullptr, nullptr);
                break;
            case ir::Rvalue::Kind::Ref: {
                uint32_t lid = loan_at_[n];
                // Reborrows: the new loan must keep every loan alive that
                // the path dereferences, or the chain's root could die
                // while this reference still reaches its data.
                for (size_t i = 0; i < rv.ref_place.proj.size(); ++i) {
                    if (rv.ref_place.proj[i].kind != ir::Projection::Kind::Deref)
                        continue;
                    sem::TypePtr base = ir::place_type(
                        *prog_, fn, place_prefix_of(rv.ref_place, i));
                    if (base && base->kind == sem::TypeKind::Ref &&
                        base->region != sem::kNoRegion &&
                        base->region < out.num_regions())
                        out.flow_loans(base->region, rv.ref_region);
                }
                if (lid != UINT32_MAX && rv.ref_region != sem::kNoRegion &&
                    rv.ref_region < out.num_regions())
                    out.add_loan(rv.ref_region, lid);
                if (dest_ty && dest_ty->kind == sem::TypeKind::Ref) {
                    if (dest_ty->region != sem::kNoRegion &&
                        dest_ty->region < out.num_regions() &&
                        rv.ref_region != sem::kNoRegion &&
                        rv.ref_region < out.num_regions())
                        out.flow_loans(rv.ref_region, dest_ty->region);
                    flow_types(out, ir::place_type(*prog_, fn, rv.ref_place),
                               dest_ty->elem, dest_ty->ref_mut, nullptr,
                               nullptr);
                }
                break;
            }
            case ir::Rvalue::Kind::Binary:
            case ir::Rvalue::Kind::Unary:
            case ir::Rvalue::Kind::Aggregate:
                break;  // scalar or region-free operands
        }
    }

    if (node.term.kind == ir::Terminator::Kind::Call) {
        const ir::Terminator& t = node.term;
        const sem::FnSig& sig = prog_->fns[t.callee].sig;
        for (size_t i = 0; i < t.args.size() && i < sig.param_types.size(); ++i) {
            if (!t.args[i].is_place()) continue;
            flow_types(out, ir::place_type(*prog_, fn, t.args[i].place),
                       sig.param_types[i], false, nullptr, &t.inst_regions);
        }
        for (const auto& op : sig.outlives) {
            sem::RegionId lr = resolve_region(op.longer, &t.inst_regions);
            sem::RegionId sr = resolve_region(op.shorter, &t.inst_regions);
            if (lr != sem::kNoRegion && sr != sem::kNoRegion &&
                lr < out.num_regions() && sr < out.num_regions())
                out.flow_loans(lr, sr);
        }
        flow_types(out, sig.return_type, ir::place_type(*prog_, fn, t.dest),
                   false, &t.inst_regions, nullptr);
    }

    // Scope step: liveness decides which existential regions are in
    // scope after this node; a class that is entirely dead forgets its
    // loans (this is the only way a loan leaves the state).
    for (uint32_t r = fn.num_universals; r < fn.num_regions; ++r) {
        if (live_->region_live_after[n].test(r))
            out.dead.reset(r);
        else
            out.dead.set(r);
    }
    for (uint32_t r = 0; r < fn.num_regions; ++r) {
        if (out.uf.find(r) != r) continue;
        if (out.loans[r].any() && out.class_fully_dead(r)) out.loans[r].clear();
    }
}

// --- access checking --------------------------------------------------------

namespace {

struct Access {
    enum class Kind : uint8_t {
        Read,          // copy / branch condition
        SharedBorrow,  // & of the place
        MutBorrow,     // &mut of the place
        Write,         // assignment destination
        Move,          // move operand
        Destroy,       // Drop / CondDrop (deep)
        EndStorage,    // StorageDead (shallow: stops at ref derefs)
    };
    Kind kind;
    ir::Place place;
    Span span;
};

void access_operand(std::vector<Access>& out, const ir::Operand& op, Span sp) {
    if (op.kind == ir::Operand::Kind::Copy)
        out.push_back({Access::Kind::Read, op.place, sp});
    else if (op.kind == ir::Operand::Kind::Move)
        out.push_back({Access::Kind::Move, op.place, sp});
}

void node_accesses(const ir::Node& node, std::vector<Access>& out) {
    out.clear();
    if (node.instr) {
        const ir::Instr& ins = *node.instr;
        Span sp = ins.span;
        switch (ins.kind) {
            case ir::Instr::Kind::Assign: {
                const ir::Rvalue& rv = ins.rv;
                switch (rv.kind) {
                    case ir::Rvalue::Kind::Use:
                    case ir::Rvalue::Kind::Box:
                    case ir::Rvalue::Kind::Unary:
                        access_operand(out, rv.a, sp);
                        break;
                    case ir::Rvalue::Kind::Binary:
                        access_operand(out, rv.a, sp);
                        access_operand(out, rv.b, sp);
                        break;
                    case ir::Rvalue::Kind::Ref:
                        out.push_back({rv.ref_mut ? Access::Kind::MutBorrow
                                                  : Access::Kind::SharedBorrow,
                                       rv.ref_place, sp});
                        break;
                    case ir::Rvalue::Kind::Aggregate:
                        for (const auto& e : rv.elems) access_operand(out, e, sp);
                        break;
                }
                out.push_back({Access::Kind::Write, ins.dest, sp});
                break;
            }
            case ir::Instr::Kind::Drop:
            case ir::Instr::Kind::CondDrop:
                out.push_back({Access::Kind::Destroy, ins.dest, sp});
                break;
            case ir::Instr::Kind::StorageDead:
                out.push_back({Access::Kind::EndStorage, ins.dest, sp});
                break;
            case ir::Instr::Kind::Nop: break;
        }
    }
    const ir::Terminator& t = node.term;
    switch (t.kind) {
        case ir::Terminator::Kind::If: access_operand(out, t.cond, t.span); break;
        case ir::Terminator::Kind::Switch:
            out.push_back({Access::Kind::Read, t.scrutinee, t.span});
            break;
        case ir::Terminator::Kind::Call:
            for (const auto& a : t.args) access_operand(out, a, t.span);
            out.push_back({Access::Kind::Write, t.dest, t.span});
            break;
        case ir::Terminator::Kind::Goto:
        case ir::Terminator::Kind::Return: break;
    }
}

bool kinds_conflict(Access::Kind k, const Loan& l) {
    switch (k) {
        case Access::Kind::Read:
        case Access::Kind::SharedBorrow:
            return l.is_mut;
        default:
            return true;
    }
}

// Storage death of a local does not touch data reached through a
// reference stored in it: `fn f(r: &mut S) -> &mut i32 { &mut (*r).x }`
// must stay legal when r's slot dies.
bool end_storage_overlap(const sem::Program& prog, const ir::Function& fn,
                         const ir::Place& dead, const ir::Place& loan_place) {
    if (dead.local != loan_place.local) return false;
    for (size_t i = 0; i < loan_place.proj.size(); ++i) {
        if (loan_place.proj[i].kind != ir::Projection::Kind::Deref) continue;
        sem::TypePtr base =
            ir::place_type(prog, fn, place_prefix_of(loan_place, i));
        if (base && base->kind == sem::TypeKind::Ref) return false;
    }
    return true;
}

bool access_overlap(const sem::Program& prog, const ir::Function& fn,
                    const BorrowOptions& opts, const Access& a,
                    const Loan& l) {
    if (a.kind == Access::Kind::EndStorage)
        return end_storage_overlap(prog, fn, a.place, l.place);
    if (opts.field_insensitive) return a.place.local == l.place.local;
    return ir::places_conflict(a.place, l.place);
}

void report_conflict(const sem::Program& prog, const ir::Function& fn,
                     DiagnosticBag& diags, const Access& a, const Loan& l) {
    std::string ap = place_display(prog, fn, a.place);
    std::string lp = place_display(prog, fn, l.place);
    Diagnostic d;
    d.span = a.span;
    d.note = "borrow of `" + lp + "` occurs here";
    d.note_span = l.span;
    switch (a.kind) {
        case Access::Kind::Read:
            d.code = DiagCode::UseWhileMutablyBorrowed;
            d.message = "cannot use `" + ap + "` because it is mutably borrowed";
            break;
        case Access::Kind::SharedBorrow:
            d.code = DiagCode::UseWhileMutablyBorrowed;
            d.message = "cannot borrow `" + ap +
                        "` as immutable because it is also borrowed as mutable";
            break;
        case Access::Kind::MutBorrow:
            d.code = DiagCode::MutableBorrowWhileBorrowed;
            d.message = l.is_mut
                            ? "cannot borrow `" + ap +
                                  "` as mutable more than once at a time"
                            : "cannot borrow `" + ap +
                                  "` as mutable because it is also borrowed as "
                                  "immutable";
            break;
        case Access::Kind::Write:
            d.code = DiagCode::AssignWhileBorrowed;
            d.message = "cannot assign to `" + ap + "` because it is borrowed";
            break;
        case Access::Kind::Move:
            d.code = DiagCode::MoveWhileBorrowed;
            d.message = "cannot move out of `" + ap + "` because it is borrowed";
            break;
        case Access::Kind::Destroy:
        case Access::Kind::EndStorage:
            d.code = DiagCode::MoveWhileBorrowed;
            d.message = "`" + ap + "` does not live long enough";
            d.span = l.span;
            d.note = "`" + ap + "` dropped here while the borrow of `" + lp +
                     "` is still live";
            d.note_span = a.span;
            break;
    }
    diags.report(std::move(d));
}

std::string universal_display(const sem::FnSig& sig, uint32_t u) {
    if (u < sig.universal_names.size() && !sig.universal_names[u].empty() &&
        sig.universal_names[u][0] != '#')
        return "'" + sig.universal_names[u];
    return "'#" + std::to_string(u);
}

// Reports escaping-region errors at the return node. Loans reported as
// "cannot return reference to local" are added to `suppressed` so the
// conflict scan does not also flag the end-of-scope drop of the same
// local ("does not live long enough") — one message per escape.
void check_return(const sem::Program& prog, const ir::Function& fn,
                  const BorrowFnResult& res, DiagnosticBag& diags,
                  std::set<uint32_t>& suppressed) {
    const BorrowState& st = res.solved.in_facts[fn.return_node];
    if (st.num_regions() == 0) return;
    const sem::FnSig& sig = prog.fns[fn.fn_index].sig;
    // If the return type cannot carry a reference, an escaping frame-local
    // loan surfaces as a scope conflict instead; phrasing it as "cannot
    // return reference" would be misleading.
    std::vector<sem::RegionId> ret_regions;
    sem::collect_regions(sig.return_type, ret_regions);
    bool returns_refs = !ret_regions.empty();
    std::set<std::pair<uint32_t, uint32_t>> seen_universal;  // (v, u)
    std::set<uint32_t> seen_local;
    for (uint32_t u = 0; u < fn.num_universals; ++u) {
        const BitSet& loans = st.loans_of(u);
        for (uint32_t lid = 0; lid < res.table.loans.size(); ++lid) {
            if (!loans.test(lid)) continue;
            const Loan& l = res.table.loans[lid];
            if (l.placeholder) {
                uint32_t v = l.universal;
                if (res.table.outlives_ok(v, u)) continue;
                if (!seen_universal.insert({v, u}).second) continue;
                Diagnostic d;
                d.code = DiagCode::UniversalRegionViolation;
                d.span = sig.span;
                d.message = "lifetime " + universal_display(sig, v) +
                            " may not live long enough: the signature requires "
                            "that it outlives " +
                            universal_display(sig, u) +
                            ", but no such bound is declared";
                diags.report(std::move(d));
            } else if (l.frame_local && returns_refs) {
                suppressed.insert(lid);
                if (!seen_local.insert(lid).second) continue;
                Diagnostic d;
                d.code = DiagCode::ReturnLocalReference;
                d.span = l.span;
                d.message = "cannot return reference to local value `" +
                            place_display(prog, fn, l.place) + "`";
                d.note = "borrowed value is dropped when the function returns";
                d.note_span = l.span;
                diags.report(std::move(d));
            }
        }
    }
}

}  // namespace

BorrowFnResult borrow_check_fn(const sem::Program& prog, const ir::Function& fn,
                               const BorrowOptions& opts, DiagnosticBag& diags) {
    BorrowFnResult res;
    res.table = build_loan_table(prog, fn);
    res.liveness = solve_liveness(fn);
    BorrowAnalysis analysis(prog, fn, res.table, res.liveness);
    res.solved = solve(fn, analysis, Direction::Forward);
    if (!res.solved.converged) {
        diags.report(DiagCode::InternalError, prog.fns[fn.fn_index].sig.span,
                     "borrow analysis failed to converge in `" + fn.name + "`");
        return res;
    }

    std::set<uint32_t> suppressed;
    check_return(prog, fn, res, diags, suppressed);

    std::vector<Access> accesses;
    std::set<std::pair<uint32_t, uint32_t>> reported;  // (node, loan)
    std::vector<sem::RegionId> tmp_regions;
    for (ir::NodeId n = 0; n < fn.nodes.size(); ++n) {
        const BorrowState& st = res.solved.in_facts[n];
        if (st.num_regions() == 0) continue;  // unreachable; nothing flowed in
        // A loan is in scope here only if some region of its class is
        // live at this very point. The transfer kills such classes when
        // computing the node's out-state, but the in-state still carries
        // them when a sibling branch keeps them alive; checking against
        // those would reject programs whose borrow expired on this path.
        BitSet class_live(st.num_regions());
        for (uint32_t u = 0; u < fn.num_universals; ++u)
            class_live.set(st.uf.find(u));
        for (uint32_t l = 0; l < fn.locals.size(); ++l) {
            if (!res.liveness.live_before[n].test(l)) continue;
            tmp_regions.clear();
            sem::collect_regions(fn.local_type(l), tmp_regions);
            for (sem::RegionId r : tmp_regions)
                if (r != sem::kNoRegion && r < st.num_regions())
                    class_live.set(st.uf.find(r));
        }
        // Every loan present in a live class is a live borrow here.
        BitSet live_loans(static_cast<uint32_t>(res.table.loans.size()));
        bool any = false;
        for (uint32_t r = 0; r < st.num_regions(); ++r) {
            if (st.uf.find(r) != r) continue;
            if (!class_live.test(r)) continue;
            if (st.loans[r].any()) {
                live_loans.union_with(st.loans[r]);
                any = true;
            }
        }
        if (!any) continue;
        node_accesses(fn.nodes[n], accesses);
        for (const Access& a : accesses) {
            for (uint32_t lid = res.table.num_universals;
                 lid < res.table.loans.size(); ++lid) {
                if (!live_loans.test(lid)) continue;
                const Loan& l = res.table.loans[lid];
                if (l.origin == n) continue;  // a loan never conflicts with itself
                if ((a.kind == Access::Kind::Destroy ||
                     a.kind == Access::Kind::EndStorage) &&
                    suppressed.count(lid))
                    continue;
                if (!kinds_conflict(a.kind, l)) continue;
                if (!access_overlap(prog, fn, opts, a, l)) continue;
                if (!reported.insert({n, lid}).second) continue;
                report_conflict(prog, fn, diags, a, l);
            }
        }
    }

    return res;
}

void borrow_check_program(const sem::Program& prog, const ir::Program& irp,
                          const BorrowOptions& opts, DiagnosticBag& diags) {
    for (const auto& fn : irp.fns) borrow_check_fn(prog, fn, opts, diags);
}

std::string print_borrow_results(const sem::Program& prog,
                                 const ir::Function& fn,
                                 const BorrowFnResult& res) {
    std::ostringstream os;
    os << "fn " << fn.name << ": " << res.table.loans.size() << " loans ("
       << res.table.num_universals << " placeholders), " << fn.num_regions
       << " regions\n";
    for (uint32_t lid = res.table.num_universals; lid < res.table.loans.size();
         ++lid)
        os << "  " << print_loan(res.table.loans[lid], lid) << "\n";
    for (ir::NodeId n = 0; n < fn.nodes.size(); ++n) {
        os << "  bb" << n << ": ";
        if (res.solved.in_facts[n].num_regions() == 0)
            os << "(unreachable)";
        else
            os << print_borrow_state(res.solved.in_facts[n], res.table);
        os << "\n";
    }
    (void)prog;
    return os.str();
}

std::string borrow_results_json(const sem::Program& prog,
                                const ir::Function& fn,
                                const BorrowFnResult& res) {
    std::ostringstream os;
    os << "{\"function\":\"" << fn.name << "\",\"loans\":[";
    for (uint32_t lid = 0; lid < res.table.loans.size(); ++lid) {
        const Loan& l = res.table.loans[lid];
        if (lid) os << ",";
        os << "{\"id\":" << lid;
        if (l.placeholder) {
            os << ",\"placeholder\":true,\"universal\":" << l.universal;
        } else {
            os << ",\"mut\":" << (l.is_mut ? "true" : "false") << ",\"place\":\""
               << place_display(prog, fn, l.place) << "\",\"region\":" << l.region
               << ",\"origin\":" << l.origin << ",\"frame_local\":"
               << (l.frame_local ? "true" : "false");
        }
        os << "}";
    }
    os << "],\"nodes\":[";
    for (ir::NodeId n = 0; n < fn.nodes.size(); ++n) {
        if (n) os << ",";
        os << "{\"id\":" << n << ",\"classes\":[";
        const BorrowState& st = res.solved.in_facts[n];
        bool first_class = true;
        for (uint32_t r = 0; r < st.num_regions(); ++r) {
            if (st.uf.find(r) != r) continue;
            bool has_member = false;
            std::ostringstream cls;
            cls << "{\"regions\":[";
            bool first = true;
            for (uint32_t i = 0; i < st.num_regions(); ++i) {
                if (st.uf.find(i) != r) continue;
                cls << (first ? "" : ",") << i;
                first = false;
                has_member = true;
            }
            cls << "],\"loans\":[";
            first = true;
            for (uint32_t lid = 0; lid < res.table.loans.size(); ++lid) {
                if (!st.loans[r].test(lid)) continue;
                cls << (first ? "" : ",") << lid;
                first = false;
            }
            cls << "]}";
            if (has_member) {
                if (!first_class) os << ",";
                first_class = false;
                os << cls.str();
            }
        }
        os << "],\"dead\":[";
        bool first = true;
        for (uint32_t r = 0; r < st.num_regions(); ++r) {
            if (!st.dead.test(r)) continue;
            os << (first ? "" : ",") << r;
            first = false;
        }
        os << "]}";
    }
    os << "]}";
    return os.str();
}

}  // namespace rustlight::flow

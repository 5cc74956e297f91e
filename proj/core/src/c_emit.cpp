#include "rustlight/c_emit.hpp"

#include <map>
#include <set>
#include <sstream>

namespace rustlight::cgen {

namespace {

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string crepr(const sem::Program& prog, const sem::TypePtr& t) {
    switch (t->kind) {
        case sem::TypeKind::Unit:
        case sem::TypeKind::Bool: return "uint8_t";
        case sem::TypeKind::I32: return "int32_t";
        case sem::TypeKind::Ref:
        case sem::TypeKind::Box: return crepr(prog, t->elem) + "*";
        case sem::TypeKind::Adt: return "rl_t_" + prog.adts[t->adt].name;
        case sem::TypeKind::Error: return "int32_t";
    }
    return "int32_t";
}

std::string mangle(const sem::Program& prog, const sem::TypePtr& t) {
    switch (t->kind) {
        case sem::TypeKind::Unit: return "unit";
        case sem::TypeKind::Bool: return "bool";
        case sem::TypeKind::I32: return "i32";
        case sem::TypeKind::Ref: return "ref_" + mangle(prog, t->elem);
        case sem::TypeKind::Box: return "box_" + mangle(prog, t->elem);
        case sem::TypeKind::Adt: return prog.adts[t->adt].name;
        case sem::TypeKind::Error: return "err";
    }
    return "err";
}

std::string int_lit(int32_t v) {
    if (v == INT32_MIN) return "(-2147483647 - 1)";
    return std::to_string(v);
}

struct Emitter {
    const sem::Program& prog;
    const ir::Program& irp;
    std::ostringstream out;

    // Droppable types needing glue, keyed by mangled name for stable
    // emission order; value is the semantic type.
    std::map<std::string, sem::TypePtr> glue;

    explicit Emitter(const sem::Program& p, const ir::Program& i)
        : prog(p), irp(i) {}

    void request_glue(const sem::TypePtr& t) {
        if (!t || !prog.needs_drop(t)) return;
        auto [it, inserted] = glue.emplace(mangle(prog, t), t);
        if (!inserted) return;
        if (t->kind == sem::TypeKind::Box) {
            request_glue(t->elem);
        } else if (t->kind == sem::TypeKind::Adt) {
            for (const auto& v : prog.adts[t->adt].variants)
                for (const auto& f : v.fields) request_glue(f.type);
        }
    }

    void collect_glue() {
        for (const auto& fn : irp.fns)
            for (const auto& node : fn.nodes)
                if (node.instr && (node.instr->kind == ir::Instr::Kind::Drop ||
                                   node.instr->kind == ir::Instr::Kind::CondDrop))
                    request_glue(ir::place_type(prog, fn, node.instr->dest));
    }

    // --- types --------------------------------------------------------------

    // Post-order over by-value field containment: a struct embedding
    // another ADT needs that ADT's definition first. Boxes and references
    // are pointers, so they impose nothing, and by-value containment is
    // acyclic (the type checker demands Box on recursive types).
    void adt_def_order(uint32_t a, std::vector<uint8_t>& state,
                       std::vector<uint32_t>& order) {
        if (state[a]) return;
        state[a] = 1;
        for (const auto& v : prog.adts[a].variants)
            for (const auto& f : v.fields)
                if (f.type && f.type->kind == sem::TypeKind::Adt)
                    adt_def_order(f.type->adt, state, order);
        order.push_back(a);
    }

    void emit_types() {
        for (const auto& adt : prog.adts)
            out << "typedef struct rl_t_" << adt.name << " rl_t_" << adt.name
                << ";\n";
        if (!prog.adts.empty()) out << "\n";
        std::vector<uint8_t> state(prog.adts.size(), 0);
        std::vector<uint32_t> order;
        for (uint32_t a = 0; a < prog.adts.size(); ++a)
            adt_def_order(a, state, order);
        for (uint32_t ai : order) {
            const auto& adt = prog.adts[ai];
            out << "struct rl_t_" << adt.name << " {\n";
            if (!adt.is_enum) {
                const auto& fields = adt.variants[0].fields;
                if (fields.empty()) out << "    uint8_t _z;\n";
                for (size_t i = 0; i < fields.size(); ++i)
                    out << "    " << crepr(prog, fields[i].type) << " f" << i
                        << ";\n";
            } else {
                out << "    int32_t tag;\n";
                bool any_payload = false;
                for (const auto& v : adt.variants)
                    if (!v.fields.empty()) any_payload = true;
                if (any_payload) {
                    out << "    union {\n";
                    for (size_t vi = 0; vi < adt.variants.size(); ++vi) {
                        const auto& v = adt.variants[vi];
                        if (v.fields.empty()) continue;
                        out << "        struct {\n";
                        for (size_t i = 0; i < v.fields.size(); ++i)
                            out << "            " << crepr(prog, v.fields[i].type)
                                << " f" << i << ";\n";
                        out << "        } v" << vi << ";\n";
                    }
                    out << "    } u;\n";
                }
            }
            out << "};\n\n";
        }
    }

    // --- runtime helpers ----------------------------------------------------

    void emit_runtime() {
        out << "void* rl_alloc(size_t n) {\n"
               "    void* p = malloc(n ? n : 1);\n"
               "    if (!p) { fprintf(stderr, \"rustlight: out of memory\\n\"); "
               "exit(101); }\n"
               "    return p;\n"
               "}\n\n"
               "int32_t rl_add(int32_t a, int32_t b) { return "
               "(int32_t)((uint32_t)a + (uint32_t)b); }\n"
               "int32_t rl_sub(int32_t a, int32_t b) { return "
               "(int32_t)((uint32_t)a - (uint32_t)b); }\n"
               "int32_t rl_mul(int32_t a, int32_t b) { return "
               "(int32_t)((uint32_t)a * (uint32_t)b); }\n"
               "int32_t rl_neg(int32_t a) { return (int32_t)(0u - (uint32_t)a); "
               "}\n"
               "int32_t rl_div(int32_t a, int32_t b) {\n"
               "    if (b == 0) { fprintf(stderr, \"rustlight: division by "
               "zero\\n\"); exit(101); }\n"
               "    if (a == (-2147483647 - 1) && b == -1) return a;\n"
               "    return a / b;\n"
               "}\n"
               "int32_t rl_rem(int32_t a, int32_t b) {\n"
               "    if (b == 0) { fprintf(stderr, \"rustlight: remainder by "
               "zero\\n\"); exit(101); }\n"
               "    if (a == (-2147483647 - 1) && b == -1) return 0;\n"
               "    return a % b;\n"
               "}\n\n";
    }

    // --- drop glue ----------------------------------------------------------

    std::string glue_name(const sem::TypePtr& t) {
        return "rl_drop_" + mangle(prog, t);
    }

    void emit_glue_protos() {
        for (const auto& [name, t] : glue)
            out << "void rl_drop_" << name << "(" << crepr(prog, t) << " v);\n";
        if (!glue.empty()) out << "\n";
    }

    void emit_glue_bodies() {
        for (const auto& [name, t] : glue) {
            out << "void rl_drop_" << name << "(" << crepr(prog, t) << " v) {\n";
            if (t->kind == sem::TypeKind::Box) {
                if (prog.needs_drop(t->elem))
                    out << "    " << glue_name(t->elem) << "(*v);\n";
                out << "    free(v);\n";
            } else if (t->kind == sem::TypeKind::Adt) {
                const sem::Adt& adt = prog.adts[t->adt];
                if (!adt.is_enum) {
                    const auto& fields = adt.variants[0].fields;
                    for (size_t i = 0; i < fields.size(); ++i)
                        if (prog.needs_drop(fields[i].type))
                            out << "    " << glue_name(fields[i].type) << "(v.f"
                                << i << ");\n";
                } else {
                    out << "    switch (v.tag) {\n";
                    for (size_t vi = 0; vi < adt.variants.size(); ++vi) {
                        const auto& var = adt.variants[vi];
                        bool any = false;
                        for (const auto& f : var.fields)
                            if (prog.needs_drop(f.type)) any = true;
                        if (!any) continue;
                        out << "    case " << vi << ":\n";
                        for (size_t i = 0; i < var.fields.size(); ++i)
                            if (prog.needs_drop(var.fields[i].type))
                                out << "        " << glue_name(var.fields[i].type)
                                    << "(v.u.v" << vi << ".f" << i << ");\n";
                        out << "        break;\n";
                    }
                    out << "    default: break;\n    }\n";
                }
            }
            out << "}\n\n";
        }
    }

    // --- places and operands ------------------------------------------------

    std::string place_expr(const ir::Function& fn, const ir::Place& p) {
        std::string s = "_" + std::to_string(p.local);
        sem::TypePtr t = fn.local_type(p.local);
        uint32_t variant = 0;
        bool have_variant = false;
        for (const auto& pr : p.proj) {
            switch (pr.kind) {
                case ir::Projection::Kind::Deref:
                    s = "(*" + s + ")";
                    t = t ? t->elem : nullptr;
                    have_variant = false;
                    break;
                case ir::Projection::Kind::Downcast:
                    variant = pr.index;
                    have_variant = true;
                    break;
                case ir::Projection::Kind::Field: {
                    bool is_enum = t && t->kind == sem::TypeKind::Adt &&
                                   prog.adts[t->adt].is_enum;
                    if (is_enum && have_variant)
                        s += ".u.v" + std::to_string(variant);
                    s += ".f" + std::to_string(pr.index);
                    if (t && t->kind == sem::TypeKind::Adt) {
                        const sem::Adt& adt = prog.adts[t->adt];
                        uint32_t v = have_variant ? variant : 0;
                        t = (v < adt.variants.size() &&
                             pr.index < adt.variants[v].fields.size())
                                ? adt.variants[v].fields[pr.index].type
                                : nullptr;
                    } else {
                        t = nullptr;
                    }
                    have_variant = false;
                    break;
                }
            }
        }
        return s;
    }

    std::string operand_expr(const ir::Function& fn, const ir::Operand& op) {
        switch (op.kind) {
            case ir::Operand::Kind::Copy:
            case ir::Operand::Kind::Move: return place_expr(fn, op.place);
            case ir::Operand::Kind::ConstInt: return int_lit(op.const_int);
            case ir::Operand::Kind::ConstBool: return op.const_bool ? "1" : "0";
            case ir::Operand::Kind::ConstUnit: return "0";
        }
        return "0";
    }

    // --- functions ----------------------------------------------------------

    std::string fn_proto(const ir::Function& fn) {
        std::ostringstream ss;
        const sem::TypePtr& ret = fn.local_type(0);
        ss << crepr(prog, ret) << " rl_" << fn.name << "(";
        if (fn.num_params == 0) {
            ss << "void";
        } else {
            for (uint32_t i = 1; i <= fn.num_params; ++i) {
                if (i > 1) ss << ", ";
                ss << crepr(prog, fn.local_type(i)) << " p" << i;
            }
        }
        ss << ")";
        return ss.str();
    }

    void emit_assign(const ir::Function& fn, const ir::Instr& ins,
                     const std::string& ind) {
        std::string dest = place_expr(fn, ins.dest);
        const ir::Rvalue& rv = ins.rv;
        switch (rv.kind) {
            case ir::Rvalue::Kind::Use:
                out << ind << dest << " = " << operand_expr(fn, rv.a) << ";\n";
                break;
            case ir::Rvalue::Kind::Ref:
                out << ind << dest << " = &" << place_expr(fn, rv.ref_place)
                    << ";\n";
                break;
            case ir::Rvalue::Kind::Unary:
                if (rv.un_op == ast::UnOp::Neg)
                    out << ind << dest << " = rl_neg(" << operand_expr(fn, rv.a)
                        << ");\n";
                else
                    out << ind << dest << " = (uint8_t)(!"
                        << operand_expr(fn, rv.a) << ");\n";
                break;
            case ir::Rvalue::Kind::Binary: {
                std::string a = operand_expr(fn, rv.a);
                std::string b = operand_expr(fn, rv.b);
                const char* helper = nullptr;
                const char* cmp = nullptr;
                switch (rv.bin_op) {
                    case ast::BinOp::Add: helper = "rl_add"; break;
                    case ast::BinOp::Sub: helper = "rl_sub"; break;
                    case ast::BinOp::Mul: helper = "rl_mul"; break;
                    case ast::BinOp::Div: helper = "rl_div"; break;
                    case ast::BinOp::Rem: helper = "rl_rem"; break;
                    case ast::BinOp::Eq: cmp = "=="; break;
                    case ast::BinOp::Ne: cmp = "!="; break;
                    case ast::BinOp::Lt: cmp = "<"; break;
                    case ast::BinOp::Le: cmp = "<="; break;
                    case ast::BinOp::Gt: cmp = ">"; break;
                    case ast::BinOp::Ge: cmp = ">="; break;
                }
                if (helper)
                    out << ind << dest << " = " << helper << "(" << a << ", " << b
                        << ");\n";
                else
                    out << ind << dest << " = (uint8_t)(" << a << " " << cmp
                        << " " << b << ");\n";
                break;
            }
            case ir::Rvalue::Kind::Box:
                out << ind << dest << " = rl_alloc(sizeof(*" << dest << "));\n";
                out << ind << "*" << dest << " = " << operand_expr(fn, rv.a)
                    << ";\n";
                break;
            case ir::Rvalue::Kind::Aggregate: {
                sem::TypePtr t = ir::place_type(prog, fn, ins.dest);
                const sem::Adt& adt = prog.adts[rv.adt];
                out << ind << dest << " = (" << crepr(prog, t) << "){";
                if (!adt.is_enum) {
                    if (rv.elems.empty()) {
                        out << " ._z = 0 ";
                    } else {
                        for (size_t i = 0; i < rv.elems.size(); ++i)
                            out << (i ? ", " : " ") << ".f" << i << " = "
                                << operand_expr(fn, rv.elems[i]);
                        out << " ";
                    }
                } else {
                    out << " .tag = " << rv.variant;
                    for (size_t i = 0; i < rv.elems.size(); ++i)
                        out << ", .u.v" << rv.variant << ".f" << i << " = "
                            << operand_expr(fn, rv.elems[i]);
                    out << " ";
                }
                out << "};\n";
                break;
            }
        }
    }

    void emit_function(const ir::Function& fn) {
        out << fn_proto(fn) << " {\n";
        // Locals; memset keeps every local address-taken and zeroed, so
        // pointer reads of never-assigned slots stay deterministic.
        for (size_t l = 0; l < fn.locals.size(); ++l)
            out << "    " << crepr(prog, fn.local_type(static_cast<uint32_t>(l)))
                << " _" << l << ";\n";
        for (size_t l = 0; l < fn.locals.size(); ++l)
            out << "    memset(&_" << l << ", 0, sizeof _" << l << ");\n";
        for (uint32_t i = 1; i <= fn.num_params; ++i)
            out << "    _" << i << " = p" << i << ";\n";

        // A label is emitted only for nodes some goto targets.
        std::set<ir::NodeId> targeted;
        std::vector<ir::NodeId> succ;
        for (const auto& node : fn.nodes) {
            node.term.successors(succ);
            for (ir::NodeId s : succ) targeted.insert(s);
        }

        for (ir::NodeId n = 0; n < fn.nodes.size(); ++n) {
            const ir::Node& node = fn.nodes[n];
            if (targeted.count(n)) out << "bb" << n << ":;\n";
            std::string ind = "    ";
            if (node.instr) {
                const ir::Instr& ins = *node.instr;
                switch (ins.kind) {
                    case ir::Instr::Kind::Assign: emit_assign(fn, ins, ind); break;
                    case ir::Instr::Kind::Drop: {
                        sem::TypePtr t = ir::place_type(prog, fn, ins.dest);
                        out << ind << glue_name(t) << "("
                            << place_expr(fn, ins.dest) << ");\n";
                        break;
                    }
                    case ir::Instr::Kind::CondDrop: {
                        sem::TypePtr t = ir::place_type(prog, fn, ins.dest);
                        out << ind << "if (_" << ins.flag << ") { " << glue_name(t)
                            << "(" << place_expr(fn, ins.dest) << "); _"
                            << ins.flag << " = 0; }\n";
                        break;
                    }
                    case ir::Instr::Kind::StorageDead:
                    case ir::Instr::Kind::Nop: break;
                }
            }
            const ir::Terminator& t = node.term;
            switch (t.kind) {
                case ir::Terminator::Kind::Goto:
                    out << ind << "goto bb" << t.next << ";\n";
                    break;
                case ir::Terminator::Kind::If:
                    out << ind << "if (" << operand_expr(fn, t.cond) << ") goto bb"
                        << t.next << "; else goto bb" << t.alt << ";\n";
                    break;
                case ir::Terminator::Kind::Switch: {
                    out << ind << "switch (" << place_expr(fn, t.scrutinee)
                        << ".tag) {\n";
                    for (size_t vi = 0; vi < t.targets.size(); ++vi)
                        out << ind << "case " << vi << ": goto bb" << t.targets[vi]
                            << ";\n";
                    out << ind << "default: exit(101);\n" << ind << "}\n";
                    break;
                }
                case ir::Terminator::Kind::Call: {
                    out << ind << place_expr(fn, t.dest) << " = rl_"
                        << irp.fns[t.callee].name << "(";
                    for (size_t i = 0; i < t.args.size(); ++i)
                        out << (i ? ", " : "") << operand_expr(fn, t.args[i]);
                    out << ");\n" << ind << "goto bb" << t.next << ";\n";
                    break;
                }
                case ir::Terminator::Kind::Return:
                    out << ind << "return _0;\n";
                    break;
            }
        }
        out << "}\n\n";
    }
};

}  // namespace

std::string emit_c(const sem::Program& prog, const ir::Program& irp,
                   const std::string& entry) {
    Emitter e(prog, irp);
    e.collect_glue();

    uint64_t hash = fnv1a(ir::print_program(irp, prog));
    std::ostringstream head;
    head << "/* generated by rustlight; ir-hash: " << std::hex << hash
         << std::dec << " */\n"
         << "#include <stdint.h>\n#include <stdio.h>\n#include <stdlib.h>\n"
         << "#include <string.h>\n\n";

    e.emit_types();
    e.emit_runtime();
    e.emit_glue_protos();
    for (const auto& fn : irp.fns) e.out << e.fn_proto(fn) << ";\n";
    if (!irp.fns.empty()) e.out << "\n";
    e.emit_glue_bodies();
    for (const auto& fn : irp.fns) e.emit_function(fn);

    // Entry wrapper; the entry returns i32 or unit (checked upstream).
    const ir::Function* ef = nullptr;
    for (const auto& fn : irp.fns)
        if (fn.name == entry) ef = &fn;
    if (ef) {
        const sem::TypePtr& rt = ef->local_type(0);
        if (rt && rt->kind == sem::TypeKind::I32)
            e.out << "int main(void) { return (int)rl_" << entry << "(); }\n";
        else
            e.out << "int main(void) { (void)rl_" << entry
                  << "(); return 0; }\n";
    }

    return head.str() + e.out.str();
}

}  // namespace rustlight::cgen

#include "rustlight/ir.hpp"

#include <algorithm>
#include <sstream>

namespace rustlight::ir {

std::vector<std::vector<NodeId>> Function::predecessors() const {
    std::vector<std::vector<NodeId>> preds(nodes.size());
    std::vector<NodeId> succ;
    for (NodeId n = 0; n < nodes.size(); ++n) {
        nodes[n].term.successors(succ);
        for (NodeId s : succ) preds[s].push_back(n);
    }
    return preds;
}

bool place_prefix(const Place& a, const Place& b) {
    if (a.local != b.local) return false;
    if (a.proj.size() > b.proj.size()) return false;
    for (size_t i = 0; i < a.proj.size(); ++i) {
        if (!(a.proj[i] == b.proj[i])) return false;
    }
    return true;
}

bool places_conflict(const Place& a, const Place& b) {
    if (a.local != b.local) return false;
    size_t n = std::min(a.proj.size(), b.proj.size());
    for (size_t i = 0; i < n; ++i) {
        const Projection& pa = a.proj[i];
        const Projection& pb = b.proj[i];
        if (pa.kind != pb.kind) {
            // A Deref against Field/Downcast at the same depth cannot
            // happen on well-typed places; treat as conflicting to stay
            // conservative.
            return true;
        }
        if (pa.kind == Projection::Kind::Field && pa.index != pb.index) return false;
        if (pa.kind == Projection::Kind::Downcast && pa.index != pb.index) return false;
    }
    return true;  // one is a prefix of the other
}

sem::TypePtr place_type(const sem::Program& prog, const Function& fn, const Place& p) {
    sem::TypePtr t = fn.locals[p.local].type;
    uint32_t variant = 0;
    for (const Projection& pr : p.proj) {
        if (!t) return sem::type_error();
        switch (pr.kind) {
            case Projection::Kind::Deref:
                t = t->elem;
                variant = 0;
                break;
            case Projection::Kind::Downcast:
                variant = pr.index;
                break;
            case Projection::Kind::Field: {
                if (t->kind != sem::Type::Kind::Adt) return sem::type_error();
                const sem::Adt& adt = prog.adts[t->adt];
                if (variant >= adt.variants.size() ||
                    pr.index >= adt.variants[variant].fields.size())
                    return sem::type_error();
                t = adt.variants[variant].fields[pr.index].type;
                variant = 0;
                break;
            }
        }
    }
    return t;
}

// --- printing ---------------------------------------------------------------

namespace {

std::string region_str(RegionId r) {
    if (r == sem::kNoRegion) return "'?";
    return "'" + std::to_string(r);
}

std::string type_str(const sem::TypePtr& t, const sem::Program& prog) {
    if (!t) return "<null>";
    switch (t->kind) {
        case sem::Type::Kind::Unit: return "()";
        case sem::Type::Kind::Bool: return "bool";
        case sem::Type::Kind::I32: return "i32";
        case sem::Type::Kind::Error: return "<error>";
        case sem::Type::Kind::Box: return "Box<" + type_str(t->elem, prog) + ">";
        case sem::Type::Kind::Ref:
            return "&" + region_str(t->region) + (t->ref_mut ? " mut " : " ") +
                   type_str(t->elem, prog);
        case sem::Type::Kind::Adt: return prog.adts[t->adt].name;
    }
    return "?";
}

std::string place_str(const Place& p, const sem::Program& prog, const Function& fn) {
    std::string out = "_" + std::to_string(p.local);
    sem::TypePtr t = fn.locals.empty() ? nullptr : fn.locals[p.local].type;
    uint32_t variant = 0;
    for (const Projection& pr : p.proj) {
        switch (pr.kind) {
            case Projection::Kind::Deref:
                out = "(*" + out + ")";
                if (t) t = t->elem;
                variant = 0;
                break;
            case Projection::Kind::Downcast: {
                std::string vname = std::to_string(pr.index);
                if (t && t->kind == sem::Type::Kind::Adt)
                    vname = prog.adts[t->adt].variants[pr.index].name;
                out = "(" + out + " as " + vname + ")";
                variant = pr.index;
                break;
            }
            case Projection::Kind::Field:
                out += "." + std::to_string(pr.index);
                if (t && t->kind == sem::Type::Kind::Adt) {
                    const auto& v = prog.adts[t->adt].variants[variant];
                    t = pr.index < v.fields.size() ? v.fields[pr.index].type : nullptr;
                }
                variant = 0;
                break;
        }
    }
    return out;
}

std::string operand_str(const Operand& op, const sem::Program& prog,
                        const Function& fn) {
    switch (op.kind) {
        case Operand::Kind::Copy: return "copy " + place_str(op.place, prog, fn);
        case Operand::Kind::Move: return "move " + place_str(op.place, prog, fn);
        case Operand::Kind::ConstInt: return "const " + std::to_string(op.const_int);
        case Operand::Kind::ConstBool:
            return op.const_bool ? "const true" : "const false";
        case Operand::Kind::ConstUnit: return "const unit";
    }
    return "?";
}

const char* bin_name(ast::BinOp op) {
    switch (op) {
        case ast::BinOp::Add: return "Add";
        case ast::BinOp::Sub: return "Sub";
        case ast::BinOp::Mul: return "Mul";
        case ast::BinOp::Div: return "Div";
        case ast::BinOp::Rem: return "Rem";
        case ast::BinOp::Eq: return "Eq";
        case ast::BinOp::Ne: return "Ne";
        case ast::BinOp::Lt: return "Lt";
        case ast::BinOp::Le: return "Le";
        case ast::BinOp::Gt: return "Gt";
        case ast::BinOp::Ge: return "Ge";
    }
    return "?";
}

std::string rvalue_str(const Rvalue& rv, const sem::Program& prog, const Function& fn) {
    switch (rv.kind) {
        case Rvalue::Kind::Use: return operand_str(rv.a, prog, fn);
        case Rvalue::Kind::Ref:
            return "&" + region_str(rv.ref_region) + (rv.ref_mut ? " mut " : " ") +
                   place_str(rv.ref_place, prog, fn);
        case Rvalue::Kind::Binary:
            return std::string(bin_name(rv.bin_op)) + "(" +
                   operand_str(rv.a, prog, fn) + ", " + operand_str(rv.b, prog, fn) +
                   ")";
        case Rvalue::Kind::Unary:
            return std::string(rv.un_op == ast::UnOp::Neg ? "Neg" : "Not") + "(" +
                   operand_str(rv.a, prog, fn) + ")";
        case Rvalue::Kind::Box: return "box(" + operand_str(rv.a, prog, fn) + ")";
        case Rvalue::Kind::Aggregate: {
            const sem::Adt& adt = prog.adts[rv.adt];
            std::string head = adt.name;
            if (adt.is_enum) head += "::" + adt.variants[rv.variant].name;
            std::string out = head + " { ";
            for (size_t i = 0; i < rv.elems.size(); ++i) {
                if (i) out += ", ";
                out += operand_str(rv.elems[i], prog, fn);
            }
            return out + (rv.elems.empty() ? "}" : " }");
        }
    }
    return "?";
}

std::string instr_str(const Instr& in, const sem::Program& prog, const Function& fn) {
    switch (in.kind) {
        case Instr::Kind::Assign:
            return place_str(in.dest, prog, fn) + " = " + rvalue_str(in.rv, prog, fn);
        case Instr::Kind::Drop: return "drop " + place_str(in.dest, prog, fn);
        case Instr::Kind::CondDrop:
            return "cond_drop " + place_str(in.dest, prog, fn) + " if _" +
                   std::to_string(in.flag);
        case Instr::Kind::StorageDead:
            return "storage_dead _" + std::to_string(in.dest.local);
        case Instr::Kind::Nop: return "nop";
    }
    return "?";
}

std::string term_str(const Terminator& t, const sem::Program& prog,
                     const Function& fn) {
    switch (t.kind) {
        case Terminator::Kind::Goto: return "-> bb" + std::to_string(t.next);
        case Terminator::Kind::If:
            return "if " + operand_str(t.cond, prog, fn) + " -> bb" +
                   std::to_string(t.next) + ", bb" + std::to_string(t.alt);
        case Terminator::Kind::Switch: {
            std::string out = "switch " + place_str(t.scrutinee, prog, fn) + " [";
            sem::TypePtr st = place_type(prog, fn, t.scrutinee);
            for (size_t i = 0; i < t.targets.size(); ++i) {
                if (i) out += ", ";
                std::string vname = std::to_string(i);
                if (st && st->kind == sem::Type::Kind::Adt)
                    vname = prog.adts[st->adt].variants[i].name;
                out += vname + " -> bb" + std::to_string(t.targets[i]);
            }
            return out + "]";
        }
        case Terminator::Kind::Call: {
            std::string out = place_str(t.dest, prog, fn) + " = call " +
                              prog.fns[t.callee].sig.name + "(";
            for (size_t i = 0; i < t.args.size(); ++i) {
                if (i) out += ", ";
                out += operand_str(t.args[i], prog, fn);
            }
            out += ")";
            if (!t.inst_regions.empty()) {
                out += " [";
                for (size_t i = 0; i < t.inst_regions.size(); ++i) {
                    if (i) out += ", ";
                    out += "'" + std::to_string(i) + " -> " +
                           region_str(t.inst_regions[i]);
                }
                out += "]";
            }
            return out + " -> bb" + std::to_string(t.next);
        }
        case Terminator::Kind::Return: return "return";
    }
    return "?";
}

}  // namespace

std::string print_place(const Place& p, const sem::Program& prog, const Function& fn) {
    return place_str(p, prog, fn);
}

std::string print_type(const sem::TypePtr& t, const sem::Program& prog) {
    return type_str(t, prog);
}

std::string print_function(const Function& fn, const sem::Program& prog) {
    std::ostringstream os;
    os << "fn " << fn.name << " {\n";
    os << "  regions: " << fn.num_universals << " universal, "
       << (fn.num_regions - fn.num_universals) << " existential";
    if (!fn.outlives.empty()) {
        os << "; outlives:";
        for (const auto& o : fn.outlives)
            os << " '" << o.longer << ": '" << o.shorter;
    }
    os << "\n";
    for (LocalId l = 0; l < fn.locals.size(); ++l) {
        const LocalDecl& d = fn.locals[l];
        os << "  _" << l << ": " << type_str(d.type, prog);
        if (l == 0) {
            os << " [return]";
        } else if (l <= fn.num_params) {
            os << " [param " << d.name << "]";
        } else if (d.is_drop_flag) {
            os << " [drop flag]";
        } else if (!d.name.empty()) {
            os << " [" << d.name << "]";
        }
        os << "\n";
    }
    for (NodeId n = 0; n < fn.nodes.size(); ++n) {
        const Node& node = fn.nodes[n];
        os << "  bb" << n << ": ";
        if (node.instr) {
            os << instr_str(*node.instr, prog, fn) << " "
               << term_str(node.term, prog, fn);
        } else {
            std::string t = term_str(node.term, prog, fn);
            // A bare Goto prints as "-> bbN"; other terminators stand alone.
            os << t;
        }
        os << "\n";
    }
    os << "}\n";
    return os.str();
}

std::string print_program(const Program& p, const sem::Program& prog) {
    std::string out;
    for (size_t i = 0; i < p.fns.size(); ++i) {
        if (i) out += "\n";
        out += print_function(p.fns[i], prog);
    }
    return out;
}

std::vector<std::string> validate(const Function& fn, const sem::Program& prog) {
    std::vector<std::string> problems;
    auto bad = [&](std::string m) { problems.push_back(std::move(m)); };

    if (fn.nodes.empty()) {
        bad("function has no nodes");
        return problems;
    }
    uint32_t returns = 0;
    std::vector<NodeId> succ;
    for (NodeId n = 0; n < fn.nodes.size(); ++n) {
        const Node& node = fn.nodes[n];
        node.term.successors(succ);
        for (NodeId s : succ) {
            if (s >= fn.nodes.size())
                bad("bb" + std::to_string(n) + " targets out-of-range bb" +
                    std::to_string(s));
        }
        if (node.instr && node.term.kind != Terminator::Kind::Goto)
            bad("bb" + std::to_string(n) + " carries an instruction but does not "
                "end in goto");
        if (node.term.kind == Terminator::Kind::Return) {
            ++returns;
            if (n != fn.return_node)
                bad("bb" + std::to_string(n) + " is a stray return node");
        }
        if (node.term.kind == Terminator::Kind::Call) {
            if (node.term.callee >= prog.fns.size())
                bad("bb" + std::to_string(n) + " calls unknown function");
            else if (node.term.inst_regions.size() !=
                     prog.fns[node.term.callee].sig.num_universals())
                bad("bb" + std::to_string(n) + " instantiates wrong region count");
        }
    }
    if (returns != 1) bad("function must have exactly one return node");
    for (LocalId l = 0; l < fn.locals.size(); ++l) {
        if (!fn.locals[l].type) bad("local _" + std::to_string(l) + " has no type");
    }
    return problems;
}

}  // namespace rustlight::ir

#include <sstream>

#include "rustlight/ast.hpp"

namespace rustlight::ast {
namespace {

const char* bin_op_str(BinOp op) {
    switch (op) {
        case BinOp::Add: return "+";
        case BinOp::Sub: return "-";
        case BinOp::Mul: return "*";
        case BinOp::Div: return "/";
        case BinOp::Rem: return "%";
        case BinOp::Eq: return "==";
        case BinOp::Ne: return "!=";
        case BinOp::Lt: return "<";
        case BinOp::Le: return "<=";
        case BinOp::Gt: return ">";
        case BinOp::Ge: return ">=";
    }
    return "?";
}

int bin_op_prec(BinOp op) {
    switch (op) {
        case BinOp::Eq:
        case BinOp::Ne:
        case BinOp::Lt:
        case BinOp::Le:
        case BinOp::Gt:
        case BinOp::Ge: return 1;
        case BinOp::Add:
        case BinOp::Sub: return 2;
        default: return 3;
    }
}

class Printer {
public:
    std::string take() { return out_.str(); }

    std::string module(const Module& m) {
        bool first = true;
        for (const auto& s : m.structs) {
            sep(first);
            struct_def(s);
        }
        for (const auto& e : m.enums) {
            sep(first);
            enum_def(e);
        }
        for (const auto& f : m.fns) {
            sep(first);
            fn_def(f);
        }
        return out_.str();
    }

    void type(const Type& t) {
        switch (t.kind) {
            case Type::Kind::Unit: out_ << "()"; break;
            case Type::Kind::Bool: out_ << "bool"; break;
            case Type::Kind::I32: out_ << "i32"; break;
            case Type::Kind::Box:
                out_ << "Box<";
                type(*t.elem);
                out_ << ">";
                break;
            case Type::Kind::Ref:
                out_ << "&";
                if (!t.lifetime.empty()) out_ << "'" << t.lifetime << " ";
                if (t.ref_mut) out_ << "mut ";
                type(*t.elem);
                break;
            case Type::Kind::Named: out_ << t.name; break;
        }
    }

    // `restricted` mirrors the parser's no-struct contexts: a struct or
    // braced enum literal printed there must be parenthesized or the
    // output would not re-parse.
    void expr(const Expr& e, int parent_prec, bool restricted) {
        switch (e.kind) {
            case Expr::Kind::Unit: out_ << "()"; break;
            case Expr::Kind::IntLit: out_ << e.int_value; break;
            case Expr::Kind::BoolLit: out_ << (e.bool_value ? "true" : "false"); break;
            case Expr::Kind::Var: out_ << e.name; break;
            case Expr::Kind::Field:
                maybe_paren(5, parent_prec, [&] {
                    expr(*e.lhs, 5, restricted);
                    out_ << "." << e.name;
                });
                break;
            case Expr::Kind::Unary:
                maybe_paren(4, parent_prec, [&] {
                    out_ << (e.un_op == UnOp::Neg   ? "-"
                             : e.un_op == UnOp::Not ? "!"
                                                    : "*");
                    expr(*e.lhs, 4, restricted);
                });
                break;
            case Expr::Kind::Borrow:
                maybe_paren(4, parent_prec, [&] {
                    out_ << (e.borrow_mut ? "&mut " : "&");
                    expr(*e.lhs, 4, restricted);
                });
                break;
            case Expr::Kind::Binary: {
                int prec = bin_op_prec(e.bin_op);
                maybe_paren(prec, parent_prec, [&] {
                    expr(*e.lhs, prec, restricted);
                    out_ << " " << bin_op_str(e.bin_op) << " ";
                    expr(*e.rhs, prec + 1, restricted);
                });
                break;
            }
            case Expr::Kind::BoxNew:
                out_ << "Box::new(";
                expr(*e.args[0], 0, false);
                out_ << ")";
                break;
            case Expr::Kind::Call:
                out_ << e.name << "(";
                for (size_t i = 0; i < e.args.size(); ++i) {
                    if (i) out_ << ", ";
                    expr(*e.args[i], 0, false);
                }
                out_ << ")";
                break;
            case Expr::Kind::StructLit:
                if (restricted) out_ << "(";
                out_ << e.name << " ";
                field_inits(e.fields);
                if (restricted) out_ << ")";
                break;
            case Expr::Kind::EnumLit:
                if (e.fields.empty()) {
                    out_ << e.name << "::" << e.variant;
                } else {
                    if (restricted) out_ << "(";
                    out_ << e.name << "::" << e.variant << " ";
                    field_inits(e.fields);
                    if (restricted) out_ << ")";
                }
                break;
        }
    }

private:
    std::ostringstream out_;
    int indent_ = 0;

    void sep(bool& first) {
        if (!first) out_ << "\n";
        first = false;
    }
    void line() {
        for (int i = 0; i < indent_; ++i) out_ << "    ";
    }

    template <typename F>
    void maybe_paren(int prec, int parent_prec, F&& body) {
        bool paren = prec < parent_prec;
        if (paren) out_ << "(";
        body();
        if (paren) out_ << ")";
    }

    void field_inits(const std::vector<FieldInit>& fields) {
        out_ << "{ ";
        for (size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ", ";
            out_ << fields[i].name << ": ";
            expr(*fields[i].value, 0, false);
        }
        out_ << " }";
    }

    void fields_block(const std::vector<FieldDef>& fields) {
        out_ << " {\n";
        ++indent_;
        for (const auto& f : fields) {
            line();
            out_ << f.name << ": ";
            type(*f.type);
            out_ << ",\n";
        }
        --indent_;
        line();
        out_ << "}\n";
    }

    void struct_def(const StructDef& s) {
        out_ << "struct " << s.name;
        fields_block(s.fields);
    }

    void enum_def(const EnumDef& e) {
        out_ << "enum " << e.name << " {\n";
        ++indent_;
        for (const auto& v : e.variants) {
            line();
            out_ << v.name;
            if (v.has_braces || !v.fields.empty()) {
                out_ << " { ";
                for (size_t i = 0; i < v.fields.size(); ++i) {
                    if (i) out_ << ", ";
                    out_ << v.fields[i].name << ": ";
                    type(*v.fields[i].type);
                }
                out_ << " }";
            }
            out_ << ",\n";
        }
        --indent_;
        line();
        out_ << "}\n";
    }

    void fn_def(const FnDef& f) {
        out_ << "fn " << f.name;
        if (!f.lifetime_params.empty()) {
            out_ << "<";
            for (size_t i = 0; i < f.lifetime_params.size(); ++i) {
                if (i) out_ << ", ";
                out_ << "'" << f.lifetime_params[i];
                bool first_bound = true;
                for (const auto& o : f.outlives) {
                    if (o.longer != f.lifetime_params[i]) continue;
                    out_ << (first_bound ? ": " : " + ") << "'" << o.shorter;
                    first_bound = false;
                }
            }
            out_ << ">";
        }
        out_ << "(";
        for (size_t i = 0; i < f.params.size(); ++i) {
            if (i) out_ << ", ";
            if (f.params[i].is_mut) out_ << "mut ";
            out_ << f.params[i].name << ": ";
            type(*f.params[i].type);
        }
        out_ << ")";
        if (f.return_type) {
            out_ << " -> ";
            type(*f.return_type);
        }
        out_ << " ";
        block(f.body);
        out_ << "\n";
    }

    void block(const Block& b) {
        out_ << "{\n";
        ++indent_;
        for (const auto& s : b.stmts) stmt(*s);
        --indent_;
        line();
        out_ << "}";
    }

    void stmt(const Stmt& s) {
        line();
        switch (s.kind) {
            case Stmt::Kind::Let:
                out_ << "let ";
                if (s.let_mut) out_ << "mut ";
                out_ << s.let_name;
                if (s.let_type) {
                    out_ << ": ";
                    type(*s.let_type);
                }
                if (s.init) {
                    out_ << " = ";
                    expr(*s.init, 0, false);
                }
                out_ << ";\n";
                break;
            case Stmt::Kind::Assign:
                expr(*s.lhs, 0, false);
                out_ << " = ";
                expr(*s.rhs, 0, false);
                out_ << ";\n";
                break;
            case Stmt::Kind::Expr:
                expr(*s.expr, 0, false);
                out_ << ";\n";
                break;
            case Stmt::Kind::Return:
                out_ << "return";
                if (s.expr) {
                    out_ << " ";
                    expr(*s.expr, 0, false);
                }
                out_ << ";\n";
                break;
            case Stmt::Kind::If:
                out_ << "if ";
                expr(*s.expr, 0, true);
                out_ << " ";
                block(s.body);
                if (s.has_else) {
                    out_ << " else ";
                    block(s.else_body);
                }
                out_ << "\n";
                break;
            case Stmt::Kind::While:
                out_ << "while ";
                expr(*s.expr, 0, true);
                out_ << " ";
                block(s.body);
                out_ << "\n";
                break;
            case Stmt::Kind::Match: {
                out_ << "match ";
                expr(*s.expr, 0, true);
                out_ << " {\n";
                ++indent_;
                for (const auto& arm : s.arms) {
                    line();
                    pattern(arm.pat);
                    out_ << " => ";
                    block(arm.body);
                    out_ << "\n";
                }
                --indent_;
                line();
                out_ << "}\n";
                break;
            }
            case Stmt::Kind::Block:
                block(s.body);
                out_ << "\n";
                break;
        }
    }

    void pattern(const Pattern& p) {
        out_ << p.enum_name << "::" << p.variant;
        if (p.has_fields) {
            out_ << " { ";
            for (size_t i = 0; i < p.fields.size(); ++i) {
                if (i) out_ << ", ";
                const PatField& pf = p.fields[i];
                out_ << pf.field << ": ";
                if (pf.wildcard) {
                    out_ << "_";
                } else {
                    if (pf.by_ref) out_ << (pf.ref_mut ? "ref mut " : "ref ");
                    out_ << pf.binding;
                }
            }
            out_ << " }";
        }
    }
};

}  // namespace

std::string print_module(const Module& m) { return Printer().module(m); }

std::string print_type(const Type& t) {
    Printer p;
    p.type(t);
    return p.take();
}

std::string print_expr(const Expr& e) {
    Printer p;
    p.expr(e, 0, false);
    return p.take();
}

}  // namespace rustlight::ast

#include "rustlight/parser.hpp"

#include <cassert>

#include "rustlight/lexer.hpp"

namespace rustlight {
namespace {

using namespace ast;

// Thrown to unwind to item level after a syntax error; the diagnostic
// has already been reported by then.
struct ParseBail {};

class Parser {
public:
    Parser(const std::string& src, DiagnosticBag& diags)
        : diags_(diags), toks_(lex(src, diags)) {}

    Module module() {
        Module m;
        while (!at(TokKind::Eof)) {
            try {
                switch (peek().kind) {
                    case TokKind::KwStruct: m.structs.push_back(struct_def()); break;
                    case TokKind::KwEnum: m.enums.push_back(enum_def()); break;
                    case TokKind::KwFn: m.fns.push_back(fn_def()); break;
                    default:
                        error(peek().span,
                              "expected `fn`, `struct`, or `enum`, found " +
                                  std::string(tok_kind_name(peek().kind)));
                }
            } catch (ParseBail&) {
                recover_to_item();
            }
        }
        return m;
    }

private:
    DiagnosticBag& diags_;
    std::vector<Token> toks_;
    size_t pos_ = 0;
    // When set, `{` after an expression head is not a struct/enum literal
    // (condition and scrutinee position, as in Rust).
    bool no_struct_ = false;

    const Token& peek(size_t k = 0) const {
        size_t i = pos_ + k;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    bool at(TokKind k) const { return peek().kind == k; }
    Token bump() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

    [[noreturn]] void error(Span span, std::string msg) {
        diags_.report(DiagCode::SyntaxError, span, std::move(msg));
        throw ParseBail{};
    }

    Token expect(TokKind k, const char* what) {
        if (!at(k)) {
            error(peek().span, std::string("expected ") + what + ", found " +
                                   tok_kind_name(peek().kind));
        }
        return bump();
    }

    bool eat(TokKind k) {
        if (at(k)) {
            bump();
            return true;
        }
        return false;
    }

    void recover_to_item() {
        while (!at(TokKind::Eof) && !at(TokKind::KwFn) && !at(TokKind::KwStruct) &&
               !at(TokKind::KwEnum)) {
            bump();
        }
    }

    // --- items -----------------------------------------------------------

    FieldDef field_def() {
        FieldDef f;
        Token name = expect(TokKind::Ident, "field name");
        f.name = std::string(name.text);
        f.span = name.span;
        expect(TokKind::Colon, "`:`");
        f.type = type();
        return f;
    }

    template <typename T>
    Token comma_list(TokKind close, const char* close_name, T&& elem) {
        while (!at(close)) {
            elem();
            if (!eat(TokKind::Comma)) break;
        }
        return expect(close, close_name);
    }

    StructDef struct_def() {
        StructDef s;
        s.span = expect(TokKind::KwStruct, "`struct`").span;
        s.name = std::string(expect(TokKind::Ident, "struct name").text);
        expect(TokKind::LBrace, "`{`");
        comma_list(TokKind::RBrace, "`}`", [&] { s.fields.push_back(field_def()); });
        return s;
    }

    EnumDef enum_def() {
        EnumDef e;
        e.span = expect(TokKind::KwEnum, "`enum`").span;
        e.name = std::string(expect(TokKind::Ident, "enum name").text);
        expect(TokKind::LBrace, "`{`");
        comma_list(TokKind::RBrace, "`}`", [&] {
            VariantDef v;
            Token name = expect(TokKind::Ident, "variant name");
            v.name = std::string(name.text);
            v.span = name.span;
            if (eat(TokKind::LBrace)) {
                v.has_braces = true;
                comma_list(TokKind::RBrace, "`}`",
                           [&] { v.fields.push_back(field_def()); });
            }
            e.variants.push_back(std::move(v));
        });
        return e;
    }

    FnDef fn_def() {
        FnDef f;
        f.span = expect(TokKind::KwFn, "`fn`").span;
        f.name = std::string(expect(TokKind::Ident, "function name").text);
        if (eat(TokKind::Lt)) {
            comma_list(TokKind::Gt, "`>`", [&] {
                Token lt = expect(TokKind::Lifetime, "lifetime parameter");
                f.lifetime_params.push_back(std::string(lt.text));
                if (eat(TokKind::Colon)) {
                    do {
                        Token bound = expect(TokKind::Lifetime, "lifetime bound");
                        f.outlives.push_back(OutlivesDecl{
                            std::string(lt.text), std::string(bound.text),
                            Span::join(lt.span, bound.span)});
                    } while (eat(TokKind::Plus));
                }
            });
        }
        expect(TokKind::LParen, "`(`");
        comma_list(TokKind::RParen, "`)`", [&] {
            Param p;
            p.is_mut = eat(TokKind::KwMut);
            Token name = expect(TokKind::Ident, "parameter name");
            p.name = std::string(name.text);
            p.span = name.span;
            expect(TokKind::Colon, "`:`");
            p.type = type();
            f.params.push_back(std::move(p));
        });
        if (eat(TokKind::Arrow)) f.return_type = type();
        f.body = block();
        return f;
    }

    // --- types -----------------------------------------------------------

    TypePtr type() {
        auto t = std::make_unique<Type>();
        Token tok = peek();
        t->span = tok.span;
        switch (tok.kind) {
            case TokKind::LParen:
                bump();
                expect(TokKind::RParen, "`)` (only the unit type `()` is supported)");
                t->kind = Type::Kind::Unit;
                break;
            case TokKind::KwBox:
                bump();
                expect(TokKind::Lt, "`<`");
                t->kind = Type::Kind::Box;
                t->elem = type();
                expect(TokKind::Gt, "`>`");
                break;
            case TokKind::Amp:
            case TokKind::AmpAmp: {
                // `&&T` is a reference to a reference.
                bool doubled = tok.kind == TokKind::AmpAmp;
                bump();
                t->kind = Type::Kind::Ref;
                if (!doubled && at(TokKind::Lifetime))
                    t->lifetime = std::string(bump().text);
                if (!doubled) t->ref_mut = eat(TokKind::KwMut);
                if (doubled) {
                    auto inner = std::make_unique<Type>();
                    inner->kind = Type::Kind::Ref;
                    inner->span = tok.span;
                    if (at(TokKind::Lifetime)) inner->lifetime = std::string(bump().text);
                    inner->ref_mut = eat(TokKind::KwMut);
                    inner->elem = type();
                    t->elem = std::move(inner);
                } else {
                    t->elem = type();
                }
                break;
            }
            case TokKind::Ident:
                bump();
                if (tok.text == "i32") {
                    t->kind = Type::Kind::I32;
                } else if (tok.text == "bool") {
                    t->kind = Type::Kind::Bool;
                } else {
                    t->kind = Type::Kind::Named;
                    t->name = std::string(tok.text);
                }
                break;
            default:
                error(tok.span, std::string("expected type, found ") +
                                    tok_kind_name(tok.kind));
        }
        return t;
    }

    // --- statements ------------------------------------------------------

    Block block() {
        Block b;
        b.span = expect(TokKind::LBrace, "`{`").span;
        while (!at(TokKind::RBrace)) {
            if (at(TokKind::Eof)) error(peek().span, "unclosed block, expected `}`");
            b.stmts.push_back(stmt());
        }
        b.span = Span::join(b.span, bump().span);
        return b;
    }

    StmtPtr stmt() {
        switch (peek().kind) {
            case TokKind::KwLet: return let_stmt();
            case TokKind::KwIf: return if_stmt();
            case TokKind::KwWhile: return while_stmt();
            case TokKind::KwMatch: return match_stmt();
            case TokKind::KwReturn: return return_stmt();
            case TokKind::LBrace: {
                auto s = std::make_unique<Stmt>();
                s->kind = Stmt::Kind::Block;
                s->body = block();
                s->span = s->body.span;
                return s;
            }
            default: return expr_or_assign_stmt();
        }
    }

    StmtPtr let_stmt() {
        auto s = std::make_unique<Stmt>();
        s->kind = Stmt::Kind::Let;
        s->span = expect(TokKind::KwLet, "`let`").span;
        s->let_mut = eat(TokKind::KwMut);
        s->let_name = std::string(expect(TokKind::Ident, "binding name").text);
        if (eat(TokKind::Colon)) s->let_type = type();
        if (eat(TokKind::Eq)) s->init = expr();
        Token semi = expect(TokKind::Semi, "`;`");
        s->span = Span::join(s->span, semi.span);
        return s;
    }

    StmtPtr if_stmt() {
        auto s = std::make_unique<Stmt>();
        s->kind = Stmt::Kind::If;
        s->span = expect(TokKind::KwIf, "`if`").span;
        s->expr = cond_expr();
        s->body = block();
        if (eat(TokKind::KwElse)) {
            s->has_else = true;
            if (at(TokKind::KwIf)) {
                // `else if` nests as an else-block holding a single `if`.
                Block eb;
                eb.span = peek().span;
                eb.stmts.push_back(if_stmt());
                eb.span = Span::join(eb.span, eb.stmts.back()->span);
                s->else_body = std::move(eb);
            } else {
                s->else_body = block();
            }
        }
        s->span = Span::join(s->span, s->has_else ? s->else_body.span : s->body.span);
        return s;
    }

    StmtPtr while_stmt() {
        auto s = std::make_unique<Stmt>();
        s->kind = Stmt::Kind::While;
        s->span = expect(TokKind::KwWhile, "`while`").span;
        s->expr = cond_expr();
        s->body = block();
        s->span = Span::join(s->span, s->body.span);
        return s;
    }

    StmtPtr match_stmt() {
        auto s = std::make_unique<Stmt>();
        s->kind = Stmt::Kind::Match;
        s->span = expect(TokKind::KwMatch, "`match`").span;
        s->expr = cond_expr();
        expect(TokKind::LBrace, "`{`");
        while (!at(TokKind::RBrace)) {
            MatchArm arm;
            arm.pat = pattern();
            expect(TokKind::FatArrow, "`=>`");
            arm.body = block();
            arm.span = Span::join(arm.pat.span, arm.body.span);
            eat(TokKind::Comma);
            s->arms.push_back(std::move(arm));
        }
        s->span = Span::join(s->span, bump().span);
        return s;
    }

    Pattern pattern() {
        Pattern p;
        Token en = expect(TokKind::Ident, "enum name in pattern");
        p.enum_name = std::string(en.text);
        p.span = en.span;
        expect(TokKind::ColonColon, "`::`");
        Token var = expect(TokKind::Ident, "variant name");
        p.variant = std::string(var.text);
        p.span = Span::join(p.span, var.span);
        if (eat(TokKind::LBrace)) {
            p.has_fields = true;
            comma_list(TokKind::RBrace, "`}`", [&] { p.fields.push_back(pat_field()); });
        }
        return p;
    }

    PatField pat_field() {
        PatField pf;
        pf.span = peek().span;
        bool lead_ref = eat(TokKind::KwRef);
        bool lead_mut = lead_ref && eat(TokKind::KwMut);
        Token name = expect(TokKind::Ident, "field name in pattern");
        pf.field = std::string(name.text);
        if (!lead_ref && eat(TokKind::Colon)) {
            if (eat(TokKind::Underscore)) {
                pf.wildcard = true;
            } else {
                pf.by_ref = eat(TokKind::KwRef);
                pf.ref_mut = pf.by_ref && eat(TokKind::KwMut);
                pf.binding = std::string(expect(TokKind::Ident, "binding name").text);
            }
        } else {
            // Shorthand `x` / `ref x` / `ref mut x` binds the field under
            // its own name.
            pf.by_ref = lead_ref;
            pf.ref_mut = lead_mut;
            pf.binding = pf.field;
        }
        pf.span = Span::join(pf.span, name.span);
        return pf;
    }

    StmtPtr return_stmt() {
        auto s = std::make_unique<Stmt>();
        s->kind = Stmt::Kind::Return;
        s->span = expect(TokKind::KwReturn, "`return`").span;
        if (!at(TokKind::Semi)) s->expr = expr();
        Token semi = expect(TokKind::Semi, "`;`");
        s->span = Span::join(s->span, semi.span);
        return s;
    }

    StmtPtr expr_or_assign_stmt() {
        auto s = std::make_unique<Stmt>();
        ExprPtr head = expr();
        s->span = head->span;
        if (eat(TokKind::Eq)) {
            s->kind = Stmt::Kind::Assign;
            s->lhs = std::move(head);
            s->rhs = expr();
        } else if (at(TokKind::RBrace)) {
            // Tail expression: a block-final expression without `;` is sugar
            // for `return`, matching Rust's value-producing blocks.
            s->kind = Stmt::Kind::Return;
            s->expr = std::move(head);
            return s;
        } else {
            s->kind = Stmt::Kind::Expr;
            s->expr = std::move(head);
        }
        Token semi = expect(TokKind::Semi, "`;`");
        s->span = Span::join(s->span, semi.span);
        return s;
    }

    // --- expressions -----------------------------------------------------

    ExprPtr cond_expr() {
        bool saved = no_struct_;
        no_struct_ = true;
        ExprPtr e = expr();
        no_struct_ = saved;
        return e;
    }

    ExprPtr expr() { return comparison(); }

    ExprPtr comparison() {
        ExprPtr lhs = additive();
        BinOp op;
        switch (peek().kind) {
            case TokKind::EqEq: op = BinOp::Eq; break;
            case TokKind::Ne: op = BinOp::Ne; break;
            case TokKind::Lt: op = BinOp::Lt; break;
            case TokKind::Le: op = BinOp::Le; break;
            case TokKind::Gt: op = BinOp::Gt; break;
            case TokKind::Ge: op = BinOp::Ge; break;
            default: return lhs;
        }
        bump();
        ExprPtr rhs = additive();
        switch (peek().kind) {
            case TokKind::EqEq:
            case TokKind::Ne:
            case TokKind::Lt:
            case TokKind::Le:
            case TokKind::Gt:
            case TokKind::Ge:
                error(peek().span, "comparison operators cannot be chained");
            default: break;
        }
        auto e = std::make_unique<Expr>();
        e->kind = Expr::Kind::Binary;
        e->bin_op = op;
        e->span = Span::join(lhs->span, rhs->span);
        e->lhs = std::move(lhs);
        e->rhs = std::move(rhs);
        return e;
    }

    ExprPtr additive() {
        ExprPtr lhs = multiplicative();
        while (at(TokKind::Plus) || at(TokKind::Minus)) {
            BinOp op = at(TokKind::Plus) ? BinOp::Add : BinOp::Sub;
            bump();
            ExprPtr rhs = multiplicative();
            auto e = std::make_unique<Expr>();
            e->kind = Expr::Kind::Binary;
            e->bin_op = op;
            e->span = Span::join(lhs->span, rhs->span);
            e->lhs = std::move(lhs);
            e->rhs = std::move(rhs);
            lhs = std::move(e);
        }
        return lhs;
    }

    ExprPtr multiplicative() {
        ExprPtr lhs = unary();
        while (at(TokKind::Star) || at(TokKind::Slash) || at(TokKind::Percent)) {
            BinOp op = at(TokKind::Star)    ? BinOp::Mul
                       : at(TokKind::Slash) ? BinOp::Div
                                            : BinOp::Rem;
            bump();
            ExprPtr rhs = unary();
            auto e = std::make_unique<Expr>();
            e->kind = Expr::Kind::Binary;
            e->bin_op = op;
            e->span = Span::join(lhs->span, rhs->span);
            e->lhs = std::move(lhs);
            e->rhs = std::move(rhs);
            lhs = std::move(e);
        }
        return lhs;
    }

    ExprPtr unary() {
        Token tok = peek();
        switch (tok.kind) {
            case TokKind::Minus:
            case TokKind::Bang:
            case TokKind::Star: {
                bump();
                auto e = std::make_unique<Expr>();
                e->kind = Expr::Kind::Unary;
                e->un_op = tok.kind == TokKind::Minus ? UnOp::Neg
                           : tok.kind == TokKind::Bang ? UnOp::Not
                                                       : UnOp::Deref;
                e->lhs = unary();
                e->span = Span::join(tok.span, e->lhs->span);
                return e;
            }
            case TokKind::Amp:
            case TokKind::AmpAmp: {
                bump();
                auto mk = [&](ExprPtr inner, bool is_mut) {
                    auto e = std::make_unique<Expr>();
                    e->kind = Expr::Kind::Borrow;
                    e->borrow_mut = is_mut;
                    e->span = Span::join(tok.span, inner->span);
                    e->lhs = std::move(inner);
                    return e;
                };
                if (tok.kind == TokKind::AmpAmp) {
                    bool inner_mut = eat(TokKind::KwMut);
                    return mk(mk(unary(), inner_mut), false);
                }
                bool is_mut = eat(TokKind::KwMut);
                return mk(unary(), is_mut);
            }
            default: return postfix();
        }
    }

    ExprPtr postfix() {
        ExprPtr e = primary();
        while (at(TokKind::Dot)) {
            bump();
            Token name = peek();
            if (!at(TokKind::Ident) && !at(TokKind::IntLit))
                error(name.span, "expected field name after `.`");
            bump();
            auto f = std::make_unique<Expr>();
            f->kind = Expr::Kind::Field;
            f->name = std::string(name.text);
            f->span = Span::join(e->span, name.span);
            f->lhs = std::move(e);
            e = std::move(f);
        }
        return e;
    }

    std::vector<FieldInit> field_inits() {
        std::vector<FieldInit> fields;
        bool saved = no_struct_;
        no_struct_ = false;
        comma_list(TokKind::RBrace, "`}`", [&] {
            FieldInit fi;
            Token name = expect(TokKind::Ident, "field name");
            fi.name = std::string(name.text);
            fi.span = name.span;
            expect(TokKind::Colon, "`:`");
            fi.value = expr();
            fields.push_back(std::move(fi));
        });
        no_struct_ = saved;
        return fields;
    }

    ExprPtr primary() {
        Token tok = peek();
        auto e = std::make_unique<Expr>();
        e->span = tok.span;
        switch (tok.kind) {
            case TokKind::IntLit:
                bump();
                e->kind = Expr::Kind::IntLit;
                e->int_value = tok.int_value;
                return e;
            case TokKind::KwTrue:
            case TokKind::KwFalse:
                bump();
                e->kind = Expr::Kind::BoolLit;
                e->bool_value = tok.kind == TokKind::KwTrue;
                return e;
            case TokKind::LParen: {
                bump();
                if (at(TokKind::RParen)) {
                    e->kind = Expr::Kind::Unit;
                    e->span = Span::join(tok.span, bump().span);
                    return e;
                }
                bool saved = no_struct_;
                no_struct_ = false;
                ExprPtr inner = expr();
                no_struct_ = saved;
                expect(TokKind::RParen, "`)`");
                return inner;
            }
            case TokKind::KwBox: {
                bump();
                expect(TokKind::ColonColon, "`::` (write `Box::new(..)`)");
                Token m = expect(TokKind::Ident, "`new`");
                if (m.text != "new")
                    error(m.span, "only `Box::new` is supported on `Box`");
                expect(TokKind::LParen, "`(`");
                bool saved = no_struct_;
                no_struct_ = false;
                ExprPtr arg = expr();
                no_struct_ = saved;
                Token close = expect(TokKind::RParen, "`)`");
                e->kind = Expr::Kind::BoxNew;
                e->span = Span::join(tok.span, close.span);
                e->args.push_back(std::move(arg));
                return e;
            }
            case TokKind::Ident: {
                bump();
                e->name = std::string(tok.text);
                if (at(TokKind::ColonColon)) {
                    bump();
                    Token var = expect(TokKind::Ident, "variant name");
                    e->kind = Expr::Kind::EnumLit;
                    e->variant = std::string(var.text);
                    e->span = Span::join(tok.span, var.span);
                    if (!no_struct_ && at(TokKind::LBrace)) {
                        bump();
                        e->fields = field_inits();
                    }
                    return e;
                }
                if (at(TokKind::LParen)) {
                    bump();
                    e->kind = Expr::Kind::Call;
                    bool saved = no_struct_;
                    no_struct_ = false;
                    Token close = comma_list(TokKind::RParen, "`)`",
                                             [&] { e->args.push_back(expr()); });
                    no_struct_ = saved;
                    e->span = Span::join(tok.span, close.span);
                    return e;
                }
                if (!no_struct_ && at(TokKind::LBrace)) {
                    bump();
                    e->kind = Expr::Kind::StructLit;
                    e->fields = field_inits();
                    return e;
                }
                e->kind = Expr::Kind::Var;
                return e;
            }
            default:
                error(tok.span, std::string("expected expression, found ") +
                                    tok_kind_name(tok.kind));
        }
    }
};

}  // namespace

ast::Module parse_module(const std::string& src, DiagnosticBag& diags) {
    return Parser(src, diags).module();
}

}  // namespace rustlight

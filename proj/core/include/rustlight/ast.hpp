#pragma once

#include <memory>
#include <string>
#include <vector>

#include "rustlight/span.hpp"

// Surface syntax tree. Nodes are tagged structs rather than class
// hierarchies: every pass that consumes the AST switches on the kind
// anyway, and keeping the node POD-ish makes the pretty-printer and
// the lowering pass straightforward.
namespace rustlight::ast {

struct Type;
using TypePtr = std::unique_ptr<Type>;

struct Type {
    enum class Kind { Unit, Bool, I32, Box, Ref, Named };
    Kind kind = Kind::Unit;
    Span span;
    TypePtr elem;           // Box element / Ref referent
    bool ref_mut = false;   // Ref
    std::string lifetime;   // Ref: annotation name, empty when elided
    std::string name;       // Named
};

enum class BinOp { Add, Sub, Mul, Div, Rem, Eq, Ne, Lt, Le, Gt, Ge };
enum class UnOp { Neg, Not, Deref };

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct FieldInit {
    std::string name;
    ExprPtr value;
    Span span;
};

struct Expr {
    enum class Kind {
        Unit,       // ()
        IntLit,
        BoolLit,
        Var,
        Field,      // lhs . name
        Unary,      // un_op lhs
        Binary,     // lhs bin_op rhs
        Borrow,     // & [mut] lhs
        BoxNew,     // Box::new(args[0])
        Call,       // name ( args )
        StructLit,  // name { fields }
        EnumLit,    // name :: variant [{ fields }]
    };
    Kind kind = Kind::Unit;
    Span span;

    int32_t int_value = 0;
    bool bool_value = false;
    std::string name;
    std::string variant;
    BinOp bin_op = BinOp::Add;
    UnOp un_op = UnOp::Neg;
    bool borrow_mut = false;
    ExprPtr lhs;
    ExprPtr rhs;
    std::vector<ExprPtr> args;
    std::vector<FieldInit> fields;
};

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

struct Block {
    std::vector<StmtPtr> stmts;
    Span span;
};

// `Enum::Variant`, optionally `{ field: binding, field: _, ... }`.
// A binding moves the field out unless marked `ref` / `ref mut`.
struct PatField {
    std::string field;
    std::string binding;  // empty iff wildcard
    bool wildcard = false;
    bool by_ref = false;
    bool ref_mut = false;
    Span span;
};

struct Pattern {
    std::string enum_name;
    std::string variant;
    bool has_fields = false;
    std::vector<PatField> fields;
    Span span;
};

struct MatchArm {
    Pattern pat;
    Block body;
    Span span;
};

struct Stmt {
    enum class Kind { Let, Assign, Expr, If, While, Match, Return, Block };
    Kind kind = Kind::Expr;
    Span span;

    // Let
    std::string let_name;
    bool let_mut = false;
    TypePtr let_type;  // may be null (inferred)
    ExprPtr init;      // may be null (deferred initialization)
    // Assign (lhs = rhs) — lhs must be a place, checked semantically
    ExprPtr lhs;
    ExprPtr rhs;
    // Expr statement / If,While condition / Match scrutinee / Return value
    ExprPtr expr;      // Return: null for bare `return;`
    // If then-block / While body / Block
    Block body;
    bool has_else = false;
    Block else_body;
    std::vector<MatchArm> arms;
};

struct FieldDef {
    std::string name;
    TypePtr type;
    Span span;
};

struct StructDef {
    std::string name;
    std::vector<FieldDef> fields;
    Span span;
};

struct VariantDef {
    std::string name;
    std::vector<FieldDef> fields;  // empty for unit-like variants
    bool has_braces = false;
    Span span;
};

struct EnumDef {
    std::string name;
    std::vector<VariantDef> variants;
    Span span;
};

struct Param {
    std::string name;
    bool is_mut = false;
    TypePtr type;
    Span span;
};

struct OutlivesDecl {
    std::string longer;   // 'a in `'a: 'b`
    std::string shorter;  // 'b
    Span span;
};

struct FnDef {
    std::string name;
    std::vector<std::string> lifetime_params;
    std::vector<OutlivesDecl> outlives;
    std::vector<Param> params;
    TypePtr return_type;  // null => unit
    Block body;
    Span span;
};

struct Module {
    std::vector<StructDef> structs;
    std::vector<EnumDef> enums;
    std::vector<FnDef> fns;
};

// Pretty-printer; emits canonical formatting that re-parses to an
// identical tree (round-trip property exercised by the test suite).
std::string print_module(const Module& m);
std::string print_type(const Type& t);
std::string print_expr(const Expr& e);

}  // namespace rustlight::ast

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <string>
#include <vector>

#include "rustlight/parser.hpp"
#include "rustlight/typecheck.hpp"

using namespace rustlight;

namespace {

struct Checked {
    ast::Module module;  // must outlive `prog` (side tables key on AST nodes)
    sem::Program prog;
    std::vector<Diagnostic> diags;

    bool has(DiagCode c) const {
        return std::any_of(diags.begin(), diags.end(),
                           [&](const Diagnostic& d) { return d.code == c; });
    }
};

Checked check(const std::string& src) {
    Checked out;
    DiagnosticBag diags;
    out.module = parse_module(src, diags);
    REQUIRE(diags.empty());  // these tests target the checker, not the parser
    out.prog = typecheck(out.module, diags);
    out.diags = diags.all();
    return out;
}

void check_ok(const std::string& src) {
    Checked c = check(src);
    for (auto& d : c.diags) MESSAGE(d.message);
    CHECK(c.diags.empty());
}

void check_err(const std::string& src, DiagCode code) {
    Checked c = check(src);
    CHECK(c.has(code));
}

}  // namespace

TEST_CASE("literal type mismatch") {
    check_err("fn main() { let x: i32 = true; }", DiagCode::TypeMismatch);
    check_err("fn main() { let b: bool = 0; }", DiagCode::TypeMismatch);
}

TEST_CASE("box deref produces the element type") {
    check_ok("fn main() { let b = Box::new(0); let y: i32 = *b; }");
    check_ok("fn main() { let b = Box::new(Box::new(1)); let y: i32 = **b; }");
}

TEST_CASE("non-exhaustive match on enum") {
    check_err(
        "enum E { A, B }\n"
        "fn main() { let e = E::A; match e { E::A => {} } }",
        DiagCode::NonExhaustiveMatch);
    check_ok(
        "enum E { A, B }\n"
        "fn main() { let e = E::A; match e { E::A => {} E::B => {} } }");
}

TEST_CASE("unknown names") {
    check_err("fn main() { let x = missing; }", DiagCode::UnknownName);
    check_err("fn main() { missing(); }", DiagCode::UnknownName);
    check_err("fn main() { let p = NoSuch { x: 1 }; }", DiagCode::UnknownName);
}

TEST_CASE("call arity and argument types") {
    check_err("fn g(a: i32) {} fn main() { g(); }", DiagCode::ArityMismatch);
    check_err("fn g(a: i32) {} fn main() { g(1, 2); }", DiagCode::ArityMismatch);
    check_err("fn g(a: i32) {} fn main() { g(true); }", DiagCode::TypeMismatch);
}

TEST_CASE("duplicate definitions") {
    check_err("fn f() {} fn f() {} fn main() {}", DiagCode::DuplicateDefinition);
    check_err("struct S { a: i32 } struct S { b: i32 } fn main() {}",
              DiagCode::DuplicateDefinition);
    check_err("fn main(x: i32, x: i32) {}", DiagCode::DuplicateDefinition);
}

TEST_CASE("recursive types need a Box") {
    check_err("struct S { next: S } fn main() {}", DiagCode::RecursiveType);
    check_ok(
        "enum List { Nil, Cons { v: i32, next: Box<List> } }\n"
        "fn main() {}");
}

TEST_CASE("assignment mutability") {
    check_err("fn main() { let x = 1; let r = &mut x; }",
              DiagCode::MutBorrowOfImmutable);
    check_err("fn f(r: &i32) { *r = 1; } fn main() {}",
              DiagCode::AssignToImmutable);
    check_ok("fn f(r: &mut i32) { *r = 1; } fn main() {}");
    // Mutability flows through box derefs from the binding.
    check_ok("fn main() { let mut b = Box::new(1); *b = 2; }");
    check_err("fn main() { let b = Box::new(1); *b = 2; }",
              DiagCode::AssignToImmutable);
}

TEST_CASE("invalid place expressions") {
    check_err("fn main() { (1 + 2) = 3; }", DiagCode::InvalidPlaceExpr);
    check_err("fn main() { let r = &5; }", DiagCode::InvalidPlaceExpr);
    check_err("fn main() { *4; }", DiagCode::InvalidPlaceExpr);
}

TEST_CASE("missing lifetime on returned reference") {
    check_err("fn f(a: &i32, b: &i32) -> &i32 { a } fn main() {}",
              DiagCode::MissingLifetime);
    // Single-reference elision works.
    check_ok("fn f(a: &i32) -> &i32 { a } fn main() {}");
    check_ok("fn f<'a>(a: &'a i32, b: &'a i32) -> &'a i32 { a } fn main() {}");
}

TEST_CASE("unknown lifetime names are rejected") {
    check_err("fn f(a: &'q i32) {} fn main() {}", DiagCode::UnknownLifetime);
    check_err("fn f<'a: 'zz>(a: &'a i32) {} fn main() {}",
              DiagCode::UnknownLifetime);
}

TEST_CASE("copy vs move classification feeds needs_drop") {
    Checked c = check(
        "struct Plain { a: i32, b: bool }\n"
        "struct Owns { a: i32, b: Box<i32> }\n"
        "fn main() {}");
    REQUIRE(c.diags.empty());
    CHECK(c.prog.is_copy(sem::type_i32()));
    CHECK(c.prog.is_copy(sem::type_bool()));
    CHECK(c.prog.is_copy(sem::type_unit()));
    CHECK(c.prog.is_copy(sem::type_ref(sem::kNoRegion, false, sem::type_i32())));
    CHECK(!c.prog.is_copy(sem::type_ref(sem::kNoRegion, true, sem::type_i32())));
    CHECK(!c.prog.is_copy(sem::type_box(sem::type_i32())));
    auto plain = c.prog.adt_by_name.at("Plain");
    auto owns = c.prog.adt_by_name.at("Owns");
    CHECK(!c.prog.needs_drop(sem::type_adt(plain)));
    CHECK(c.prog.needs_drop(sem::type_adt(owns)));
    // Structs never implement Copy here, even all-scalar ones: field moves.
    CHECK(!c.prog.is_copy(sem::type_adt(plain)));
}

TEST_CASE("match binding duplication and field coverage") {
    check_err(
        "enum E { A { x: i32, y: i32 } }\n"
        "fn f(e: E) { match e { E::A { x: v, y: v } => {} } } fn main() {}",
        DiagCode::DuplicateMatchBinding);
    check_err(
        "enum E { A { x: i32, y: i32 } }\n"
        "fn f(e: E) { match e { E::A { x } => {} } } fn main() {}",
        DiagCode::ArityMismatch);
}

TEST_CASE("partial by-move arms are rejected") {
    // Moving one owning field while wildcarding another would strand the
    // second with no drop obligation.
    check_err(
        "enum H { Two { x: Box<i32>, y: Box<i32> } }\n"
        "fn f(h: H) { match h { H::Two { x, y: _ } => {} } } fn main() {}",
        DiagCode::UnsupportedPartialBoxMove);
    check_err(
        "enum H { Two { x: Box<i32>, y: Box<i32> } }\n"
        "fn f(h: H) { match h { H::Two { x, y: ref r } => {} } } fn main() {}",
        DiagCode::UnsupportedPartialBoxMove);
    // Moving every owning field is fine; scalar fields may stay behind.
    check_ok(
        "enum H { Two { x: Box<i32>, n: i32 } }\n"
        "fn f(h: H) -> i32 { let mut o = 0; match h { H::Two { x, n: _ } => { o = *x; } } o }\n"
        "fn main() {}");
    // All-by-ref arms move nothing and are unrestricted.
    check_ok(
        "enum H { Two { x: Box<i32>, y: Box<i32> } }\n"
        "fn f(h: &H) -> i32 { let mut o = 0; match *h { H::Two { x: ref a, y: _ } => { o = **a; } } o }\n"
        "fn main() {}");
}

TEST_CASE("ref mut pattern requires a mutable matched place") {
    check_err(
        "enum E { A { x: i32 } }\n"
        "fn main() { let e = E::A { x: 1 }; match e { E::A { x: ref mut r } => {} } }",
        DiagCode::MutBorrowOfImmutable);
    check_ok(
        "enum E { A { x: i32 } }\n"
        "fn main() { let mut e = E::A { x: 1 }; match e { E::A { x: ref mut r } => { *r = 2; } } }");
}

TEST_CASE("condition types must be bool") {
    check_err("fn main() { if 1 {} }", DiagCode::TypeMismatch);
    check_err("fn main() { while 0 {} }", DiagCode::TypeMismatch);
}

TEST_CASE("arithmetic and comparison operand types") {
    check_err("fn main() { let x = 1 + true; }", DiagCode::TypeMismatch);
    check_err("fn main() { let x = true < false; }", DiagCode::TypeMismatch);
    check_ok("fn main() { let x = (1 == 2) == false; }");
}

TEST_CASE("struct literal field coverage and types") {
    check_err("struct P { x: i32, y: i32 } fn main() { let p = P { x: 1 }; }",
              DiagCode::ArityMismatch);
    check_err(
        "struct P { x: i32 } fn main() { let p = P { x: 1, q: 2 }; }",
        DiagCode::UnknownName);
    check_err(
        "struct P { x: i32 } fn main() { let p = P { x: true }; }",
        DiagCode::TypeMismatch);
}

TEST_CASE("enum literal requires the declared payload shape") {
    check_err(
        "enum E { A { x: i32 }, B }\n"
        "fn main() { let e = E::A; }",
        DiagCode::ArityMismatch);
    check_err(
        "enum E { A { x: i32 }, B }\n"
        "fn main() { let e = E::B { x: 1 }; }",
        DiagCode::UnknownName);  // `B` has no such field
}

TEST_CASE("signatures register universal regions") {
    Checked c = check(
        "fn pick<'a, 'b: 'a>(x: &'a i32, y: &'b i32) -> &'a i32 { x }\n"
        "fn main() {}");
    REQUIRE(c.diags.empty());
    const sem::FnSig& sig = c.prog.fns[c.prog.fn_by_name.at("pick")].sig;
    CHECK(sig.num_universals() == 2);
    REQUIRE(sig.outlives.size() == 1);
    CHECK(sig.universal_names[sig.outlives[0].longer] == "b");
    CHECK(sig.universal_names[sig.outlives[0].shorter] == "a");
}

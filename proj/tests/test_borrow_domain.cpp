#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>

#include "rustlight/borrow_domain.hpp"
#include "rustlight/lowering.hpp"
#include "rustlight/parser.hpp"
#include "rustlight/region_uf.hpp"
#include "rustlight/typecheck.hpp"

using namespace rustlight;
using namespace rustlight::flow;

namespace {

struct Built {
    ast::Module module;
    sem::Program prog;
    ir::Program irp;
};

Built build(const std::string& src) {
    Built out;
    DiagnosticBag diags;
    out.module = parse_module(src, diags);
    REQUIRE(diags.empty());
    out.prog = typecheck(out.module, diags);
    for (auto& d : diags.all()) MESSAGE(d.message);
    REQUIRE(diags.empty());
    out.irp = lower_module(out.module, out.prog, diags);
    REQUIRE(diags.empty());
    return out;
}

const ir::Function& fn_named(const Built& b, const std::string& name) {
    for (const auto& f : b.irp.fns)
        if (f.name == name) return f;
    REQUIRE(false);
    return b.irp.fns[0];
}

}  // namespace

TEST_CASE("union-find: representative is the minimum id and paths compress") {
    RegionUF uf(6);
    for (uint32_t i = 0; i < 6; ++i) CHECK(uf.find(i) == i);
    uf.unite(4, 2);
    CHECK(uf.find(4) == 2);
    uf.unite(5, 4);  // joins {2,4} via 4
    CHECK(uf.find(5) == 2);
    CHECK(uf.same(2, 5));
    CHECK(!uf.same(0, 2));
    uf.unite(0, 5);
    CHECK(uf.find(2) == 0);
    CHECK(uf.find(4) == 0);
    // Equality is structural on the induced partition.
    RegionUF other(6);
    other.unite(0, 2);
    other.unite(2, 4);
    other.unite(4, 5);
    CHECK(uf.equal(other));
    other.unite(1, 3);
    CHECK(!uf.equal(other));
    CHECK(uf.refines(uf));
    CHECK(uf.refines(other));      // other is coarser
    CHECK(!other.refines(uf));
}

TEST_CASE("loan table: placeholders first, then body loans in node order") {
    Built b = build(
        "fn f<'a, 'b>(x: &'a i32, y: &'b i32) -> &'a i32 {\n"
        "    let p = &*x;\n"
        "    let q = &*y;\n"
        "    p\n"
        "}\n"
        "fn main() {}");
    const ir::Function& f = fn_named(b, "f");
    LoanTable t = build_loan_table(b.prog, f);
    CHECK(t.num_universals == 2);
    REQUIRE(t.loans.size() >= 4);  // 2 placeholders + 2 borrows
    CHECK(t.loans[0].placeholder);
    CHECK(t.loans[0].universal == 0);
    CHECK(t.loans[1].placeholder);
    CHECK(t.loans[1].universal == 1);
    for (size_t i = 2; i < t.loans.size(); ++i) {
        CHECK(!t.loans[i].placeholder);
        if (i > 2) CHECK(t.loans[i - 1].origin <= t.loans[i].origin);
    }
}

TEST_CASE("outlives closure is reflexive and transitive") {
    Built b = build(
        "fn f<'a: 'b, 'b: 'c, 'c>(x: &'a i32, y: &'b i32, z: &'c i32) {}\n"
        "fn main() {}");
    LoanTable t = build_loan_table(b.prog, fn_named(b, "f"));
    REQUIRE(t.num_universals == 3);
    for (uint32_t u = 0; u < 3; ++u) CHECK(t.outlives_ok(u, u));
    CHECK(t.outlives_ok(0, 1));  // declared 'a: 'b
    CHECK(t.outlives_ok(1, 2));  // declared 'b: 'c
    CHECK(t.outlives_ok(0, 2));  // transitive
    CHECK(!t.outlives_ok(2, 0));
    CHECK(!t.outlives_ok(1, 0));
}

TEST_CASE("frame-local flags: locals yes, through-reference places no") {
    Built b = build(
        "struct S { v: i32 }\n"
        "fn f(r: &mut S) -> i32 {\n"
        "    let mut x = 1;\n"
        "    let a = &mut x;\n"          // frame-local
        "    let c = &mut (*r).v;\n"     // reaches through a caller reference
        "    *a + *c\n"
        "}\n"
        "fn main() {}");
    LoanTable t = build_loan_table(b.prog, fn_named(b, "f"));
    int frame_local = 0, external = 0;
    for (const auto& l : t.loans) {
        if (l.placeholder) continue;
        if (l.frame_local)
            ++frame_local;
        else
            ++external;
    }
    CHECK(frame_local == 1);
    CHECK(external == 1);
}

TEST_CASE("box derefs stay frame-local (the heap cell dies with its owner)") {
    Built b = build(
        "fn f() -> i32 {\n"
        "    let mut bx = Box::new(3);\n"
        "    let r = &mut *bx;\n"
        "    *r\n"
        "}\n"
        "fn main() {}");
    LoanTable t = build_loan_table(b.prog, fn_named(b, "f"));
    bool saw = false;
    for (const auto& l : t.loans) {
        if (l.placeholder) continue;
        saw = true;
        CHECK(l.frame_local);
    }
    CHECK(saw);
}

TEST_CASE("state ops: merge unions loan sets at the surviving root") {
    BorrowState st(4, 3);
    st.add_loan(1, 0);
    st.add_loan(3, 2);
    CHECK(st.loans_of(1).test(0));
    CHECK(!st.loans_of(1).test(2));
    st.merge(1, 3);
    CHECK(st.loans_of(1).test(0));
    CHECK(st.loans_of(1).test(2));
    CHECK(st.loans_of(3).test(0));  // same class now
    CHECK(st.uf.same(1, 3));
    CHECK(!st.uf.same(0, 1));
}

TEST_CASE("state ops: flow copies loans without merging classes") {
    BorrowState st(4, 3);
    st.add_loan(0, 1);
    st.flow_loans(0, 2);
    CHECK(st.loans_of(2).test(1));
    CHECK(!st.uf.same(0, 2));
    // One-directional: adding to 2 later does not appear at 0.
    st.add_loan(2, 0);
    CHECK(!st.loans_of(0).test(0));
}

TEST_CASE("class_fully_dead requires every member dead") {
    BorrowState st(3, 1);
    st.merge(0, 2);
    st.dead.set(0);
    CHECK(!st.class_fully_dead(0));
    st.dead.set(2);
    CHECK(st.class_fully_dead(0));
    CHECK(st.class_fully_dead(2));
    CHECK(!st.class_fully_dead(1));
}

TEST_CASE("printers are deterministic and name loans stably") {
    Built b = build(
        "fn f() -> i32 { let mut x = 1; let r = &mut x; *r }\n"
        "fn main() {}");
    const ir::Function& f = fn_named(b, "f");
    LoanTable t = build_loan_table(b.prog, f);
    REQUIRE(!t.loans.empty());
    std::string p1, p2;
    for (uint32_t i = 0; i < t.loans.size(); ++i) {
        p1 += print_loan(t.loans[i], i) + "\n";
        p2 += print_loan(t.loans[i], i) + "\n";
    }
    CHECK(p1 == p2);
    BorrowState st(f.num_regions, static_cast<uint32_t>(t.loans.size()));
    CHECK(print_borrow_state(st, t) == print_borrow_state(st, t));
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>
#include <vector>

#include "rustlight/ir.hpp"
#include "rustlight/lowering.hpp"
#include "rustlight/parser.hpp"
#include "rustlight/typecheck.hpp"

using namespace rustlight;

namespace {

struct Lowered {
    ast::Module module;
    sem::Program prog;
    ir::Program irp;
};

Lowered lower_ok(const std::string& src) {
    Lowered out;
    DiagnosticBag diags;
    out.module = parse_module(src, diags);
    REQUIRE(diags.empty());
    out.prog = typecheck(out.module, diags);
    for (auto& d : diags.all()) MESSAGE(d.message);
    REQUIRE(diags.empty());
    out.irp = lower_module(out.module, out.prog, diags);
    REQUIRE(diags.empty());
    for (const auto& fn : out.irp.fns) {
        auto problems = ir::validate(fn, out.prog);
        for (auto& p : problems) MESSAGE(fn.name, ": ", p);
        CHECK(problems.empty());
    }
    return out;
}

const ir::Function& fn_named(const Lowered& l, const std::string& name) {
    for (const auto& f : l.irp.fns)
        if (f.name == name) return f;
    REQUIRE(false);
    return l.irp.fns[0];
}

}  // namespace

TEST_CASE("empty function lowers to a lone return node") {
    Lowered l = lower_ok("fn main() {}");
    std::string p = ir::print_function(fn_named(l, "main"), l.prog);
    CHECK(p ==
          "fn main {\n"
          "  regions: 0 universal, 0 existential\n"
          "  _0: () [return]\n"
          "  bb0: return\n"
          "}\n");
}

TEST_CASE("if lowers to a diamond meeting at a join node") {
    Lowered l = lower_ok(
        "fn f(c: bool) -> i32 { if c { return 1; } return 2; } fn main() {}");
    std::string p = ir::print_function(fn_named(l, "f"), l.prog);
    CHECK(p ==
          "fn f {\n"
          "  regions: 0 universal, 0 existential\n"
          "  _0: i32 [return]\n"
          "  _1: bool [param c]\n"
          "  bb0: if copy _1 -> bb1, bb2\n"
          "  bb1: _0 = const 1 -> bb3\n"
          "  bb2: _0 = const 2 -> bb3\n"
          "  bb3: return\n"
          "}\n");
}

TEST_CASE("while lowers to a back edge into the condition") {
    Lowered l = lower_ok(
        "fn f() -> i32 { let mut i = 0; while i < 3 { i = i + 1; } i }\n"
        "fn main() {}");
    const ir::Function& f = fn_named(l, "f");
    // The loop body's Goto returns to the condition evaluation node.
    bool has_back_edge = false;
    std::vector<ir::NodeId> succ;
    for (ir::NodeId n = 0; n < f.nodes.size(); ++n) {
        f.nodes[n].term.successors(succ);
        for (ir::NodeId s : succ)
            if (s <= n) has_back_edge = true;
    }
    CHECK(has_back_edge);
}

TEST_CASE("match lowers to switch plus downcast projections") {
    Lowered l = lower_ok(
        "enum E { A { x: i32 }, B }\n"
        "fn f(e: E) -> i32 { let mut o = 0; match e { E::A { x } => { o = x; } "
        "E::B => {} } o }\n"
        "fn main() {}");
    std::string p = ir::print_function(fn_named(l, "f"), l.prog);
    CHECK(p.find("switch _1 [A -> bb2, B -> bb5]") != std::string::npos);
    CHECK(p.find("(_1 as A).0") != std::string::npos);
}

TEST_CASE("one instruction per node, instruction nodes end in Goto") {
    Lowered l = lower_ok(
        "struct S { a: i32, b: i32 }\n"
        "fn f(s: S) -> i32 { let t = S { a: s.b, b: s.a }; t.a + t.b }\n"
        "fn main() {}");
    const ir::Function& f = fn_named(l, "f");
    for (const auto& node : f.nodes) {
        if (node.instr)
            CHECK(node.term.kind == ir::Terminator::Kind::Goto);
    }
}

TEST_CASE("unique return node is last reachable exit") {
    Lowered l = lower_ok(
        "fn f(c: bool) -> i32 { if c { return 1; } let x = 2; x }\n"
        "fn main() {}");
    const ir::Function& f = fn_named(l, "f");
    int returns = 0;
    for (const auto& node : f.nodes)
        if (node.term.kind == ir::Terminator::Kind::Return) ++returns;
    CHECK(returns == 1);
    CHECK(f.nodes[f.return_node].term.kind == ir::Terminator::Kind::Return);
}

TEST_CASE("call lowering evaluates arguments into temporaries") {
    Lowered l = lower_ok(
        "fn g(a: i32, b: i32) -> i32 { a }\n"
        "fn f() -> i32 { g(1 + 2, 3) }\n"
        "fn main() {}");
    const ir::Function& f = fn_named(l, "f");
    bool saw_call = false;
    for (const auto& node : f.nodes) {
        if (node.term.kind == ir::Terminator::Kind::Call) {
            saw_call = true;
            CHECK(node.term.args.size() == 2);
            CHECK(!node.instr.has_value());  // call nodes carry no instruction
        }
    }
    CHECK(saw_call);
}

TEST_CASE("drops are emitted for owning locals at scope exit, in reverse order") {
    Lowered l = lower_ok(
        "fn f() { let a = Box::new(1); let b = Box::new(2); }\n"
        "fn main() {}");
    const ir::Function& f = fn_named(l, "f");
    std::vector<ir::LocalId> dropped;
    for (const auto& node : f.nodes)
        if (node.instr && node.instr->kind == ir::Instr::Kind::Drop)
            dropped.push_back(node.instr->dest.local);
    REQUIRE(dropped.size() == 2);
    CHECK(dropped[0] > dropped[1]);  // b drops before a
}

TEST_CASE("copy types are copied, owning types are moved") {
    Lowered l = lower_ok(
        "fn f() -> i32 { let x = 1; let y = x; let b = Box::new(2); let c = b; x }\n"
        "fn main() {}");
    const ir::Function& f = fn_named(l, "f");
    int copies = 0, moves = 0;
    for (const auto& node : f.nodes) {
        if (!node.instr || node.instr->kind != ir::Instr::Kind::Assign) continue;
        const ir::Rvalue& rv = node.instr->rv;
        if (rv.kind != ir::Rvalue::Kind::Use || !rv.a.is_place()) continue;
        if (rv.a.kind == ir::Operand::Kind::Copy) ++copies;
        if (rv.a.kind == ir::Operand::Kind::Move) ++moves;
    }
    CHECK(copies >= 2);  // y = x and return slot
    CHECK(moves == 1);   // c = b
}

TEST_CASE("each body reference introduces a fresh existential region") {
    Lowered l = lower_ok(
        "fn f() { let x = 1; let r = &x; let s = &x; }\n"
        "fn main() {}");
    const ir::Function& f = fn_named(l, "f");
    CHECK(f.num_universals == 0);
    std::vector<sem::RegionId> seen;
    for (const auto& node : f.nodes) {
        if (node.instr && node.instr->kind == ir::Instr::Kind::Assign &&
            node.instr->rv.kind == ir::Rvalue::Kind::Ref) {
            seen.push_back(node.instr->rv.ref_region);
        }
    }
    REQUIRE(seen.size() == 2);
    CHECK(seen[0] != seen[1]);
    CHECK(f.num_regions >= 2);
}

TEST_CASE("signature regions become universals, body regions existentials") {
    Lowered l = lower_ok(
        "fn pick<'a>(x: &'a i32, y: &'a i32) -> &'a i32 { let t = &*x; t }\n"
        "fn main() {}");
    const ir::Function& f = fn_named(l, "pick");
    CHECK(f.num_universals == 1);
    CHECK(f.num_regions > f.num_universals);
}

TEST_CASE("validate rejects malformed graphs") {
    Lowered l = lower_ok("fn main() {}");
    ir::Function bad = l.irp.fns[0];
    bad.nodes[0].term.kind = ir::Terminator::Kind::Goto;
    bad.nodes[0].term.next = 99;  // out of range
    CHECK(!ir::validate(bad, l.prog).empty());

    ir::Function bad2 = l.irp.fns[0];
    bad2.nodes[0].instr = ir::Instr{};  // instr node must end in Goto, not Return
    bad2.nodes[0].instr->kind = ir::Instr::Kind::Nop;
    CHECK(!ir::validate(bad2, l.prog).empty());
}

TEST_CASE("whole-program print is stable and covers every function") {
    Lowered l = lower_ok(
        "fn a() {}\nfn b() {}\nfn main() { a(); b(); }");
    std::string p1 = ir::print_program(l.irp, l.prog);
    std::string p2 = ir::print_program(l.irp, l.prog);
    CHECK(p1 == p2);
    CHECK(p1.find("fn a {") != std::string::npos);
    CHECK(p1.find("fn b {") != std::string::npos);
    CHECK(p1.find("fn main {") != std::string::npos);
}

TEST_CASE("box temporaries from nested expressions get storage") {
    // A nested Box::new inside a call argument must flow through a typed
    // temporary local, not vanish.
    Lowered l = lower_ok(
        "fn g(b: Box<i32>) -> i32 { *b }\n"
        "fn f() -> i32 { g(Box::new(9)) }\n"
        "fn main() {}");
    const ir::Function& f = fn_named(l, "f");
    bool box_temp = false;
    for (const auto& node : f.nodes)
        if (node.instr && node.instr->kind == ir::Instr::Kind::Assign &&
            node.instr->rv.kind == ir::Rvalue::Kind::Box)
            box_temp = true;
    CHECK(box_temp);
}

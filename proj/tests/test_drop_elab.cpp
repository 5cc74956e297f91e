#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>

#include "rustlight/drop_elab.hpp"
#include "rustlight/interp.hpp"
#include "rustlight/lowering.hpp"
#include "rustlight/parser.hpp"
#include "rustlight/typecheck.hpp"

using namespace rustlight;

namespace {

struct Built {
    ast::Module module;
    sem::Program prog;
    ir::Program irp;  // raw, pre-elaboration
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

int count_kind(const ir::Function& fn, ir::Instr::Kind k) {
    int n = 0;
    for (const auto& node : fn.nodes)
        if (node.instr && node.instr->kind == k) ++n;
    return n;
}

const ir::Function& fn_named(const ir::Program& p, const std::string& name) {
    for (const auto& f : p.fns)
        if (f.name == name) return f;
    REQUIRE(false);
    return p.fns[0];
}

}  // namespace

TEST_CASE("unconditional drops stay plain; no flags materialize") {
    Built b = build("fn main() { let a = Box::new(1); let c = Box::new(2); }");
    ir::Function fn = fn_named(b.irp, "main");
    auto stats = flow::elaborate_drops(b.prog, fn);
    CHECK(stats.flags_added == 0);
    CHECK(stats.cond_drops == 0);
    CHECK(count_kind(fn, ir::Instr::Kind::Drop) == 2);
    CHECK(count_kind(fn, ir::Instr::Kind::CondDrop) == 0);
    CHECK(ir::validate(fn, b.prog).empty());
}

TEST_CASE("definitely moved drops are removed") {
    Built b = build("fn main() { let a = Box::new(1); let c = a; }");
    ir::Function fn = fn_named(b.irp, "main");
    auto stats = flow::elaborate_drops(b.prog, fn);
    // `a` is moved; only `c`'s drop survives, unconditionally.
    CHECK(stats.drops_removed >= 1);
    CHECK(stats.flags_added == 0);
    CHECK(count_kind(fn, ir::Instr::Kind::Drop) == 1);
    CHECK(ir::validate(fn, b.prog).empty());
}

TEST_CASE("conditional move produces a flagged drop (the diamond)") {
    Built b = build(
        "fn f(c: bool) {\n"
        "    let a = Box::new(1);\n"
        "    if c { let t = a; }\n"
        "}\n"
        "fn main() {}");
    ir::Function fn = fn_named(b.irp, "f");
    auto stats = flow::elaborate_drops(b.prog, fn);
    CHECK(stats.flags_added >= 1);
    CHECK(stats.cond_drops >= 1);
    CHECK(ir::validate(fn, b.prog).empty());
    bool has_flag_local = false;
    for (const auto& l : fn.locals) has_flag_local |= l.is_drop_flag;
    CHECK(has_flag_local);
}

TEST_CASE("diamond executes exactly one free per allocation on both branches") {
    const std::string src =
        "fn f(c: bool) -> i32 {\n"
        "    let a = Box::new(7);\n"
        "    let mut out = 0;\n"
        "    if c { let t = a; out = *t; }\n"
        "    out\n"
        "}\n"
        "fn main() {}";
    Built b = build(src);
    for (auto& fn : b.irp.fns) flow::elaborate_drops(b.prog, fn);

    for (bool branch : {true, false}) {
        // Drive `f` from a tiny main substituted per branch.
        std::string drive = std::string("fn f(c: bool) -> i32 {\n") +
                            "    let a = Box::new(7);\n"
                            "    let mut out = 0;\n"
                            "    if c { let t = a; out = *t; }\n"
                            "    out\n"
                            "}\n"
                            "fn main() -> i32 { f(" +
                            (branch ? "true" : "false") + ") }";
        Built d = build(drive);
        for (auto& fn : d.irp.fns) flow::elaborate_drops(d.prog, fn);
        interp::RunOptions opts;
        interp::RunResult r = interp::run(d.prog, d.irp, opts);
        REQUIRE(r.trap == interp::Trap::None);
        CHECK(r.exit_code == (branch ? 7 : 0));
        CHECK(r.allocs == 1);
        CHECK(r.frees == 1);   // exactly one free on either branch
        CHECK(r.leaked == 0);
    }
}

TEST_CASE("elaboration is idempotent") {
    const char* srcs[] = {
        "fn main() { let a = Box::new(1); }",
        "fn f(c: bool) { let a = Box::new(1); if c { let t = a; } }\nfn main() {}",
        "struct S { a: Box<i32>, b: Box<i32> }\n"
        "fn f(c: bool) -> i32 {\n"
        "    let s = S { a: Box::new(1), b: Box::new(2) };\n"
        "    if c { let t = s.a; return *t; }\n"
        "    let u = s.b;\n"
        "    *u\n"
        "}\n"
        "fn main() {}",
        "enum E { A { b: Box<i32> }, B }\n"
        "fn f(e: E) -> i32 {\n"
        "    let mut o = 0;\n"
        "    match e { E::A { b } => { o = *b; } E::B => {} }\n"
        "    o\n"
        "}\n"
        "fn main() {}",
    };
    for (const char* src : srcs) {
        Built b = build(src);
        for (auto& fn : b.irp.fns) {
            flow::elaborate_drops(b.prog, fn);
            std::string once = ir::print_function(fn, b.prog);
            auto stats2 = flow::elaborate_drops(b.prog, fn);
            std::string twice = ir::print_function(fn, b.prog);
            CHECK(!stats2.changed());
            CHECK(once == twice);
        }
    }
}

TEST_CASE("mixed-init struct drop expands per field") {
    Built b = build(
        "struct S { a: Box<i32>, b: Box<i32> }\n"
        "fn f(c: bool) {\n"
        "    let s = S { a: Box::new(1), b: Box::new(2) };\n"
        "    if c { let t = s.a; }\n"  // a conditionally moved, b never
        "}\n"
        "fn main() {}");
    ir::Function fn = fn_named(b.irp, "f");
    auto stats = flow::elaborate_drops(b.prog, fn);
    CHECK(stats.struct_expansions >= 1);
    // The field that never moves drops unconditionally; the moved one is
    // flagged.
    CHECK(count_kind(fn, ir::Instr::Kind::CondDrop) >= 1);
    CHECK(count_kind(fn, ir::Instr::Kind::Drop) >= 1);
    CHECK(ir::validate(fn, b.prog).empty());
}

TEST_CASE("parameters start with their flags set") {
    Built b = build(
        "fn f(c: bool, bx: Box<i32>) {\n"
        "    if c { let t = bx; }\n"
        "}\n"
        "fn main() {}");
    ir::Function fn = fn_named(b.irp, "f");
    auto stats = flow::elaborate_drops(b.prog, fn);
    REQUIRE(stats.flags_added >= 1);
    // Find the flag-init prepended before the old entry: it must set the
    // parameter's flag to true.
    bool saw_param_flag_true = false;
    for (const auto& node : fn.nodes) {
        if (!node.instr || node.instr->kind != ir::Instr::Kind::Assign) continue;
        if (!fn.locals[node.instr->dest.local].is_drop_flag) continue;
        if (node.instr->rv.kind == ir::Rvalue::Kind::Use &&
            node.instr->rv.a.kind == ir::Operand::Kind::ConstBool &&
            node.instr->rv.a.const_bool)
            saw_param_flag_true = true;
    }
    CHECK(saw_param_flag_true);
}

TEST_CASE("moving a whole flagged value clears its flag") {
    // After the unconditional second move, the exit drop must not fire:
    // interpret and check the free count stays balanced (1 alloc, 1 free).
    Built b = build(
        "fn f(c: bool) -> i32 {\n"
        "    let mut a = Box::new(3);\n"
        "    if c { let t = a; a = Box::new(4); }\n"
        "    let u = a;\n"
        "    *u\n"
        "}\n"
        "fn main() -> i32 { f(true) }");
    for (auto& fn : b.irp.fns) flow::elaborate_drops(b.prog, fn);
    interp::RunOptions opts;
    interp::RunResult r = interp::run(b.prog, b.irp, opts);
    REQUIRE(r.trap == interp::Trap::None);
    CHECK(r.exit_code == 4);
    CHECK(r.allocs == 2);
    CHECK(r.frees == 2);
    CHECK(r.leaked == 0);
}

TEST_CASE("elaborated graphs still satisfy the structural invariants") {
    const char* srcs[] = {
        "fn f(c: bool) { let a = Box::new(1); if c { let t = a; } }\nfn main() {}",
        "fn f() { let mut i = 0; while i < 3 { let b = Box::new(i); i = i + 1; } }\n"
        "fn main() {}",
    };
    for (const char* src : srcs) {
        Built b = build(src);
        for (auto& fn : b.irp.fns) {
            flow::elaborate_drops(b.prog, fn);
            auto problems = ir::validate(fn, b.prog);
            for (auto& p : problems) MESSAGE(fn.name, ": ", p);
            CHECK(problems.empty());
        }
    }
}

TEST_CASE("while-loop entry with a flag keeps the back edge correct") {
    // The flag-init chain is prepended before the old entry node; a loop
    // whose back edge targets the old node 0 must still converge and run.
    Built b = build(
        "fn f() -> i32 {\n"
        "    let mut n = 0;\n"
        "    while n < 2 {\n"
        "        let b = Box::new(n);\n"
        "        let t = b;\n"
        "        n = *t + 1;\n"
        "    }\n"
        "    n\n"
        "}\n"
        "fn main() -> i32 { f() }");
    for (auto& fn : b.irp.fns) flow::elaborate_drops(b.prog, fn);
    for (auto& fn : b.irp.fns) CHECK(ir::validate(fn, b.prog).empty());
    interp::RunOptions opts;
    interp::RunResult r = interp::run(b.prog, b.irp, opts);
    REQUIRE(r.trap == interp::Trap::None);
    CHECK(r.exit_code == 2);
    CHECK(r.allocs == r.frees);
}

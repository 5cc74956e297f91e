#include "rustlight/driver.hpp"

#include <sstream>

#include "rustlight/c_emit.hpp"
#include "rustlight/drop_elab.hpp"
#include "rustlight/init_analysis.hpp"
#include "rustlight/liveness.hpp"
#include "rustlight/lowering.hpp"
#include "rustlight/move_check.hpp"
#include "rustlight/parser.hpp"
#include "rustlight/typecheck.hpp"

namespace rustlight::driver {

namespace {

std::string dump_init_states(const sem::Program& prog, const ir::Function& fn) {
    std::ostringstream os;
    flow::MovePaths paths = flow::MovePaths::build(prog, fn);
    flow::InitAnalysis analysis(prog, paths);
    auto solved = flow::solve(fn, analysis, flow::Direction::Forward);
    os << "fn " << fn.name << ": " << paths.size() << " move paths\n";
    for (flow::PathId p = 0; p < paths.size(); ++p)
        os << "  path" << p << " = " << paths.describe(p, prog, fn) << "\n";
    for (ir::NodeId n = 0; n < fn.nodes.size(); ++n) {
        os << "  bb" << n << ": init {";
        bool first = true;
        for (flow::PathId p = 0; p < paths.size(); ++p)
            if (solved.in_facts[n].init.test(p)) {
                os << (first ? "" : " ") << p;
                first = false;
            }
        os << "} uninit {";
        first = true;
        for (flow::PathId p = 0; p < paths.size(); ++p)
            if (solved.in_facts[n].uninit.test(p)) {
                os << (first ? "" : " ") << p;
                first = false;
            }
        os << "}\n";
    }
    return os.str();
}

}  // namespace

Compilation compile(std::string file_name, std::string source,
                    const Options& opts) {
    Compilation c;
    c.map = SourceMap(std::move(file_name), source);

    c.module = parse_module(source, c.diags);
    if (!c.diags.empty()) {
        c.diags.sort();
        return c;
    }
    c.parsed = true;

    c.sem = typecheck(c.module, c.diags);
    if (!c.diags.empty()) {
        c.diags.sort();
        return c;
    }
    c.typed = true;

    c.ir_raw = lower_module(c.module, c.sem, c.diags);
    for (const auto& fn : c.ir_raw.fns) {
        auto problems = ir::validate(fn, c.sem);
        for (const auto& p : problems)
            c.diags.report(DiagCode::InternalError, Span{},
                           "invalid IR for `" + fn.name + "`: " + p);
    }
    if (!c.diags.empty()) {
        c.diags.sort();
        return c;
    }
    c.lowered = true;

    // Move/initialization checking runs on the raw IR: unconditional
    // drops at scope exits stand in for "value still owned here", which
    // is exactly what the checker needs to see.
    for (const auto& fn : c.ir_raw.fns) move_check(c.sem, fn, c.diags);

    c.ir_elab = c.ir_raw;
    flow::elaborate_program(c.sem, c.ir_elab);

    flow::BorrowOptions bo;
    bo.field_insensitive = opts.borrow_field_insensitive;
    c.borrow_on_elab = !opts.borrow_pre_elab;
    const ir::Program& target = opts.borrow_pre_elab ? c.ir_raw : c.ir_elab;
    for (const auto& fn : target.fns)
        c.borrow.push_back(flow::borrow_check_fn(c.sem, fn, bo, c.diags));

    if (!opts.dump.empty()) {
        std::ostringstream os;
        if (opts.dump == "rustir") {
            os << ir::print_program(c.ir_raw, c.sem);
        } else if (opts.dump == "rustir-elab") {
            os << ir::print_program(c.ir_elab, c.sem);
        } else if (opts.dump == "dataflow:init") {
            for (const auto& fn : c.ir_raw.fns) os << dump_init_states(c.sem, fn);
        } else if (opts.dump == "dataflow:live") {
            for (const auto& fn : target.fns) {
                os << "fn " << fn.name << ":\n";
                os << flow::print_liveness(fn, flow::solve_liveness(fn));
            }
        } else if (opts.dump == "dataflow:borrow") {
            for (size_t i = 0; i < c.borrow.size(); ++i)
                os << flow::print_borrow_results(c.sem, target.fns[i],
                                                 c.borrow[i]);
        }
        c.dump_text = os.str();
    }

    c.diags.sort();
    return c;
}

std::string render_diagnostics(const Compilation& c, bool json) {
    std::ostringstream os;
    if (json) {
        os << "[";
        const auto& all = c.diags.all();
        for (size_t i = 0; i < all.size(); ++i)
            os << (i ? "," : "") << "\n  " << all[i].render_json(c.map);
        os << (all.empty() ? "" : "\n") << "]\n";
        return os.str();
    }
    for (const auto& d : c.diags.all()) os << d.render(c.map) << "\n";
    return os.str();
}

std::string emit_c(const Compilation& c, const std::string& entry) {
    return cgen::emit_c(c.sem, c.ir_elab, entry);
}

std::string emit_loans_json(const Compilation& c) {
    std::ostringstream os;
    const ir::Program& target = c.borrow_on_elab ? c.ir_elab : c.ir_raw;
    os << "[";
    for (size_t i = 0; i < c.borrow.size(); ++i)
        os << (i ? ",\n " : "")
           << flow::borrow_results_json(c.sem, target.fns[i], c.borrow[i]);
    os << "]\n";
    return os.str();
}

interp::RunResult run(const Compilation& c, const interp::RunOptions& opts) {
    return interp::run(c.sem, c.ir_elab, opts);
}

}  // namespace rustlight::driver

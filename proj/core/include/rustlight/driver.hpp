#pragma once

#include <string>
#include <vector>

#include "rustlight/ast.hpp"
#include "rustlight/borrow_check.hpp"
#include "rustlight/diagnostics.hpp"
#include "rustlight/interp.hpp"
#include "rustlight/ir.hpp"
#include "rustlight/types.hpp"

namespace rustlight::driver {

struct Options {
    // "", "rustir", "rustir-elab", "dataflow:init", "dataflow:live",
    // "dataflow:borrow"
    std::string dump;
    bool borrow_field_insensitive = false;
    // Check borrows on the pre-elaboration IR (default is after drop
    // elaboration, so conditional drops are visible to the analysis).
    bool borrow_pre_elab = false;
};

/// Full pipeline state for one source file. The AST module is kept
/// alive here because the semantic tables index into it by node address.
struct Compilation {
    SourceMap map;
    DiagnosticBag diags;
    ast::Module module;
    sem::Program sem;
    ir::Program ir_raw;    // as lowered
    ir::Program ir_elab;   // after drop elaboration
    std::vector<flow::BorrowFnResult> borrow;  // per borrow-checked fn
    bool borrow_on_elab = true;  // which IR the borrow results refer to
    bool parsed = false;
    bool typed = false;
    bool lowered = false;
    std::string dump_text;

    bool ok() const { return lowered && diags.empty(); }
};

/// Parse -> typecheck -> lower -> move check -> drop elaboration ->
/// borrow check. Stops early when a stage reports diagnostics that the
/// next stage depends on; `diags` ends up sorted by source position.
Compilation compile(std::string file_name, std::string source,
                    const Options& opts);

/// Renders all diagnostics, one per line ("text") or as a JSON array.
std::string render_diagnostics(const Compilation& c, bool json);

/// Emits the C translation unit for a successful compilation.
std::string emit_c(const Compilation& c, const std::string& entry);

/// Machine-readable loans report for every function.
std::string emit_loans_json(const Compilation& c);

/// Runs the elaborated program in the interpreter.
interp::RunResult run(const Compilation& c, const interp::RunOptions& opts);

}  // namespace rustlight::driver

#pragma once

#include "rustlight/init_analysis.hpp"
#include "rustlight/ir.hpp"

namespace rustlight::flow {

/// Rewrites every Drop in `fn` according to what the initialization
/// analysis can prove at that point:
///
///  - subtree definitely initialized   -> Drop stays (or becomes a
///    CondDrop if the path acquired a flag elsewhere, so the flag
///    invariant holds at every drop of that path);
///  - subtree definitely uninitialized -> Nop;
///  - struct with tracked field paths  -> recurse per field;
///  - otherwise (box, enum, or an untracked mix) -> CondDrop guarded by
///    a fresh boolean drop flag.
///
/// Drop flags are materialized as locals (`is_drop_flag`), initialized
/// by a chain of nodes prepended before the old entry (parameters start
/// true, everything else false), set to true at every assignment that
/// initializes the path, and cleared at moves out of it. A CondDrop
/// clears its own flag when it fires.
///
/// New nodes are appended (or prepended as the init chain) in a fixed
/// order, so elaboration is deterministic; running it twice is a no-op
/// because only plain Drop instructions are ever rewritten.
struct DropElabStats {
    uint32_t flags_added = 0;
    uint32_t drops_kept = 0;
    uint32_t drops_removed = 0;
    uint32_t cond_drops = 0;
    uint32_t struct_expansions = 0;

    bool changed() const {
        return flags_added || drops_removed || cond_drops || struct_expansions;
    }
};

DropElabStats elaborate_drops(const sem::Program& prog, ir::Function& fn);

void elaborate_program(const sem::Program& prog, ir::Program& irp);

}  // namespace rustlight::flow

#pragma once

#include "rustlight/diagnostics.hpp"
#include "rustlight/ir.hpp"

namespace rustlight {

// Flow-sensitive move and initialization checking over the CFG:
//   - uses and borrows of moved or never-initialized values;
//   - moves out of references and non-terminal box projections;
//   - assignments into partially deinitialized containers;
//   - second assignment to an immutable binding (first is allowed on a
//     deferred `let`);
//   - control paths reaching the return node with an uninitialized
//     return slot.
// Runs on pre-elaboration IR; does not mutate the function.
void move_check(const sem::Program& prog, const ir::Function& fn,
                DiagnosticBag& diags);

}  // namespace rustlight

#pragma once

#include "rustlight/ast.hpp"
#include "rustlight/diagnostics.hpp"
#include "rustlight/ir.hpp"
#include "rustlight/types.hpp"

namespace rustlight {

// Lowers a type-checked module to the CFG IR. Requires a clean
// DiagnosticBag from typecheck; lowering itself only reports internal
// errors (which indicate a bug, not bad input).
//
// Shape of the output, per function:
//   - locals: _0 return slot, _1.._n parameters, then temporaries and
//     user bindings in order of first occurrence;
//   - scope exits emit Drop for owning locals (reverse declaration
//     order) followed by StorageDead;
//   - every `return` funnels through a single Return node, preceded by
//     drops of the parameters;
//   - assignments to possibly-initialized droppable places go through a
//     temporary plus an explicit Drop of the old value (the drop
//     elaboration pass later refines or deletes that Drop);
//   - unreachable nodes are pruned and the remainder renumbered in the
//     original emission order, so node ids are deterministic.
ir::Program lower_module(const ast::Module& m, const sem::Program& prog,
                         DiagnosticBag& diags);

}  // namespace rustlight

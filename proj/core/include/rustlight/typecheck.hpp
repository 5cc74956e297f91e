#pragma once

#include "rustlight/ast.hpp"
#include "rustlight/diagnostics.hpp"
#include "rustlight/types.hpp"

namespace rustlight {

// Name resolution + type checking for a whole module. Produces the
// semantic program (ADT table, signatures, per-node typing side tables)
// that lowering consumes. All structural mutability errors (assigning
// through `&`, `&mut` of an immutable place) are reported here;
// flow-sensitive ones (first assignment to an immutable binding) are
// left to the move checker.
sem::Program typecheck(const ast::Module& m, DiagnosticBag& diags);

}  // namespace rustlight

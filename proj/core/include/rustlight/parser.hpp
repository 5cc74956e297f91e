#pragma once

#include <string>

#include "rustlight/ast.hpp"
#include "rustlight/diagnostics.hpp"

namespace rustlight {

// Recursive-descent parser over the token vector. On a syntax error it
// reports into `diags` and recovers at item granularity: the current
// item is dropped and parsing resumes at the next `fn`/`struct`/`enum`.
ast::Module parse_module(const std::string& src, DiagnosticBag& diags);

}  // namespace rustlight

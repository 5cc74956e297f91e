#pragma once

#include <string>

#include "rustlight/ir.hpp"

namespace rustlight::cgen {

/// Translates a lowered (and normally drop-elaborated) program into a
/// single portable C99 translation unit.
///
/// Mapping: i32 -> int32_t with wrapping arithmetic via unsigned
/// helpers; bool/unit -> uint8_t; Box<T>/&T/&mut T -> T*; structs ->
/// plain structs with positional fields f0..; enums -> tagged unions
/// { int32_t tag; union { ... } u; }. Drop glue is emitted per droppable
/// type; CondDrop tests and clears its flag. Division by zero exits with
/// code 101, matching the interpreter's trap exit.
///
/// Output is a pure function of the IR (a content hash of the printed
/// IR is embedded in the header comment), so builds are reproducible.
std::string emit_c(const sem::Program& prog, const ir::Program& irp,
                   const std::string& entry);

}  // namespace rustlight::cgen

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rustlight/ir.hpp"

namespace rustlight::interp {

/// Everything that can abort execution. The interpreter is the dynamic
/// oracle for the static checkers: on programs the checkers accept, no
/// memory trap may fire (DivByZero and OutOfFuel are arithmetic/resource
/// conditions, not memory safety, and are exempt from that property).
enum class Trap : uint8_t {
    None,
    UninitRead,     // read of an uninitialized or moved-from location
    UseAfterFree,   // dereference or load through a freed allocation
    DoubleFree,     // freeing an allocation twice
    DanglingRef,    // reference into a popped stack frame
    BadVariant,     // downcast or switch saw the wrong variant
    DropUninit,     // unconditional drop of a value that is not there
    DivByZero,      // division or remainder by zero
    StackOverflow,  // call depth limit exceeded
    OutOfFuel,      // step budget exhausted (likely an infinite loop)
    NoEntry,        // entry function not found
    BadEntry,       // entry function has parameters or an odd return type
    Malformed,      // IR shape the evaluator cannot interpret
};

const char* trap_name(Trap t);

struct RunOptions {
    std::string entry = "main";
    uint64_t fuel = 100'000'000;  // instruction budget
    uint32_t max_depth = 512;     // call stack limit
    bool trace = false;           // record per-step events
};

struct RunResult {
    int32_t exit_code = 0;
    Trap trap = Trap::None;
    std::string message;       // human-readable trap description
    uint64_t steps = 0;
    uint64_t allocs = 0;       // heap cells ever allocated
    uint64_t frees = 0;        // heap cells freed
    uint64_t leaked = 0;       // cells still live at exit
    std::vector<std::string> trace;

    bool ok() const { return trap == Trap::None; }
};

/// Executes the (normally drop-elaborated) program from `opts.entry`.
/// Deterministic: same program and options, same result.
RunResult run(const sem::Program& prog, const ir::Program& irp,
              const RunOptions& opts);

}  // namespace rustlight::interp

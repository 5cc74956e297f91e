#pragma once

#include <string>
#include <vector>

#include "rustlight/span.hpp"

namespace rustlight {

// Stable diagnostic codes. The numeric value is part of the tool's
// external contract (tests and downstream consumers match on it), so
// codes are append-only.
enum class DiagCode : int {
    // parse / name resolution / types
    SyntaxError = 1,
    UnknownName = 2,
    TypeMismatch = 3,
    ArityMismatch = 4,
    NonExhaustiveMatch = 5,
    DuplicateDefinition = 6,
    RecursiveType = 7,
    MissingLifetime = 8,
    AssignToImmutable = 9,
    MutBorrowOfImmutable = 10,
    InvalidPlaceExpr = 11,
    // move / initialization checking
    UseAfterMove = 12,
    BorrowAfterMove = 13,
    CannotMoveOutOfReference = 14,
    UseOfUninit = 15,
    MissingReturnValue = 16,
    UnsupportedPartialBoxMove = 17,
    UnknownLifetime = 18,
    // borrow checking
    MutableBorrowWhileBorrowed = 20,
    UseWhileMutablyBorrowed = 21,
    AssignWhileBorrowed = 22,
    MoveWhileBorrowed = 23,
    UniversalRegionViolation = 24,
    ReturnLocalReference = 25,
    DuplicateMatchBinding = 26,
    // engine self-checks
    InternalError = 99,
};

const char* diag_code_name(DiagCode code);

struct Diagnostic {
    DiagCode code;
    std::string message;
    Span span;
    std::string note;       // optional secondary text ("borrow occurs here")
    Span note_span;         // meaningful only when note is non-empty

    // "file:line:col: error[RL0012]: use of moved value `x`"
    std::string render(const SourceMap& sm) const;
    std::string render_json(const SourceMap& sm) const;
};

// Shared sink threaded through every pass. Passes keep going after
// recoverable errors so one compile reports as much as it can.
class DiagnosticBag {
public:
    void report(DiagCode code, Span span, std::string message);
    void report(Diagnostic diag);

    bool empty() const { return diags_.empty(); }
    size_t size() const { return diags_.size(); }
    const std::vector<Diagnostic>& all() const { return diags_; }

    // Stable order for output: span start, then code, then insertion order.
    void sort();

private:
    std::vector<Diagnostic> diags_;
};

}  // namespace rustlight

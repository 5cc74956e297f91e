#include "rustlight/diagnostics.hpp"

#include <algorithm>
#include <cstdio>

namespace rustlight {

SourceMap::SourceMap(std::string file_name, std::string text)
    : file_name_(std::move(file_name)), text_(std::move(text)) {
    line_starts_.push_back(0);
    for (uint32_t i = 0; i < text_.size(); ++i) {
        if (text_[i] == '\n') line_starts_.push_back(i + 1);
    }
}

LineCol SourceMap::lookup(uint32_t offset) const {
    if (line_starts_.empty()) return LineCol{};
    auto it = std::upper_bound(line_starts_.begin(), line_starts_.end(), offset);
    size_t line = static_cast<size_t>(it - line_starts_.begin());  // 1-based
    uint32_t start = line_starts_[line - 1];
    return LineCol{static_cast<uint32_t>(line), offset - start + 1};
}

const char* diag_code_name(DiagCode code) {
    switch (code) {
        case DiagCode::SyntaxError: return "SyntaxError";
        case DiagCode::UnknownName: return "UnknownName";
        case DiagCode::TypeMismatch: return "TypeMismatch";
        case DiagCode::ArityMismatch: return "ArityMismatch";
        case DiagCode::NonExhaustiveMatch: return "NonExhaustiveMatch";
        case DiagCode::DuplicateDefinition: return "DuplicateDefinition";
        case DiagCode::RecursiveType: return "RecursiveType";
        case DiagCode::MissingLifetime: return "MissingLifetime";
        case DiagCode::AssignToImmutable: return "AssignToImmutable";
        case DiagCode::MutBorrowOfImmutable: return "MutBorrowOfImmutable";
        case DiagCode::InvalidPlaceExpr: return "InvalidPlaceExpr";
        case DiagCode::UseAfterMove: return "UseAfterMove";
        case DiagCode::BorrowAfterMove: return "BorrowAfterMove";
        case DiagCode::CannotMoveOutOfReference: return "CannotMoveOutOfReference";
        case DiagCode::UseOfUninit: return "UseOfUninit";
        case DiagCode::MissingReturnValue: return "MissingReturnValue";
        case DiagCode::UnsupportedPartialBoxMove: return "UnsupportedPartialBoxMove";
        case DiagCode::UnknownLifetime: return "UnknownLifetime";
        case DiagCode::MutableBorrowWhileBorrowed: return "MutableBorrowWhileBorrowed";
        case DiagCode::UseWhileMutablyBorrowed: return "UseWhileMutablyBorrowed";
        case DiagCode::AssignWhileBorrowed: return "AssignWhileBorrowed";
        case DiagCode::MoveWhileBorrowed: return "MoveWhileBorrowed";
        case DiagCode::UniversalRegionViolation: return "UniversalRegionViolation";
        case DiagCode::ReturnLocalReference: return "ReturnLocalReference";
        case DiagCode::DuplicateMatchBinding: return "DuplicateMatchBinding";
        case DiagCode::InternalError: return "InternalError";
    }
    return "Unknown";
}

static std::string escape_json(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    return out;
}

std::string Diagnostic::render(const SourceMap& sm) const {
    LineCol lc = sm.lookup(span.lo);
    char head[64];
    std::snprintf(head, sizeof head, ":%u:%u: error[RL%04d]: ", lc.line, lc.col,
                  static_cast<int>(code));
    std::string out = sm.file_name() + head + message;
    if (!note.empty()) {
        LineCol nlc = sm.lookup(note_span.lo);
        char nh[48];
        std::snprintf(nh, sizeof nh, "\n  note (:%u:%u): ", nlc.line, nlc.col);
        out += nh;
        out += note;
    }
    return out;
}

std::string Diagnostic::render_json(const SourceMap& sm) const {
    LineCol lc = sm.lookup(span.lo);
    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "{\"code\":\"RL%04d\",\"name\":\"%s\",\"line\":%u,\"col\":%u,",
                  static_cast<int>(code), diag_code_name(code), lc.line, lc.col);
    std::string out = buf;
    out += "\"message\":\"" + escape_json(message) + "\"";
    if (!note.empty()) out += ",\"note\":\"" + escape_json(note) + "\"";
    out += "}";
    return out;
}

void DiagnosticBag::report(DiagCode code, Span span, std::string message) {
    diags_.push_back(Diagnostic{code, std::move(message), span, {}, {}});
}

void DiagnosticBag::report(Diagnostic diag) { diags_.push_back(std::move(diag)); }

void DiagnosticBag::sort() {
    std::stable_sort(diags_.begin(), diags_.end(),
                     [](const Diagnostic& a, const Diagnostic& b) {
                         if (a.span.lo != b.span.lo) return a.span.lo < b.span.lo;
                         return static_cast<int>(a.code) < static_cast<int>(b.code);
                     });
}

}  // namespace rustlight

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rustlight/diagnostics.hpp"
#include "rustlight/span.hpp"

namespace rustlight {

enum class TokKind : uint8_t {
    Eof,
    Ident,
    Lifetime,   // 'a (text excludes the quote)
    IntLit,
    // keywords
    KwFn, KwLet, KwMut, KwIf, KwElse, KwWhile, KwMatch, KwReturn,
    KwStruct, KwEnum, KwBox, KwTrue, KwFalse, KwRef,
    // punctuation
    LParen, RParen, LBrace, RBrace,
    Comma, Colon, ColonColon, Semi, Arrow, FatArrow,
    Eq, EqEq, Ne, Lt, Le, Gt, Ge,
    Plus, Minus, Star, Slash, Percent,
    Amp, AmpAmp, Bang, Dot, Underscore,
};

const char* tok_kind_name(TokKind k);

struct Token {
    TokKind kind = TokKind::Eof;
    Span span;
    std::string_view text;  // backed by the source buffer
    int32_t int_value = 0;  // valid for IntLit
};

// Tokenizes the whole buffer up front; the parser then walks the vector.
// `//` line comments and non-nested `/* */` block comments are skipped.
std::vector<Token> lex(const std::string& src, DiagnosticBag& diags);

}  // namespace rustlight

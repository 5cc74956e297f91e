#include "rustlight/lexer.hpp"

#include <cctype>
#include <unordered_map>

namespace rustlight {

const char* tok_kind_name(TokKind k) {
    switch (k) {
        case TokKind::Eof: return "<eof>";
        case TokKind::Ident: return "identifier";
        case TokKind::Lifetime: return "lifetime";
        case TokKind::IntLit: return "integer literal";
        case TokKind::KwFn: return "`fn`";
        case TokKind::KwLet: return "`let`";
        case TokKind::KwMut: return "`mut`";
        case TokKind::KwIf: return "`if`";
        case TokKind::KwElse: return "`else`";
        case TokKind::KwWhile: return "`while`";
        case TokKind::KwMatch: return "`match`";
        case TokKind::KwReturn: return "`return`";
        case TokKind::KwStruct: return "`struct`";
        case TokKind::KwEnum: return "`enum`";
        case TokKind::KwBox: return "`Box`";
        case TokKind::KwTrue: return "`true`";
        case TokKind::KwFalse: return "`false`";
        case TokKind::KwRef: return "`ref`";
        case TokKind::LParen: return "`(`";
        case TokKind::RParen: return "`)`";
        case TokKind::LBrace: return "`{`";
        case TokKind::RBrace: return "`}`";
        case TokKind::Comma: return "`,`";
        case TokKind::Colon: return "`:`";
        case TokKind::ColonColon: return "`::`";
        case TokKind::Semi: return "`;`";
        case TokKind::Arrow: return "`->`";
        case TokKind::FatArrow: return "`=>`";
        case TokKind::Eq: return "`=`";
        case TokKind::EqEq: return "`==`";
        case TokKind::Ne: return "`!=`";
        case TokKind::Lt: return "`<`";
        case TokKind::Le: return "`<=`";
        case TokKind::Gt: return "`>`";
        case TokKind::Ge: return "`>=`";
        case TokKind::Plus: return "`+`";
        case TokKind::Minus: return "`-`";
        case TokKind::Star: return "`*`";
        case TokKind::Slash: return "`/`";
        case TokKind::Percent: return "`%`";
        case TokKind::Amp: return "`&`";
        case TokKind::AmpAmp: return "`&&`";
        case TokKind::Bang: return "`!`";
        case TokKind::Dot: return "`.`";
        case TokKind::Underscore: return "`_`";
    }
    return "?";
}

namespace {

const std::unordered_map<std::string_view, TokKind>& keywords() {
    static const std::unordered_map<std::string_view, TokKind> kws = {
        {"fn", TokKind::KwFn},         {"let", TokKind::KwLet},
        {"mut", TokKind::KwMut},       {"if", TokKind::KwIf},
        {"else", TokKind::KwElse},     {"while", TokKind::KwWhile},
        {"match", TokKind::KwMatch},   {"return", TokKind::KwReturn},
        {"struct", TokKind::KwStruct}, {"enum", TokKind::KwEnum},
        {"Box", TokKind::KwBox},       {"true", TokKind::KwTrue},
        {"false", TokKind::KwFalse},   {"ref", TokKind::KwRef},
    };
    return kws;
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_cont(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

}  // namespace

std::vector<Token> lex(const std::string& src, DiagnosticBag& diags) {
    std::vector<Token> out;
    uint32_t i = 0;
    const uint32_t n = static_cast<uint32_t>(src.size());

    auto push = [&](TokKind k, uint32_t lo, uint32_t hi) {
        out.push_back(Token{k, Span{lo, hi},
                            std::string_view(src).substr(lo, hi - lo), 0});
    };

    while (i < n) {
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '/' && i + 1 < n && src[i + 1] == '/') {
            while (i < n && src[i] != '\n') ++i;
            continue;
        }
        if (c == '/' && i + 1 < n && src[i + 1] == '*') {
            uint32_t lo = i;
            i += 2;
            while (i + 1 < n && !(src[i] == '*' && src[i + 1] == '/')) ++i;
            if (i + 1 >= n) {
                diags.report(DiagCode::SyntaxError, Span{lo, n},
                             "unterminated block comment");
                i = n;
            } else {
                i += 2;
            }
            continue;
        }

        uint32_t lo = i;
        if (is_ident_start(c)) {
            ++i;
            while (i < n && is_ident_cont(src[i])) ++i;
            std::string_view text = std::string_view(src).substr(lo, i - lo);
            if (text == "_") {
                push(TokKind::Underscore, lo, i);
            } else if (auto it = keywords().find(text); it != keywords().end()) {
                push(it->second, lo, i);
            } else {
                push(TokKind::Ident, lo, i);
            }
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            ++i;
            while (i < n && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
            Token t{TokKind::IntLit, Span{lo, i},
                    std::string_view(src).substr(lo, i - lo), 0};
            // Literals must fit in i32; only run-time arithmetic wraps.
            uint64_t acc = 0;
            bool over = false;
            for (char d : t.text) {
                acc = acc * 10u + static_cast<uint64_t>(d - '0');
                if (acc > 2147483647u) over = true;
            }
            if (over) {
                diags.report(DiagCode::SyntaxError, t.span,
                             "integer literal out of range for `i32`");
                acc = 0;
            }
            t.int_value = static_cast<int32_t>(acc);
            out.push_back(t);
            continue;
        }
        if (c == '\'') {
            ++i;
            uint32_t name_lo = i;
            while (i < n && is_ident_cont(src[i])) ++i;
            if (i == name_lo) {
                diags.report(DiagCode::SyntaxError, Span{lo, i},
                             "expected lifetime name after `'`");
                continue;
            }
            out.push_back(Token{TokKind::Lifetime, Span{lo, i},
                                std::string_view(src).substr(name_lo, i - name_lo), 0});
            continue;
        }

        auto two = [&](char next, TokKind pair, TokKind single) {
            if (i + 1 < n && src[i + 1] == next) {
                push(pair, lo, i + 2);
                i += 2;
            } else {
                push(single, lo, i + 1);
                i += 1;
            }
        };

        switch (c) {
            case '(': push(TokKind::LParen, lo, ++i); break;
            case ')': push(TokKind::RParen, lo, ++i); break;
            case '{': push(TokKind::LBrace, lo, ++i); break;
            case '}': push(TokKind::RBrace, lo, ++i); break;
            case ',': push(TokKind::Comma, lo, ++i); break;
            case ';': push(TokKind::Semi, lo, ++i); break;
            case '.': push(TokKind::Dot, lo, ++i); break;
            case '+': push(TokKind::Plus, lo, ++i); break;
            case '*': push(TokKind::Star, lo, ++i); break;
            case '/': push(TokKind::Slash, lo, ++i); break;
            case '%': push(TokKind::Percent, lo, ++i); break;
            case ':': two(':', TokKind::ColonColon, TokKind::Colon); break;
            case '=': {
                if (i + 1 < n && src[i + 1] == '>') {
                    push(TokKind::FatArrow, lo, i + 2);
                    i += 2;
                } else {
                    two('=', TokKind::EqEq, TokKind::Eq);
                }
                break;
            }
            case '!': two('=', TokKind::Ne, TokKind::Bang); break;
            case '<': two('=', TokKind::Le, TokKind::Lt); break;
            case '>': two('=', TokKind::Ge, TokKind::Gt); break;
            case '&': two('&', TokKind::AmpAmp, TokKind::Amp); break;
            case '-': {
                if (i + 1 < n && src[i + 1] == '>') {
                    push(TokKind::Arrow, lo, i + 2);
                    i += 2;
                } else {
                    push(TokKind::Minus, lo, ++i);
                }
                break;
            }
            default:
                diags.report(DiagCode::SyntaxError, Span{lo, lo + 1},
                             std::string("unexpected character `") + c + "`");
                ++i;
        }
    }
    out.push_back(Token{TokKind::Eof, Span{n, n}, {}, 0});
    return out;
}

}  // namespace rustlight

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rustlight {

// Half-open byte range into the source buffer. Line/column are derived
// lazily (see SourceMap) so the lexer only tracks offsets.
struct Span {
    uint32_t lo = 0;
    uint32_t hi = 0;

    static Span join(Span a, Span b) {
        return Span{a.lo < b.lo ? a.lo : b.lo, a.hi > b.hi ? a.hi : b.hi};
    }
    bool operator==(const Span&) const = default;
};

struct LineCol {
    uint32_t line = 1;  // 1-based
    uint32_t col = 1;   // 1-based, in bytes
};

// Maps byte offsets back to line/column for diagnostics.
class SourceMap {
public:
    SourceMap() = default;
    SourceMap(std::string file_name, std::string text);

    LineCol lookup(uint32_t offset) const;
    const std::string& file_name() const { return file_name_; }
    const std::string& text() const { return text_; }

private:
    std::string file_name_;
    std::string text_;
    std::vector<uint32_t> line_starts_;
};

}  // namespace rustlight

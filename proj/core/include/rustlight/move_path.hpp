#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rustlight/bitset.hpp"
#include "rustlight/ir.hpp"

namespace rustlight::flow {

using PathId = uint32_t;
inline constexpr PathId kNoPath = UINT32_C(0xFFFFFFFF);

// The tracked initialization paths of a function: every deref-free place
// (local plus Field/Downcast projections) the body mentions, closed under
// prefixes and under sibling fields so that drop elaboration can reason
// about every part of a partially moved value. Contents behind a Deref
// are never tracked separately — moving `*b` out of a box consumes the
// whole box (its canonical move path is `b`).
class MovePaths {
public:
    struct PathData {
        ir::Place place;
        PathId parent = kNoPath;
        std::vector<PathId> children;
        sem::TypePtr type;
    };

    static MovePaths build(const sem::Program& prog, const ir::Function& fn);

    size_t size() const { return paths_.size(); }
    const PathData& data(PathId p) const { return paths_[p]; }
    PathId local_root(ir::LocalId l) const { return local_roots_[l]; }

    // Exact lookup of a deref-free place; kNoPath if untracked.
    PathId find(const ir::Place& place) const;

    // The longest tracked prefix of an arbitrary place, stopping at the
    // first Deref. Always succeeds (locals are roots).
    PathId deref_free_prefix(const ir::Place& place) const;

    // The canonical deinitialization path of a Move operand: the place
    // itself if deref-free, or the box being consumed for a terminal
    // box-deref. nullopt when the move is illegal (crosses a reference
    // or moves out of a box non-terminally) — the move checker turns
    // that into a diagnostic.
    std::optional<ir::Place> canonical_move_place(const sem::Program& prog,
                                                  const ir::Function& fn,
                                                  const ir::Place& place) const;

    // All paths in the subtree rooted at p (p, its fields, their
    // fields, ...), as a bitset over path ids.
    const BitSet& subtree(PathId p) const { return subtrees_[p]; }

    std::string describe(PathId p, const sem::Program& prog,
                         const ir::Function& fn) const;

private:
    std::vector<PathData> paths_;
    std::vector<PathId> local_roots_;
    std::vector<BitSet> subtrees_;

    PathId ensure(const sem::Program& prog, const ir::Function& fn,
                  const ir::Place& place);
    void close_siblings(const sem::Program& prog, const ir::Function& fn);
    void build_subtrees();
};

}  // namespace rustlight::flow

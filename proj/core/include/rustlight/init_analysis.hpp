#pragma once

#include "rustlight/dataflow.hpp"
#include "rustlight/move_path.hpp"

namespace rustlight::flow {

// Forward may-analysis tracking, per move path, whether it is possibly
// initialized and possibly uninitialized. A path is *definitely*
// initialized at a point iff its subtree does not intersect the
// maybe-uninit set.
//
// Boundary: parameters (and their subtrees) are initialized; everything
// else, including the return slot, starts uninitialized.
struct InitState {
    BitSet init;    // maybe-initialized
    BitSet uninit;  // maybe-uninitialized

    bool operator==(const InitState&) const = default;
};

class InitAnalysis {
public:
    using State = InitState;

    InitAnalysis(const sem::Program& prog, const MovePaths& paths)
        : prog_(&prog), paths_(&paths) {}

    State bottom(const ir::Function&) const {
        return State{BitSet(paths_->size()), BitSet(paths_->size())};
    }

    State boundary(const ir::Function& fn) const;

    bool join_into(State& dst, const State& src) const {
        bool a = dst.init.union_with(src.init);
        bool b = dst.uninit.union_with(src.uninit);
        return a || b;
    }

    void transfer(const ir::Function& fn, ir::NodeId n, const State& in,
                  State& out) const;

    uint64_t max_chain_height(const ir::Function&) const {
        return 2 * paths_->size() + 1;
    }

    const MovePaths& paths() const { return *paths_; }

    // Effect helpers shared with the move checker and drop elaboration.
    void apply_deinit(State& s, PathId p) const;
    void apply_init(State& s, PathId p) const;

private:
    const sem::Program* prog_;
    const MovePaths* paths_;
};

}  // namespace rustlight::flow

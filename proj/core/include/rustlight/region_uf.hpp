#pragma once

#include <cstdint>
#include <vector>

#include "rustlight/types.hpp"

namespace rustlight::flow {

// Union-find over a function's regions. Unions attach the larger root
// beneath the smaller, so the representative of a class is always its
// smallest member — that keeps state comparison and printing canonical
// without a separate normalization pass.
class RegionUF {
public:
    RegionUF() = default;
    explicit RegionUF(uint32_t n) : parent_(n) {
        for (uint32_t i = 0; i < n; ++i) parent_[i] = i;
    }

    uint32_t size() const { return static_cast<uint32_t>(parent_.size()); }

    sem::RegionId find(sem::RegionId r) const {
        while (parent_[r] != r) {
            // Path halving; safe under const because the class structure
            // is unchanged, only shortcuts are added.
            auto& p = const_cast<RegionUF*>(this)->parent_;
            p[r] = p[p[r]];
            r = p[r];
        }
        return r;
    }

    bool same(sem::RegionId a, sem::RegionId b) const { return find(a) == find(b); }

    // Returns the surviving root, or the existing root if already joined.
    sem::RegionId unite(sem::RegionId a, sem::RegionId b) {
        a = find(a);
        b = find(b);
        if (a == b) return a;
        if (b < a) std::swap(a, b);
        parent_[b] = a;
        return a;
    }

    bool equal(const RegionUF& other) const {
        if (size() != other.size()) return false;
        for (uint32_t i = 0; i < size(); ++i)
            if (find(i) != other.find(i)) return false;
        return true;
    }

    // True iff every class of `this` is contained in a class of `other`
    // (this is a refinement of other).
    bool refines(const RegionUF& other) const {
        for (uint32_t i = 0; i < size(); ++i)
            if (!other.same(i, find(i))) return false;
        return true;
    }

private:
    std::vector<sem::RegionId> parent_;
};

}  // namespace rustlight::flow

#pragma once

#include <cstdint>
#include <vector>

namespace rustlight {

// Fixed-width bitset sized at runtime; the dataflow states are small
// (move paths, locals, loans) but sized per function, so std::bitset
// does not fit and vector<bool> is awkward for joins.
class BitSet {
public:
    BitSet() = default;
    explicit BitSet(size_t bits) : bits_(bits), words_((bits + 63) / 64, 0) {}

    size_t size() const { return bits_; }
    bool test(size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1; }
    void set(size_t i) { words_[i >> 6] |= uint64_t(1) << (i & 63); }
    void reset(size_t i) { words_[i >> 6] &= ~(uint64_t(1) << (i & 63)); }

    void clear() {
        for (auto& w : words_) w = 0;
    }

    bool any() const {
        for (auto w : words_)
            if (w) return true;
        return false;
    }

    size_t count() const {
        size_t n = 0;
        for (auto w : words_) n += static_cast<size_t>(__builtin_popcountll(w));
        return n;
    }

    // dst |= src; returns true iff dst changed.
    bool union_with(const BitSet& other) {
        bool changed = false;
        for (size_t i = 0; i < words_.size(); ++i) {
            uint64_t next = words_[i] | other.words_[i];
            changed |= next != words_[i];
            words_[i] = next;
        }
        return changed;
    }

    bool intersect_with(const BitSet& other) {
        bool changed = false;
        for (size_t i = 0; i < words_.size(); ++i) {
            uint64_t next = words_[i] & other.words_[i];
            changed |= next != words_[i];
            words_[i] = next;
        }
        return changed;
    }

    void subtract(const BitSet& other) {
        for (size_t i = 0; i < words_.size(); ++i) words_[i] &= ~other.words_[i];
    }

    bool intersects(const BitSet& other) const {
        for (size_t i = 0; i < words_.size(); ++i)
            if (words_[i] & other.words_[i]) return true;
        return false;
    }

    bool operator==(const BitSet&) const = default;

private:
    size_t bits_ = 0;
    std::vector<uint64_t> words_;
};

namespace flow {
using rustlight::BitSet;
}  // namespace flow

}  // namespace rustlight

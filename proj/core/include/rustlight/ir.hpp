#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rustlight/ast.hpp"
#include "rustlight/types.hpp"

// Mid-level IR: a control-flow graph in which every node carries at most
// one instruction plus a terminator. Keeping nodes this small makes the
// dataflow transfer functions per-node rather than per-statement-list,
// which is the granularity the analyses and their oracles want.
namespace rustlight::ir {

using LocalId = uint32_t;   // _0 = return slot, _1.._n = params
using NodeId = uint32_t;    // entry is node 0
using sem::RegionId;

struct Projection {
    enum class Kind : uint8_t { Field, Deref, Downcast };
    Kind kind = Kind::Field;
    uint32_t index = 0;  // Field: field position; Downcast: variant index

    bool operator==(const Projection&) const = default;
};

// A memory location: a local plus a projection path. `((*_1) as Cons).0`
// is local 1 with [Deref, Downcast(Cons), Field(0)].
struct Place {
    LocalId local = 0;
    std::vector<Projection> proj;

    bool operator==(const Place&) const = default;
    static Place base(LocalId l) { return Place{l, {}}; }
};

struct Operand {
    enum class Kind : uint8_t { Copy, Move, ConstInt, ConstBool, ConstUnit };
    Kind kind = Kind::ConstUnit;
    Place place;          // Copy / Move
    int32_t const_int = 0;
    bool const_bool = false;

    static Operand copy(Place p) { return Operand{Kind::Copy, std::move(p), 0, false}; }
    static Operand move(Place p) { return Operand{Kind::Move, std::move(p), 0, false}; }
    static Operand imm(int32_t v) { return Operand{Kind::ConstInt, {}, v, false}; }
    static Operand imm_bool(bool v) { return Operand{Kind::ConstBool, {}, 0, v}; }
    static Operand unit() { return Operand{Kind::ConstUnit, {}, 0, false}; }
    bool is_place() const { return kind == Kind::Copy || kind == Kind::Move; }
};

struct Rvalue {
    enum class Kind : uint8_t { Use, Ref, Binary, Unary, Box, Aggregate };
    Kind kind = Kind::Use;
    Operand a;                 // Use / Box / Binary lhs / Unary operand
    Operand b;                 // Binary rhs
    ast::BinOp bin_op = ast::BinOp::Add;
    ast::UnOp un_op = ast::UnOp::Neg;  // Neg / Not (Deref never survives lowering)
    // Ref
    Place ref_place;
    bool ref_mut = false;
    RegionId ref_region = sem::kNoRegion;
    // Aggregate
    sem::AdtId adt = 0;
    uint32_t variant = 0;
    std::vector<Operand> elems;
};

struct Instr {
    enum class Kind : uint8_t { Assign, Drop, CondDrop, StorageDead, Nop };
    Kind kind = Kind::Nop;
    Place dest;          // Assign target / Drop & CondDrop & StorageDead place
    Rvalue rv;           // Assign
    LocalId flag = 0;    // CondDrop guard
    Span span;
};

struct Terminator {
    enum class Kind : uint8_t { Goto, If, Switch, Call, Return };
    Kind kind = Kind::Return;
    NodeId next = 0;       // Goto target / If then / Call continuation
    NodeId alt = 0;        // If else
    Operand cond;          // If
    Place scrutinee;       // Switch
    std::vector<NodeId> targets;  // Switch, indexed by variant
    // Call
    uint32_t callee = 0;
    std::vector<Operand> args;
    Place dest;
    std::vector<RegionId> inst_regions;  // callee universal -> caller region
    Span span;

    void successors(std::vector<NodeId>& out) const {
        out.clear();
        switch (kind) {
            case Kind::Goto: out.push_back(next); break;
            case Kind::If:
                out.push_back(next);
                out.push_back(alt);
                break;
            case Kind::Switch:
                for (NodeId t : targets) out.push_back(t);
                break;
            case Kind::Call: out.push_back(next); break;
            case Kind::Return: break;
        }
    }
};

// Invariant: a node with an instruction always ends in Goto; branching
// and calling nodes carry no instruction.
struct Node {
    std::optional<Instr> instr;
    Terminator term;
};

struct LocalDecl {
    sem::TypePtr type;      // regions fully instantiated
    std::string name;       // user name, or "" for temporaries / flags
    bool user_mut = false;
    bool is_drop_flag = false;
    Span span;
};

struct Function {
    std::string name;
    uint32_t fn_index = 0;       // into sem::Program::fns
    uint32_t num_params = 0;
    std::vector<LocalDecl> locals;
    std::vector<Node> nodes;
    uint32_t num_universals = 0;
    uint32_t num_regions = 0;    // universals + existentials
    std::vector<sem::OutlivesPair> outlives;  // declared, over universals
    NodeId return_node = 0;      // the unique Return node

    const sem::TypePtr& local_type(LocalId l) const { return locals[l].type; }
    std::vector<std::vector<NodeId>> predecessors() const;
};

struct Program {
    std::vector<Function> fns;
};

// --- place utilities --------------------------------------------------------

// `a` is a prefix of `b` (every state of b's storage lies within a's).
bool place_prefix(const Place& a, const Place& b);

// Conservative may-overlap: one is a prefix of the other, except that
// sibling fields and distinct downcast variants are disjoint.
bool places_conflict(const Place& a, const Place& b);

sem::TypePtr place_type(const sem::Program& prog, const Function& fn, const Place& p);

// --- printing ---------------------------------------------------------------

std::string print_place(const Place& p, const sem::Program& prog, const Function& fn);
std::string print_type(const sem::TypePtr& t, const sem::Program& prog);
std::string print_function(const Function& fn, const sem::Program& prog);
std::string print_program(const Program& p, const sem::Program& prog);

// Checks structural invariants (edge targets in range, instr nodes end in
// Goto, Return node unique, locals well-typed). Returns problems as text;
// empty means valid.
std::vector<std::string> validate(const Function& fn, const sem::Program& prog);

}  // namespace rustlight::ir

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "rustlight/span.hpp"

namespace rustlight::sem {

// Regions (lifetimes) are per-function indices. Universal regions — the
// function's lifetime parameters, including ones synthesized by elision —
// occupy [0, num_universals); existential regions for borrows inside the
// body are allocated after them during lowering.
using RegionId = uint32_t;
inline constexpr RegionId kNoRegion = UINT32_C(0xFFFFFFFF);

using AdtId = uint32_t;

// Value-semantic type tree with shared immutable nodes. A `Ref` node
// carries its region; types produced by the checker leave body regions
// as kNoRegion and lowering re-instantiates them with fresh existentials.
struct Type;
using TypePtr = std::shared_ptr<const Type>;

struct Type {
    enum class Kind { Unit, Bool, I32, Box, Ref, Adt, Error };
    Kind kind = Kind::Error;
    TypePtr elem;              // Box / Ref
    bool ref_mut = false;      // Ref
    RegionId region = kNoRegion;  // Ref
    AdtId adt = 0;             // Adt
};

using TypeKind = Type::Kind;

TypePtr type_unit();
TypePtr type_bool();
TypePtr type_i32();
TypePtr type_error();
TypePtr type_box(TypePtr elem);
TypePtr type_ref(RegionId region, bool is_mut, TypePtr elem);
TypePtr type_adt(AdtId id);

// Structural equality ignoring region annotations (the borrow checker,
// not the type checker, judges regions).
bool same_type(const TypePtr& a, const TypePtr& b);
bool mentions_region(const TypePtr& t, RegionId r);
void collect_regions(const TypePtr& t, std::vector<RegionId>& out);

struct AdtField {
    std::string name;
    TypePtr type;
    Span span;
};

struct AdtVariant {
    std::string name;
    std::vector<AdtField> fields;
    Span span;
};

// Structs are single-variant ADTs (variant 0, named after the struct);
// only enums admit downcast projections.
struct Adt {
    std::string name;
    bool is_enum = false;
    std::vector<AdtVariant> variants;
    Span span;
};

struct OutlivesPair {
    RegionId longer = 0;
    RegionId shorter = 0;
};

struct FnSig {
    std::string name;
    std::vector<std::string> universal_names;  // display names; synthesized ones are "#n"
    std::vector<OutlivesPair> outlives;        // declared `'longer: 'shorter`
    std::vector<TypePtr> param_types;          // Ref regions refer to universals
    std::vector<bool> param_mut;
    TypePtr return_type;
    Span span;
    uint32_t num_universals() const {
        return static_cast<uint32_t>(universal_names.size());
    }
};

class Program;

// Per-function name resolution and typing results, keyed by AST node
// address (the AST is immutable after parsing).
using BindingId = uint32_t;

struct Binding {
    std::string name;
    TypePtr type;
    bool is_mut = false;
    bool is_param = false;
    Span span;
};

struct FnInfo {
    FnSig sig;
    std::vector<Binding> bindings;  // params first, then lets / pattern bindings
    std::unordered_map<const void*, TypePtr> expr_type;
    std::unordered_map<const void*, BindingId> var_binding;     // Var expr → binding
    std::unordered_map<const void*, BindingId> decl_binding;    // Let stmt / PatField → binding
    std::unordered_map<const void*, uint32_t> field_index;      // Field expr / FieldInit / PatField
    std::unordered_map<const void*, uint32_t> autoderef;        // Field expr → # of derefs inserted
    std::unordered_map<const void*, uint32_t> callee;           // Call expr → fn index
    std::unordered_map<const void*, AdtId> lit_adt;             // StructLit/EnumLit/Pattern
    std::unordered_map<const void*, uint32_t> lit_variant;      // EnumLit/Pattern
};

class Program {
public:
    std::vector<Adt> adts;
    std::unordered_map<std::string, AdtId> adt_by_name;
    std::vector<FnInfo> fns;
    std::unordered_map<std::string, uint32_t> fn_by_name;

    // True when dropping a value of this type runs nontrivial work
    // (owns a heap allocation somewhere).
    bool needs_drop(const TypePtr& t) const;
    // Unit, bool, i32 and shared references duplicate freely.
    bool is_copy(const TypePtr& t) const;

    std::string type_name(const TypePtr& t) const;
};

}  // namespace rustlight::sem

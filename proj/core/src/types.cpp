#include "rustlight/types.hpp"

namespace rustlight::sem {

namespace {
TypePtr make(Type t) { return std::make_shared<const Type>(std::move(t)); }
}  // namespace

TypePtr type_unit() {
    static const TypePtr t = make(Type{Type::Kind::Unit, nullptr, false, kNoRegion, 0});
    return t;
}
TypePtr type_bool() {
    static const TypePtr t = make(Type{Type::Kind::Bool, nullptr, false, kNoRegion, 0});
    return t;
}
TypePtr type_i32() {
    static const TypePtr t = make(Type{Type::Kind::I32, nullptr, false, kNoRegion, 0});
    return t;
}
TypePtr type_error() {
    static const TypePtr t = make(Type{Type::Kind::Error, nullptr, false, kNoRegion, 0});
    return t;
}
TypePtr type_box(TypePtr elem) {
    return make(Type{Type::Kind::Box, std::move(elem), false, kNoRegion, 0});
}
TypePtr type_ref(RegionId region, bool is_mut, TypePtr elem) {
    return make(Type{Type::Kind::Ref, std::move(elem), is_mut, region, 0});
}
TypePtr type_adt(AdtId id) {
    return make(Type{Type::Kind::Adt, nullptr, false, kNoRegion, id});
}

bool same_type(const TypePtr& a, const TypePtr& b) {
    if (a.get() == b.get()) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case Type::Kind::Unit:
        case Type::Kind::Bool:
        case Type::Kind::I32:
        case Type::Kind::Error: return true;
        case Type::Kind::Box: return same_type(a->elem, b->elem);
        case Type::Kind::Ref:
            return a->ref_mut == b->ref_mut && same_type(a->elem, b->elem);
        case Type::Kind::Adt: return a->adt == b->adt;
    }
    return false;
}

bool mentions_region(const TypePtr& t, RegionId r) {
    if (!t) return false;
    if (t->kind == Type::Kind::Ref && t->region == r) return true;
    return mentions_region(t->elem, r);
}

void collect_regions(const TypePtr& t, std::vector<RegionId>& out) {
    if (!t) return;
    if (t->kind == Type::Kind::Ref && t->region != kNoRegion) out.push_back(t->region);
    collect_regions(t->elem, out);
}

bool Program::needs_drop(const TypePtr& t) const {
    if (!t) return false;
    switch (t->kind) {
        case Type::Kind::Box: return true;
        case Type::Kind::Adt: {
            const Adt& adt = adts[t->adt];
            for (const auto& v : adt.variants)
                for (const auto& f : v.fields)
                    if (needs_drop(f.type)) return true;
            return false;
        }
        default: return false;
    }
}

bool Program::is_copy(const TypePtr& t) const {
    if (!t) return false;
    switch (t->kind) {
        case Type::Kind::Unit:
        case Type::Kind::Bool:
        case Type::Kind::I32:
        case Type::Kind::Error: return true;
        case Type::Kind::Ref: return !t->ref_mut;
        default: return false;
    }
}

std::string Program::type_name(const TypePtr& t) const {
    if (!t) return "<null>";
    switch (t->kind) {
        case Type::Kind::Unit: return "()";
        case Type::Kind::Bool: return "bool";
        case Type::Kind::I32: return "i32";
        case Type::Kind::Error: return "<error>";
        case Type::Kind::Box: return "Box<" + type_name(t->elem) + ">";
        case Type::Kind::Ref:
            return std::string("&") + (t->ref_mut ? "mut " : "") + type_name(t->elem);
        case Type::Kind::Adt: return adts[t->adt].name;
    }
    return "?";
}

}  // namespace rustlight::sem

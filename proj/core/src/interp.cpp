#include "rustlight/interp.hpp"

#include <optional>
#include <sstream>

namespace rustlight::interp {

const char* trap_name(Trap t) {
    switch (t) {
        case Trap::None: return "none";
        case Trap::UninitRead: return "uninit-read";
        case Trap::UseAfterFree: return "use-after-free";
        case Trap::DoubleFree: return "double-free";
        case Trap::DanglingRef: return "dangling-ref";
        case Trap::BadVariant: return "bad-variant";
        case Trap::DropUninit: return "drop-uninit";
        case Trap::DivByZero: return "div-by-zero";
        case Trap::StackOverflow: return "stack-overflow";
        case Trap::OutOfFuel: return "out-of-fuel";
        case Trap::NoEntry: return "no-entry";
        case Trap::BadEntry: return "bad-entry";
        case Trap::Malformed: return "malformed";
    }
    return "?";
}

namespace {

// A storage root: either a local slot of a (possibly no longer live)
// frame, identified by the frame's generation number, or a heap cell.
struct Root {
    bool heap = false;
    uint64_t frame_gen = 0;
    uint32_t local = 0;
    uint64_t cell = 0;

    bool operator==(const Root&) const = default;
};

struct Location {
    Root root;
    std::vector<ir::Projection> path;  // Field / Downcast only
};

struct Value {
    enum class K : uint8_t { Uninit, Unit, Bool, Int, Ref, Box, Adt };
    K k = K::Uninit;
    int32_t i = 0;
    bool b = false;
    Location target;               // Ref
    uint64_t cell = 0;             // Box
    uint32_t variant = 0;          // Adt
    std::vector<Value> fields;     // Adt

    static Value unit() { return Value{K::Unit, 0, false, {}, 0, 0, {}}; }
    static Value of_int(int32_t v) { return Value{K::Int, v, false, {}, 0, 0, {}}; }
    static Value of_bool(bool v) { return Value{K::Bool, 0, v, {}, 0, 0, {}}; }
};

struct TrapError {
    Trap trap;
    std::string message;
};

[[noreturn]] void fail(Trap t, std::string msg) { throw TrapError{t, std::move(msg)}; }

struct Heap {
    std::vector<std::optional<Value>> cells;
    uint64_t allocs = 0;
    uint64_t frees = 0;

    uint64_t alloc(Value v) {
        cells.push_back(std::move(v));
        ++allocs;
        return cells.size() - 1;
    }

    Value* get(uint64_t id) {
        if (id >= cells.size()) fail(Trap::Malformed, "bad heap cell id");
        if (!cells[id]) fail(Trap::UseAfterFree, "heap cell used after free");
        return &*cells[id];
    }

    Value take_and_free(uint64_t id) {
        if (id >= cells.size()) fail(Trap::Malformed, "bad heap cell id");
        if (!cells[id]) fail(Trap::DoubleFree, "heap cell freed twice");
        Value v = std::move(*cells[id]);
        cells[id].reset();
        ++frees;
        return v;
    }

    uint64_t live() const {
        uint64_t n = 0;
        for (const auto& c : cells)
            if (c) ++n;
        return n;
    }
};

struct Frame {
    uint64_t gen = 0;
    uint32_t fn = 0;
    ir::NodeId node = 0;
    std::vector<Value> locals;
    // Where the eventual return value lands in the caller.
    ir::Place ret_dest;
};

struct Machine {
    const sem::Program& prog;
    const ir::Program& irp;
    const RunOptions& opts;
    Heap heap;
    std::vector<Frame> stack;
    uint64_t next_gen = 1;
    uint64_t steps = 0;
    std::vector<std::string> trace;

    Machine(const sem::Program& p, const ir::Program& i, const RunOptions& o)
        : prog(p), irp(i), opts(o) {}

    void note(const std::string& s) {
        if (opts.trace) trace.push_back(s);
    }

    Frame* frame_of(uint64_t gen) {
        for (auto it = stack.rbegin(); it != stack.rend(); ++it)
            if (it->gen == gen) return &*it;
        return nullptr;
    }

    // --- storage access -----------------------------------------------------

    Value* root_slot(const Root& r) {
        if (r.heap) return heap.get(r.cell);
        Frame* f = frame_of(r.frame_gen);
        if (!f) fail(Trap::DanglingRef, "reference into a dead stack frame");
        if (r.local >= f->locals.size()) fail(Trap::Malformed, "bad local id");
        return &f->locals[r.local];
    }

    // Walks Field/Downcast steps; every intermediate value must exist.
    Value* walk(Value* v, const std::vector<ir::Projection>& path) {
        for (const auto& pr : path) {
            if (v->k == Value::K::Uninit)
                fail(Trap::UninitRead, "projection through a missing value");
            if (v->k != Value::K::Adt)
                fail(Trap::Malformed, "projection into a non-aggregate value");
            switch (pr.kind) {
                case ir::Projection::Kind::Field:
                    if (pr.index >= v->fields.size())
                        fail(Trap::Malformed, "field index out of range");
                    v = &v->fields[pr.index];
                    break;
                case ir::Projection::Kind::Downcast:
                    if (v->variant != pr.index)
                        fail(Trap::BadVariant, "downcast to the wrong variant");
                    break;
                case ir::Projection::Kind::Deref:
                    fail(Trap::Malformed, "deref inside a resolved path");
            }
        }
        return v;
    }

    Value* slot_of(const Location& loc) { return walk(root_slot(loc.root), loc.path); }

    // Resolves a place of the current frame to a storage location,
    // following references and boxes at each Deref.
    Location resolve(const ir::Place& p) {
        Frame& f = stack.back();
        Location loc;
        loc.root = Root{false, f.gen, p.local, 0};
        for (const auto& pr : p.proj) {
            if (pr.kind != ir::Projection::Kind::Deref) {
                loc.path.push_back(pr);
                continue;
            }
            Value* v = slot_of(loc);
            if (v->k == Value::K::Ref) {
                loc = v->target;
            } else if (v->k == Value::K::Box) {
                uint64_t cell = v->cell;
                heap.get(cell);  // traps if freed
                loc = Location{Root{true, 0, 0, cell}, {}};
            } else if (v->k == Value::K::Uninit) {
                fail(Trap::UninitRead, "dereference of a missing value");
            } else {
                fail(Trap::Malformed, "dereference of a non-pointer value");
            }
        }
        return loc;
    }

    // --- values -------------------------------------------------------------

    void drop_value(Value& v) {
        switch (v.k) {
            case Value::K::Box: {
                note("free #" + std::to_string(v.cell));
                Value inner = heap.take_and_free(v.cell);
                drop_value(inner);
                break;
            }
            case Value::K::Adt:
                for (Value& fv : v.fields)
                    if (fv.k != Value::K::Uninit) drop_value(fv);
                break;
            default: break;
        }
        v.k = Value::K::Uninit;
        v.fields.clear();
    }

    Value read_copy(const ir::Place& p) {
        Value* v = slot_of(resolve(p));
        if (v->k == Value::K::Uninit)
            fail(Trap::UninitRead, "copy of an uninitialized value");
        return *v;
    }

    Value read_move(const ir::Place& p) {
        // Moving `*b` out of a box consumes the box: the payload moves
        // out and the backing allocation is freed on the spot.
        if (!p.proj.empty() && p.proj.back().kind == ir::Projection::Kind::Deref) {
            ir::Place owner = p;
            owner.proj.pop_back();
            Location oloc = resolve(owner);
            Value* ov = slot_of(oloc);
            if (ov->k == Value::K::Box) {
                note("free #" + std::to_string(ov->cell) + " (move out)");
                Value inner = heap.take_and_free(ov->cell);
                if (inner.k == Value::K::Uninit)
                    fail(Trap::UninitRead, "move of an uninitialized box payload");
                ov->k = Value::K::Uninit;
                ov->fields.clear();
                return inner;
            }
            // Fall through: a move through a plain reference is rejected
            // statically; dynamically it is just a read that empties the
            // target, which the checks below handle.
        }
        Location loc = resolve(p);
        Value* v = slot_of(loc);
        if (v->k == Value::K::Uninit)
            fail(Trap::UninitRead, "move of an uninitialized value");
        Value out = std::move(*v);
        v->k = Value::K::Uninit;
        v->fields.clear();
        return out;
    }

    Value eval_operand(const ir::Operand& op) {
        switch (op.kind) {
            case ir::Operand::Kind::ConstInt: return Value::of_int(op.const_int);
            case ir::Operand::Kind::ConstBool: return Value::of_bool(op.const_bool);
            case ir::Operand::Kind::ConstUnit: return Value::unit();
            case ir::Operand::Kind::Copy: return read_copy(op.place);
            case ir::Operand::Kind::Move: return read_move(op.place);
        }
        fail(Trap::Malformed, "bad operand");
    }

    int32_t as_int(const Value& v) {
        if (v.k != Value::K::Int) fail(Trap::Malformed, "expected an integer");
        return v.i;
    }
    bool as_bool(const Value& v) {
        if (v.k != Value::K::Bool) fail(Trap::Malformed, "expected a bool");
        return v.b;
    }

    Value eval_binary(ast::BinOp op, const Value& a, const Value& b) {
        switch (op) {
            case ast::BinOp::Add:
            case ast::BinOp::Sub:
            case ast::BinOp::Mul: {
                uint32_t x = static_cast<uint32_t>(as_int(a));
                uint32_t y = static_cast<uint32_t>(as_int(b));
                uint32_t r = op == ast::BinOp::Add   ? x + y
                             : op == ast::BinOp::Sub ? x - y
                                                     : x * y;
                return Value::of_int(static_cast<int32_t>(r));
            }
            case ast::BinOp::Div:
            case ast::BinOp::Rem: {
                int32_t x = as_int(a), y = as_int(b);
                if (y == 0) fail(Trap::DivByZero, "division by zero");
                if (x == INT32_MIN && y == -1)
                    return Value::of_int(op == ast::BinOp::Div ? INT32_MIN : 0);
                return Value::of_int(op == ast::BinOp::Div ? x / y : x % y);
            }
            case ast::BinOp::Eq:
            case ast::BinOp::Ne: {
                bool eq;
                if (a.k == Value::K::Bool || b.k == Value::K::Bool)
                    eq = as_bool(a) == as_bool(b);
                else
                    eq = as_int(a) == as_int(b);
                return Value::of_bool(op == ast::BinOp::Eq ? eq : !eq);
            }
            case ast::BinOp::Lt: return Value::of_bool(as_int(a) < as_int(b));
            case ast::BinOp::Le: return Value::of_bool(as_int(a) <= as_int(b));
            case ast::BinOp::Gt: return Value::of_bool(as_int(a) > as_int(b));
            case ast::BinOp::Ge: return Value::of_bool(as_int(a) >= as_int(b));
        }
        fail(Trap::Malformed, "bad binary op");
    }

    Value eval_rvalue(const ir::Rvalue& rv) {
        switch (rv.kind) {
            case ir::Rvalue::Kind::Use: return eval_operand(rv.a);
            case ir::Rvalue::Kind::Ref: {
                Location loc = resolve(rv.ref_place);
                // The target must exist when the reference is formed.
                if (slot_of(loc)->k == Value::K::Uninit)
                    fail(Trap::UninitRead, "borrow of an uninitialized value");
                Value v;
                v.k = Value::K::Ref;
                v.target = std::move(loc);
                return v;
            }
            case ir::Rvalue::Kind::Binary: {
                Value a = eval_operand(rv.a);
                Value b = eval_operand(rv.b);
                return eval_binary(rv.bin_op, a, b);
            }
            case ir::Rvalue::Kind::Unary: {
                Value a = eval_operand(rv.a);
                if (rv.un_op == ast::UnOp::Neg)
                    return Value::of_int(static_cast<int32_t>(
                        0u - static_cast<uint32_t>(as_int(a))));
                return Value::of_bool(!as_bool(a));
            }
            case ir::Rvalue::Kind::Box: {
                Value inner = eval_operand(rv.a);
                Value v;
                v.k = Value::K::Box;
                v.cell = heap.alloc(std::move(inner));
                note("alloc #" + std::to_string(v.cell));
                return v;
            }
            case ir::Rvalue::Kind::Aggregate: {
                Value v;
                v.k = Value::K::Adt;
                v.variant = rv.variant;
                v.fields.reserve(rv.elems.size());
                for (const auto& e : rv.elems) v.fields.push_back(eval_operand(e));
                return v;
            }
        }
        fail(Trap::Malformed, "bad rvalue");
    }

    void write_place(const ir::Place& p, Value v) {
        Location loc = resolve(p);
        *slot_of(loc) = std::move(v);
    }

    // --- execution ----------------------------------------------------------

    void exec_instr(const ir::Instr& ins) {
        switch (ins.kind) {
            case ir::Instr::Kind::Assign: {
                Value v = eval_rvalue(ins.rv);
                write_place(ins.dest, std::move(v));
                break;
            }
            case ir::Instr::Kind::Drop: {
                Value* v = slot_of(resolve(ins.dest));
                if (v->k == Value::K::Uninit)
                    fail(Trap::DropUninit, "drop of a value that was moved away");
                drop_value(*v);
                break;
            }
            case ir::Instr::Kind::CondDrop: {
                Frame& f = stack.back();
                if (ins.flag >= f.locals.size())
                    fail(Trap::Malformed, "bad drop flag");
                Value& flag = f.locals[ins.flag];
                bool on = as_bool(flag);
                if (on) {
                    Value* v = slot_of(resolve(ins.dest));
                    if (v->k == Value::K::Uninit)
                        fail(Trap::DropUninit,
                             "conditional drop found no value despite its flag");
                    drop_value(*v);
                }
                flag = Value::of_bool(false);
                break;
            }
            case ir::Instr::Kind::StorageDead: {
                Frame& f = stack.back();
                if (ins.dest.local < f.locals.size())
                    f.locals[ins.dest.local] = Value{};
                break;
            }
            case ir::Instr::Kind::Nop: break;
        }
    }

    // Returns the exit code once the entry function returns.
    int32_t loop() {
        while (true) {
            if (++steps > opts.fuel) fail(Trap::OutOfFuel, "step budget exhausted");
            Frame& f = stack.back();
            const ir::Function& fn = irp.fns[f.fn];
            if (f.node >= fn.nodes.size()) fail(Trap::Malformed, "bad node id");
            const ir::Node& node = fn.nodes[f.node];
            if (opts.trace)
                note(fn.name + ": bb" + std::to_string(f.node));

            if (node.instr) exec_instr(*node.instr);

            const ir::Terminator& t = node.term;
            switch (t.kind) {
                case ir::Terminator::Kind::Goto:
                    f.node = t.next;
                    break;
                case ir::Terminator::Kind::If: {
                    bool c = as_bool(eval_operand(t.cond));
                    f.node = c ? t.next : t.alt;
                    break;
                }
                case ir::Terminator::Kind::Switch: {
                    Value* v = slot_of(resolve(t.scrutinee));
                    if (v->k == Value::K::Uninit)
                        fail(Trap::UninitRead, "switch on a missing value");
                    if (v->k != Value::K::Adt)
                        fail(Trap::Malformed, "switch on a non-enum value");
                    if (v->variant >= t.targets.size())
                        fail(Trap::BadVariant, "switch saw an unknown variant");
                    f.node = t.targets[v->variant];
                    break;
                }
                case ir::Terminator::Kind::Call: {
                    if (stack.size() >= opts.max_depth)
                        fail(Trap::StackOverflow, "call depth limit exceeded");
                    if (t.callee >= irp.fns.size())
                        fail(Trap::Malformed, "bad callee");
                    const ir::Function& callee = irp.fns[t.callee];
                    std::vector<Value> args;
                    args.reserve(t.args.size());
                    for (const auto& a : t.args) args.push_back(eval_operand(a));
                    f.node = t.next;  // resume point
                    Frame nf;
                    nf.gen = next_gen++;
                    nf.fn = t.callee;
                    nf.node = 0;
                    nf.ret_dest = t.dest;
                    nf.locals.resize(callee.locals.size());
                    for (size_t i = 0; i < args.size(); ++i)
                        nf.locals[i + 1] = std::move(args[i]);
                    note("call " + callee.name);
                    stack.push_back(std::move(nf));
                    break;
                }
                case ir::Terminator::Kind::Return: {
                    const sem::TypePtr& rt = fn.local_type(0);
                    Value rv;
                    if (rt && rt->kind == sem::TypeKind::Unit) {
                        rv = Value::unit();
                    } else {
                        rv = std::move(f.locals[0]);
                        if (rv.k == Value::K::Uninit)
                            fail(Trap::UninitRead, "return slot never written");
                    }
                    ir::Place dest = f.ret_dest;
                    note("ret " + fn.name);
                    stack.pop_back();
                    if (stack.empty()) {
                        if (rv.k == Value::K::Int) return rv.i;
                        return 0;
                    }
                    write_place(dest, std::move(rv));
                    break;
                }
            }
        }
    }
};

}  // namespace

RunResult run(const sem::Program& prog, const ir::Program& irp,
              const RunOptions& opts) {
    RunResult res;
    uint32_t entry_idx = UINT32_MAX;
    for (uint32_t i = 0; i < irp.fns.size(); ++i)
        if (irp.fns[i].name == opts.entry) entry_idx = i;
    if (entry_idx == UINT32_MAX) {
        res.trap = Trap::NoEntry;
        res.message = "entry function `" + opts.entry + "` not found";
        res.exit_code = 101;
        return res;
    }
    const ir::Function& entry = irp.fns[entry_idx];
    const sem::TypePtr& ret = entry.local_type(0);
    bool ret_ok = ret && (ret->kind == sem::TypeKind::I32 ||
                          ret->kind == sem::TypeKind::Unit);
    if (entry.num_params != 0 || !ret_ok) {
        res.trap = Trap::BadEntry;
        res.message = "entry function must take no parameters and return i32 or unit";
        res.exit_code = 101;
        return res;
    }

    Machine m(prog, irp, opts);
    Frame f;
    f.gen = m.next_gen++;
    f.fn = entry_idx;
    f.locals.resize(entry.locals.size());
    m.stack.push_back(std::move(f));

    try {
        res.exit_code = m.loop();
    } catch (const TrapError& e) {
        res.trap = e.trap;
        res.message = e.message;
        res.exit_code = 101;
    }
    res.steps = m.steps;
    res.allocs = m.heap.allocs;
    res.frees = m.heap.frees;
    res.leaked = m.heap.live();
    res.trace = std::move(m.trace);
    return res;
}

}  // namespace rustlight::interp

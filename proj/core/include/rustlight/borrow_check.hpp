#pragma once

#include <string>

#include "rustlight/borrow_domain.hpp"
#include "rustlight/dataflow.hpp"
#include "rustlight/diagnostics.hpp"
#include "rustlight/liveness.hpp"

namespace rustlight::flow {

struct BorrowOptions {
    // Treat any two places with the same base local as overlapping
    // (drops field/variant disjointness). Useful for measuring how much
    // precision the projection-aware conflict test buys.
    bool field_insensitive = false;
};

/// Forward transfer over the borrow-state semilattice:
///  - a Ref rvalue introduces its loan into the region the reference is
///    born into, and chains in the loans of every region dereferenced on
///    the way to the borrowed place (reborrow support);
///  - value flow between reference types copies loan sets covariantly,
///    except beneath a `&mut`, where regions are unified (invariance);
///  - calls instantiate the callee's universal regions: argument loans
///    flow in, declared outlives edges propagate, result loans flow out;
///  - after each node, regions that liveness proves dead are marked so,
///    and a class whose members are all dead forgets its loans.
class BorrowAnalysis {
public:
    using State = BorrowState;

    BorrowAnalysis(const sem::Program& prog, const ir::Function& fn,
                   const LoanTable& table, const LivenessResult& live);

    State bottom(const ir::Function& fn) const;
    State boundary(const ir::Function& fn) const;

    bool join_into(State& dst, const State& src) const {
        return borrow_join_into(dst, src);
    }

    uint64_t max_chain_height(const ir::Function& fn) const {
        uint64_t n = fn.num_regions;
        return n + n * table_->loans.size() + n + 2;
    }

    void transfer(const ir::Function& fn, ir::NodeId n, const State& in,
                  State& out) const;

private:
    void flow_types(State& st, const sem::TypePtr& src, const sem::TypePtr& dst,
                    bool invariant, const std::vector<sem::RegionId>* src_map,
                    const std::vector<sem::RegionId>* dst_map) const;

    const sem::Program* prog_;
    const ir::Function* fn_;
    const LoanTable* table_;
    const LivenessResult* live_;
    // node -> loan id of the Ref assignment it carries (or UINT32_MAX)
    std::vector<uint32_t> loan_at_;
};

struct BorrowFnResult {
    LoanTable table;
    LivenessResult liveness;
    SolveResult<BorrowAnalysis> solved;
};

/// Solves the borrow dataflow for one function and reports conflicts,
/// escaping frame-local borrows, and undeclared universal-region
/// constraints into `diags`. The result is returned for dumps and tests.
BorrowFnResult borrow_check_fn(const sem::Program& prog, const ir::Function& fn,
                               const BorrowOptions& opts, DiagnosticBag& diags);

void borrow_check_program(const sem::Program& prog, const ir::Program& irp,
                          const BorrowOptions& opts, DiagnosticBag& diags);

/// Per-node state dump ("--dump=dataflow:borrow").
std::string print_borrow_results(const sem::Program& prog,
                                 const ir::Function& fn,
                                 const BorrowFnResult& res);

/// Machine-readable loans/regions report ("--emit-loans").
std::string borrow_results_json(const sem::Program& prog,
                                const ir::Function& fn,
                                const BorrowFnResult& res);

}  // namespace rustlight::flow

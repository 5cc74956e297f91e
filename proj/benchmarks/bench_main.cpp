// Microbenchmarks for the hot paths of the pipeline: semilattice joins,
// full fixpoint solves, and end-to-end compilation of a synthetic module.

#include <benchmark/benchmark.h>

#include <random>
#include <sstream>
#include <string>

#include "rustlight/borrow_check.hpp"
#include "rustlight/borrow_domain.hpp"
#include "rustlight/driver.hpp"

namespace {

using namespace rustlight;

flow::BorrowState random_state(std::mt19937& rng, std::size_t regions,
                               std::size_t loans) {
  flow::BorrowState st;
  st.uf = flow::RegionUF(regions);
  st.loans.assign(regions, flow::BitSet(loans));
  st.dead = flow::BitSet(regions);
  std::uniform_int_distribution<std::size_t> reg(0, regions - 1);
  std::bernoulli_distribution coin(0.4);
  for (std::size_t i = 0; i + 1 < regions; ++i)
    if (coin(rng)) st.merge(reg(rng), reg(rng));
  for (std::size_t l = 0; l < loans; ++l)
    if (coin(rng)) st.add_loan(reg(rng), l);
  for (std::size_t r = 0; r < regions; ++r)
    if (coin(rng)) st.dead.set(r);
  return st;
}

void bm_borrow_join(benchmark::State& state) {
  std::mt19937 rng(7);
  const std::size_t regions = static_cast<std::size_t>(state.range(0));
  std::vector<flow::BorrowState> pool;
  for (int i = 0; i < 64; ++i) pool.push_back(random_state(rng, regions, 24));
  std::size_t i = 0;
  for (auto _ : state) {
    flow::BorrowState dst = pool[i % pool.size()];
    bool changed = flow::borrow_join_into(dst, pool[(i + 1) % pool.size()]);
    benchmark::DoNotOptimize(changed);
    benchmark::DoNotOptimize(dst);
    ++i;
  }
}
BENCHMARK(bm_borrow_join)->Arg(8)->Arg(32)->Arg(128);

std::string synthetic_module(int fns) {
  std::ostringstream os;
  for (int i = 0; i < fns; ++i) {
    os << "fn work" << i << "(p: i32) -> i32 {\n"
       << "    let mut acc = 0;\n"
       << "    let mut i = 0;\n"
       << "    while i < p {\n"
       << "        let b = Box::new(i);\n"
       << "        let r = &mut acc;\n"
       << "        *r = *r + *b;\n"
       << "        i = i + 1;\n"
       << "    }\n"
       << "    acc\n"
       << "}\n";
  }
  os << "fn main() -> i32 { work0(3) }\n";
  return os.str();
}

void bm_compile_pipeline(benchmark::State& state) {
  const std::string src = synthetic_module(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    driver::Options opts;
    driver::Compilation c = driver::compile("bench.rl", src, opts);
    benchmark::DoNotOptimize(c.ok());
  }
}
BENCHMARK(bm_compile_pipeline)->Arg(1)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

void bm_borrow_check_only(benchmark::State& state) {
  const std::string src = synthetic_module(static_cast<int>(state.range(0)));
  driver::Options opts;
  driver::Compilation base = driver::compile("bench.rl", src, opts);
  if (!base.ok()) state.SkipWithError("pipeline rejected benchmark input");
  for (auto _ : state) {
    DiagnosticBag diags;
    flow::borrow_check_program(base.sem, base.ir_elab, {}, diags);
    benchmark::DoNotOptimize(diags.size());
  }
}
BENCHMARK(bm_borrow_check_only)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

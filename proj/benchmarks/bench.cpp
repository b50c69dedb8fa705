#include <benchmark/benchmark.h>

#include <random>

#include "upsilon/causal.hpp"
#include "upsilon/conditioning.hpp"
#include "upsilon/simkit.hpp"
#include "upsilon/synthesis.hpp"
#include "upsilon/uncertain.hpp"

using namespace upsilon;

namespace {

// A chain of n outputs each depending on two parameters and its predecessor.
Structure chain(int n) {
  Structure s;
  s.hypothesis_id = 1;
  s.name = "chain";
  auto eq = [&](const std::string& id, std::vector<Symbol> vars) {
    Equation e;
    e.id = id;
    e.primary = vars.front();
    e.declared_order = vars;
    std::sort(vars.begin(), vars.end());
    e.variables = vars;
    s.equations.push_back(e);
  };
  s.declarations.push_back({"t", Role::index, ""});
  eq("e_t", {"t"});
  for (int i = 0; i < n; ++i) {
    const auto a = "a" + std::to_string(i), b = "b" + std::to_string(i), z = "z" + std::to_string(i);
    s.declarations.push_back({a, Role::parameter, ""});
    s.declarations.push_back({b, Role::parameter, ""});
    s.declarations.push_back({z, Role::output, ""});
    eq("e_" + a, {a});
    eq("e_" + b, {b});
    std::vector<Symbol> vars{z, a, b, "t"};
    if (i > 0) vars.push_back("z" + std::to_string(i - 1));
    eq("e_" + z, vars);
  }
  return s;
}

void BM_CausalMapping(benchmark::State& state) {
  auto s = chain(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(total_causal_mapping(s));
}
BENCHMARK(BM_CausalMapping)->Arg(10)->Arg(100)->Arg(210);

void BM_FoldAndSynthesize(benchmark::State& state) {
  auto s = chain(static_cast<int>(state.range(0)));
  auto sigma = encode_fds(s, total_causal_mapping(s));
  for (auto _ : state) benchmark::DoNotOptimize(synthesize_4c(fold_fds(sigma), 1));
}
BENCHMARK(BM_FoldAndSynthesize)->Arg(10)->Arg(50);

void BM_Conf(benchmark::State& state) {
  std::mt19937 rng(7);
  WorldTable w;
  const int nv = static_cast<int>(state.range(0));
  for (int i = 0; i < nv; ++i) w.add_variable("v" + std::to_string(i), std::vector<double>{.2, .3, .5});
  std::vector<UTuple> tuples;
  for (int t = 0; t < 64; ++t) {
    Condition c;
    for (int i = 0; i < nv; ++i) {
      if (rng() % 2) c.push_back({"v" + std::to_string(i), static_cast<int>(rng() % 3) + 1});
    }
    tuples.push_back({c, Row{std::int64_t{static_cast<int>(rng() % 8)}}});
  }
  for (auto _ : state) benchmark::DoNotOptimize(conf(tuples, w));
}
BENCHMARK(BM_Conf)->Arg(4)->Arg(8);

void BM_Simulate(benchmark::State& state) {
  sim::OdeModel m{"lotka_volterra",
                  {{"x0", 30}, {"y0", 4}, {"b", .397}, {"p", .018}, {"d", .786}, {"r", .023}},
                  {1900, 1920, 1, std::nullopt},
                  2,
                  3};
  for (auto _ : state) benchmark::DoNotOptimize(sim::simulate(m));
}
BENCHMARK(BM_Simulate);

void BM_Posterior(benchmark::State& state) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0, 100);
  std::vector<double> ys(21);
  for (auto& y : ys) y = u(rng);
  std::vector<TrialEvidence> trials(static_cast<std::size_t>(state.range(0)));
  for (auto& t : trials) {
    t.prior = 1.0 / static_cast<double>(trials.size());
    for (double y : ys) t.predictions.push_back(y + u(rng) / 10);
  }
  for (auto _ : state) benchmark::DoNotOptimize(posterior(trials, ys, 10));
}
BENCHMARK(BM_Posterior)->Arg(10)->Arg(1000);

}  // namespace
BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "nsbox/blind_steering.hpp"
#include "nsbox/decomposition.hpp"
#include "nsbox/simulation.hpp"
#include "nsbox/steering.hpp"

using namespace nsbox;

namespace {

NonlocalEnsemble mixed_ensemble() {
  std::vector<NonlocalEnsemble::ProductMember> products;
  std::vector<NonlocalEnsemble::PRMember> prs;
  for (int i = 0; i < 16; ++i)
    products.push_back({Prob(i + 1, 500), SBox::from_index(i / 4), SBox::from_index(i % 4)});
  Prob rest = 1;
  for (const auto& p : products) rest -= p.weight;
  for (int i = 0; i < 8; ++i) prs.push_back({rest / 8, PRBox::from_index(i)});
  return NonlocalEnsemble(products, prs);
}

void BM_Decompose(benchmark::State& state) {
  const auto box = mix_nonlocal(mixed_ensemble());
  for (auto _ : state) benchmark::DoNotOptimize(decompose(box));
}
BENCHMARK(BM_Decompose)->Unit(benchmark::kMillisecond);

void BM_IsLocal(benchmark::State& state) {
  const auto box = mix_nonlocal(mixed_ensemble());
  for (auto _ : state) benchmark::DoNotOptimize(is_local(box));
}
BENCHMARK(BM_IsLocal)->Unit(benchmark::kMillisecond);

void BM_ConstructSteeringState(benchmark::State& state) {
  const int nx = static_cast<int>(state.range(0));
  const auto boxes = enumerate_det_boxes(nx, 2);
  std::vector<Ensemble::Member> uniform, pair;
  for (const auto& b : boxes) uniform.push_back({Prob(1, static_cast<long>(boxes.size())), b});
  // Constant-0 and constant-1 strategies mix to the same uniform box.
  pair.push_back({Prob(1, 2), boxes.front()});
  pair.push_back({Prob(1, 2), boxes.back()});
  const std::vector<Ensemble> es{Ensemble(uniform), Ensemble(pair)};
  for (auto _ : state) {
    auto s = construct_steering_state(es);
    benchmark::DoNotOptimize(verify_steering_state(s));
  }
}
BENCHMARK(BM_ConstructSteeringState)->Arg(2)->Arg(3)->Arg(4)->Unit(benchmark::kMicrosecond);

void BM_PlanBlindSteering(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(plan_blind_steering({Prob(1, 4), Prob(1, 2)}));
}
BENCHMARK(BM_PlanBlindSteering)->Unit(benchmark::kMicrosecond);

void BM_RunProtocol(benchmark::State& state) {
  const auto ensemble = build_nonlocal_ensemble(solve_constraints({Prob(1, 4), Prob(1, 2)}));
  SimulationOptions opts;
  opts.rounds = 100000;
  opts.seed = 1;
  opts.threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_protocol(ensemble, opts));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(opts.rounds));
}
BENCHMARK(BM_RunProtocol)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

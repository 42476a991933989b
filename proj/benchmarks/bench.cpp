#include <benchmark/benchmark.h>

#include "cfforge/catalog.hpp"

using namespace cf;

static void BM_ConvolveFgsw(benchmark::State& st) {
    const auto T = fgsw();
    for (auto _ : st) {
        FinMeasure m = T.kappa(1);
        for (int n = 2; n <= st.range(0); ++n) m = convolve(m, T.kappa(n));
        benchmark::DoNotOptimize(m.size());
    }
}
BENCHMARK(BM_ConvolveFgsw)->DenseRange(4, 8, 2);

static void BM_CosetTableHeis(benchmark::State& st) {
    const auto H = GroupCtx::heisenberg();
    const int64_t m = int64_t(1) << st.range(0);
    for (auto _ : st) benchmark::DoNotOptimize(CosetSpace(Subgroup::heis_congruence(H, m, m, m)).size());
}
BENCHMARK(BM_CosetTableHeis)->DenseRange(1, 3);

static void BM_NormalCore(benchmark::State& st) {
    const auto H = GroupCtx::heisenberg();
    const int64_t m = int64_t(1) << st.range(0);
    for (auto _ : st) benchmark::DoNotOptimize(normal_core(Subgroup::heis_congruence(H, m / 2, m, m)).index());
}
BENCHMARK(BM_NormalCore)->DenseRange(1, 3);

static void BM_ValidateFgsw(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(validate_params(fgsw(), static_cast<int>(st.range(0))).ok);
}
BENCHMARK(BM_ValidateFgsw)->DenseRange(6, 10, 2);

static void BM_FolnerHeis(benchmark::State& st) {
    const auto T = heisenberg_rank_one();
    for (auto _ : st) benchmark::DoNotOptimize(folner_defect(T, Element{1, 0, 0}, static_cast<int>(st.range(0))));
}
BENCHMARK(BM_FolnerHeis)->DenseRange(1, 3);

static void BM_FactorScanP3(benchmark::State& st) {
    const auto T = fgsw();
    const auto G = Subgroup::modulus(GroupCtx::integers(), 3);
    ScanOptions o;
    o.max_depth = static_cast<int>(st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(finite_factor_scan(T, G, o).positive);
}
BENCHMARK(BM_FactorScanP3)->DenseRange(6, 10, 2);

static void BM_RankOneCoverHeis(benchmark::State& st) {
    const auto spec = heisenberg_2adic_chain();
    for (auto _ : st) benchmark::DoNotOptimize(rank_one_cover(spec, static_cast<int>(st.range(0))).N);
}
BENCHMARK(BM_RankOneCoverHeis)->DenseRange(2, 3);

BENCHMARK_MAIN();

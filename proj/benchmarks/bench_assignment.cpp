#include <random>

#include <benchmark/benchmark.h>

#include "mods/assignment.hpp"

namespace {

mods::assign::CostMatrix random_costs(std::size_t m, std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    mods::assign::CostMatrix c(m, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) c(i, j) = u(rng);
    return c;
}

void BM_SolveSquare(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto c = random_costs(n, n, 1);
    for (auto _ : state) benchmark::DoNotOptimize(mods::assign::solve(c));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SolveSquare)->RangeMultiplier(2)->Range(4, 128)->Complexity(benchmark::oNCubed);

// Region-sized problems: a 3-line window holds roughly 10-25 content words.
void BM_SolveRectangular(benchmark::State& state)
{
    const auto c = random_costs(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)), 2);
    for (auto _ : state) benchmark::DoNotOptimize(mods::assign::solve(c));
}
BENCHMARK(BM_SolveRectangular)->Args({12, 20})->Args({20, 12})->Args({7, 25});

}  // namespace

#include <random>
#include <string>

#include <benchmark/benchmark.h>

#include "mods/ann_index.hpp"

namespace {

std::vector<float> random_vector(std::mt19937_64& rng, std::size_t dim)
{
    std::normal_distribution<float> g;
    std::vector<float> v(dim);
    for (auto& x : v) x = g(rng);
    return v;
}

std::vector<mods::ann::VectorIndex::Item> random_items(std::size_t n, std::size_t dim, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::vector<mods::ann::VectorIndex::Item> items;
    for (std::size_t i = 0; i < n; ++i) items.emplace_back("w" + std::to_string(i), random_vector(rng, dim));
    return items;
}

void BM_Build(benchmark::State& state)
{
    const auto items = random_items(static_cast<std::size_t>(state.range(0)), 64, 1);
    for (auto _ : state) benchmark::DoNotOptimize(mods::ann::VectorIndex::build(items, mods::ann::Mode::kdtree));
}
BENCHMARK(BM_Build)->Arg(1000)->Arg(10000);

template <mods::ann::Mode M>
void BM_Query(benchmark::State& state)
{
    const auto dim = static_cast<std::size_t>(state.range(1));
    const auto index = mods::ann::VectorIndex::build(random_items(static_cast<std::size_t>(state.range(0)), dim, 2), M);
    std::mt19937_64 rng(3);
    std::vector<std::vector<float>> queries;
    for (int i = 0; i < 64; ++i) queries.push_back(random_vector(rng, dim));
    std::size_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(index.query_knn(queries[i++ % queries.size()], 1));
}
BENCHMARK(BM_Query<mods::ann::Mode::exact>)->Args({1000, 64})->Args({1000, 1024});
BENCHMARK(BM_Query<mods::ann::Mode::kdtree>)->Args({1000, 64})->Args({1000, 1024})->Args({10000, 64});

}  // namespace

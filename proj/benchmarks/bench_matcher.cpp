#include <map>

#include <benchmark/benchmark.h>

#include "mods/fixtures.hpp"
#include "mods/matcher.hpp"

namespace {

struct Corpus {
    mods::eval::Fixture fx;
    std::vector<mods::match::PreparedDocument> docs;

    explicit Corpus(std::size_t tokens)
    {
        mods::eval::FixtureSpec spec;
        spec.num_sources = 2;
        spec.near_copy = spec.light = spec.heavy = spec.none = 2;
        spec.tokens_per_source = tokens;
        fx = mods::eval::gen_fixtures(spec);
        for (const auto& d : fx.manifest.documents) docs.push_back(mods::match::prepare(d, fx.store, {}));
    }
};

const Corpus& corpus(std::size_t tokens)
{
    static std::map<std::size_t, Corpus> cache;
    auto it = cache.find(tokens);
    if (it == cache.end()) it = cache.emplace(tokens, Corpus(tokens)).first;
    return it->second;
}

void BM_ModsScore(benchmark::State& state)
{
    const auto& c = corpus(static_cast<std::size_t>(state.range(0)));
    const mods::match::MatchConfig cfg;
    for (auto _ : state) benchmark::DoNotOptimize(mods::match::mods_score(c.docs[0], c.docs[1], cfg));
    state.counters["words"] = static_cast<double>(c.docs[0].size());
}
BENCHMARK(BM_ModsScore)->Arg(60)->Arg(120)->Arg(240)->Unit(benchmark::kMillisecond);

void BM_SwmScore(benchmark::State& state)
{
    const auto& c = corpus(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(mods::match::swm_score(c.docs[0], c.docs[1]));
}
BENCHMARK(BM_SwmScore)->Arg(120)->Unit(benchmark::kMillisecond);

void BM_Prepare(benchmark::State& state)
{
    const auto& c = corpus(120);
    for (auto _ : state) benchmark::DoNotOptimize(mods::match::prepare(c.fx.manifest.documents[0], c.fx.store, {}));
}
BENCHMARK(BM_Prepare)->Unit(benchmark::kMillisecond);

void BM_RankCorpus(benchmark::State& state)
{
    const auto& c = corpus(120);
    const mods::match::MatchConfig cfg;
    for (auto _ : state)
        benchmark::DoNotOptimize(mods::match::rank_prepared(c.docs[0], c.docs, cfg, mods::match::Metric::mods,
                                                            static_cast<unsigned>(state.range(0))));
}
BENCHMARK(BM_RankCorpus)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

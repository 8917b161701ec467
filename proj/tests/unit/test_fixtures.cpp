#include <doctest.h>

#include <map>
#include <set>

#include "mods/evaluation.hpp"
#include "mods/fixtures.hpp"
#include "mods/matcher.hpp"
#include "test_support.hpp"

using namespace mods;
using namespace mods::eval;

namespace {

FixtureSpec small_spec()
{
    FixtureSpec s;
    s.num_sources = 2;
    s.tokens_per_source = 60;
    s.near_copy = 2;
    s.light = 1;
    s.heavy = 1;
    s.none = 3;
    s.dimension = 128;
    return s;
}

std::vector<std::string> labels(const DocumentRecord& d)
{
    std::vector<std::string> out;
    for (const auto& w : d.words) out.push_back(*w.label);
    return out;
}

}  // namespace

TEST_SUITE("fixtures") {

TEST_CASE("near copy against its source at noise 0 scores 1 when lines are not re-flowed")
{
    FixtureSpec spec = small_spec();
    spec.noise = 0.0;
    spec.reflow = false;
    const auto fx = gen_fixtures(spec);
    const auto& src = *fx.manifest.find("src0");
    const auto& copy = *fx.manifest.find("src0_near_copy0");
    CHECK(labels(src) == labels(copy));
    match::MatchConfig cfg;
    CHECK(match::mods_score(src, copy, fx.store, cfg).mods_norm == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("near copy with re-flowed lines keeps the verbatim token sequence")
{
    FixtureSpec spec = small_spec();
    spec.noise = 0.0;
    const auto fx = gen_fixtures(spec);
    const auto& src = *fx.manifest.find("src1");
    for (const char* id : {"src1_near_copy0", "src1_near_copy1"}) {
        const auto& copy = *fx.manifest.find(id);
        CHECK(labels(src) == labels(copy));
        const double s = match::mods_score(src, copy, fx.store, {}).mods_norm;
        CHECK(s > 0.7);
        CHECK(s <= 1.0);
    }
}

TEST_CASE("grade histogram matches the requested counts")
{
    const FixtureSpec spec = small_spec();
    const auto fx = gen_fixtures(spec);
    const std::size_t docs = spec.num_sources * (1 + spec.near_copy + spec.light + spec.heavy + spec.none);
    CHECK(fx.manifest.documents.size() == docs);
    std::map<int, std::size_t> hist;
    for (const auto& g : fx.truth) ++hist[g.grade];
    CHECK(hist[3] == spec.num_sources * spec.near_copy);
    CHECK(hist[2] == spec.num_sources * spec.light);
    CHECK(hist[1] == spec.num_sources * spec.heavy);
    CHECK(fx.truth.size() == spec.num_sources * (docs - 1));
    CHECK(fx.source_ids == std::vector<std::string>{"src0", "src1"});
    for (const auto& g : fx.truth)
        if (g.grade > 0) CHECK(g.target_doc.starts_with(g.query_doc + "_"));
}

TEST_CASE("seeded generation is byte-identical; other seeds differ")
{
    const auto a = gen_fixtures(small_spec());
    const auto b = gen_fixtures(small_spec());
    CHECK(serialize_manifest(a.manifest) == serialize_manifest(b.manifest));
    CHECK(encode_embeddings(a.store) == encode_embeddings(b.store));
    CHECK(serialize_truth(a.truth) == serialize_truth(b.truth));
    FixtureSpec other = small_spec();
    other.seed = 2;
    CHECK(serialize_manifest(gen_fixtures(other).manifest) != serialize_manifest(a.manifest));
}

TEST_CASE("degradation knobs")
{
    FixtureSpec spec = small_spec();
    spec.light = 1;
    spec.light_replace = 0.10;
    const auto fx = gen_fixtures(spec);
    const auto src = labels(*fx.manifest.find("src0"));
    const auto light = labels(*fx.manifest.find("src0_light0"));
    REQUIRE(src.size() == light.size());
    std::size_t changed = 0;
    for (std::size_t i = 0; i < src.size(); ++i) changed += src[i] != light[i];
    CHECK(changed == static_cast<std::size_t>(std::lround(0.10 * static_cast<double>(src.size()))));

    const auto heavy = labels(*fx.manifest.find("src0_heavy0"));
    CHECK(heavy.size() == src.size());
    CHECK(heavy != src);
    CHECK(std::multiset<std::string>(heavy.begin(), heavy.end()) != std::multiset<std::string>(src.begin(), src.end()));
}

TEST_CASE("explicit source texts")
{
    FixtureSpec spec;
    spec.sources = {"The quick brown fox jumps over the lazy dog. It was quick!", "Another text about cats and mats."};
    spec.near_copy = 1;
    spec.light = spec.heavy = spec.none = 1;
    spec.dimension = 64;
    const auto fx = gen_fixtures(spec);
    CHECK(labels(*fx.manifest.find("src0")) ==
          std::vector<std::string>{"the", "quick", "brown", "fox", "jumps", "over", "the", "lazy", "dog", "it", "was",
                                   "quick"});
    CHECK(fx.manifest.params.at("light_replace") == "0.1");
}

TEST_CASE("degenerate specs are rejected")
{
    FixtureSpec spec;
    spec.sources = {"   ...  "};
    CHECK_THROWS_AS(gen_fixtures(spec), std::invalid_argument);
    spec = {};
    spec.num_sources = 0;
    CHECK_THROWS_AS(gen_fixtures(spec), std::invalid_argument);
    spec = {};
    spec.light_replace = 1.5;
    CHECK_THROWS_AS(gen_fixtures(spec), std::invalid_argument);
}

TEST_CASE("spec parsing")
{
    const auto s = parse_fixture_spec(R"({"num_sources": 3, "noise": 0.2, "reflow": false, "seed": 9})");
    CHECK(s.num_sources == 3);
    CHECK(s.noise == 0.2);
    CHECK_FALSE(s.reflow);
    CHECK(s.seed == 9);
    CHECK_THROWS_WITH_AS(parse_fixture_spec(R"({"bogus": 1})"), doctest::Contains("bogus"), DataError);
    CHECK_THROWS_AS(parse_fixture_spec("[1]"), DataError);
    CHECK_THROWS_AS(parse_fixture_spec(R"({"noise": "x"})"), DataError);
}

TEST_CASE("layout")
{
    const auto d = layout_document("doc", {"a", "bb", "ccc", "dd", "e"}, {2, 0}, 1);
    REQUIRE(d.words.size() == 5);
    CHECK(d.words[0].word_id == "doc/w0000");
    CHECK(d.words[2].line_index == 1);
    CHECK(d.words[4].line_index == 2);
    CHECK(d.words[1].bbox.x > d.words[0].bbox.right());
}

TEST_CASE("truth file roundtrip and errors")
{
    const std::vector<GradeEntry> t{{"q", "a", 3}, {"q", "b", 0}};
    CHECK(parse_truth(serialize_truth(t)) == t);
    CHECK_THROWS_WITH_AS(parse_truth("{\"query_doc\":\"q\"}\n"), doctest::Contains("line 1"), DataError);
    CHECK_THROWS_AS(parse_truth(R"({"query_doc":"q","target_doc":"a","grade":-1})"), DataError);
    mods::testing::TempDir tmp;
    write_truth(t, tmp / "t.jsonl");
    CHECK(read_truth(tmp / "t.jsonl") == t);
}

TEST_CASE("tokenize")
{
    CHECK(tokenize("Don't STOP, me-now!") == std::vector<std::string>{"don't", "stop", "me", "now"});
    CHECK(tokenize("").empty());
}

}  // TEST_SUITE

TEST_SUITE("evaluation") {

TEST_CASE("docsim report on hand-made scores")
{
    using match::ScoreLine;
    const std::vector<ScoreLine> scores{
        {"q", "a", 0.1, 0, 0.9}, {"q", "b", 0.5, 0, 0.5}, {"q", "c", 0.3, 0, 0.7}, {"q", "q", 0, 0, 1.0}};
    const std::vector<GradeEntry> truth{{"q", "a", 3}, {"q", "b", 0}, {"q", "c", 2}};
    const auto r = evaluate_docsim(scores, truth);
    CHECK(r.p == 3);
    CHECK(r.pairs == 3);
    CHECK(r.mods.mean_ndcg == doctest::Approx(1.0));
    CHECK(r.mods.auc == 1.0);
    CHECK(r.swm.auc == 1.0);

    // mods_norm order a, c, b is ideal; swm order a, c, b too. Swap c and b for mods only.
    std::vector<ScoreLine> swapped = scores;
    swapped[1].mods_norm = 0.8;
    const auto s = evaluate_docsim(swapped, truth);
    const std::vector<int> ranked{3, 0, 2};
    CHECK(s.mods.mean_ndcg == doctest::Approx(ndcg_at(ranked, 3)));
    CHECK(s.mods.auc == 0.5);
    CHECK(s.swm.mean_ndcg == doctest::Approx(1.0));
    CHECK(evaluate_docsim(scores, truth, 1).p == 1);
}

TEST_CASE("word spotting mAP")
{
    CorpusManifest m;
    m.documents.push_back(mods::testing::make_document("d", {{"cat", "cats", "dog", "the", "the"}}));
    EmbeddingStore s(64);
    for (const auto& w : m.documents[0].words)
        s.add({w.word_id, std::nullopt, desc::synth_embed(*w.label, desc::stable_hash(w.word_id), 0.1, 64)});

    SpotConfig cfg;
    auto exact = evaluate_word_spotting(m, s, cfg);
    // cat, cats and dog have no other copy; stopwords are not queried.
    CHECK(exact.evaluated == 0);
    CHECK(exact.skipped == 3);

    cfg.inexact = true;
    auto inexact = evaluate_word_spotting(m, s, cfg);
    CHECK(inexact.evaluated == 2);
    CHECK(inexact.skipped == 1);
    CHECK(inexact.map > 0.0);

    cfg = {};
    cfg.include_stopword_queries = true;
    auto with_stop = evaluate_word_spotting(m, s, cfg);
    CHECK(with_stop.evaluated == 2);
    CHECK(with_stop.map == doctest::Approx(1.0));
}

}  // TEST_SUITE

#include <doctest.h>

#include <cmath>
#include <random>

#include "mods/doc_model.hpp"
#include "test_support.hpp"

using namespace mods;
using mods::testing::TempDir;

namespace {

WordBox word(std::string id, int x, int line, std::optional<std::string> label = std::nullopt)
{
    return WordBox{std::move(id), {x, 10 + 40 * line, 30, 20}, line, std::move(label), std::nullopt};
}

CorpusManifest two_docs()
{
    CorpusManifest m;
    m.name = "tiny";
    m.embedding_dim = 2;
    m.params["seed"] = "3";
    DocumentRecord a{"a", "pages/a.png", {word("a/0", 5, 0, "the"), word("a/1", 50, 0, "cat")}};
    a.words[1].stopword_prob = 0.25;
    DocumentRecord b{"b", std::nullopt, {word("b/0", 5, 0), word("b/1", 5, 1, "sat")}};
    m.documents = {a, b};
    return m;
}

std::string le32(std::uint32_t v)
{
    std::string s;
    for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    return s;
}

std::string f32(float f)
{
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    return le32(bits);
}

}  // namespace

TEST_SUITE("doc_model") {

TEST_CASE("empty corpus file gives zero documents")
{
    CHECK(parse_manifest("").documents.empty());
    TempDir tmp;
    mods::testing::write_file(tmp / "empty.jsonl", "");
    CHECK(read_manifest(tmp / "empty.jsonl").documents.empty());
}

TEST_CASE("manifest roundtrip is field-for-field equal")
{
    const CorpusManifest m = two_docs();
    TempDir tmp;
    write_manifest(m, tmp / "m.jsonl");
    CHECK(read_manifest(tmp / "m.jsonl") == m);
}

TEST_CASE("one-document one-word manifest roundtrips")
{
    CorpusManifest m;
    m.documents.push_back({"only", std::nullopt, {word("only/w", 1, 0, "word")}});
    CHECK(parse_manifest(serialize_manifest(m)) == m);
}

TEST_CASE("zero-width box is rejected naming the word")
{
    CorpusManifest m = two_docs();
    m.documents[0].words[1].bbox.w = 0;
    CHECK_THROWS_WITH_AS(validate(m), doctest::Contains("a/1"), DataError);

    const std::string line = R"({"doc_id":"d","page_image":null,"words":[{"word_id":"d/bad","x":0,"y":0,"w":0,"h":4,"line":0}]})";
    CHECK_THROWS_WITH_AS(parse_manifest(line), doctest::Contains("d/bad"), DataError);
}

TEST_CASE("duplicate doc_id is rejected before writing")
{
    CorpusManifest m = two_docs();
    m.documents[1].doc_id = "a";
    for (auto& w : m.documents[1].words) w.word_id = "x" + w.word_id;
    TempDir tmp;
    CHECK_THROWS_WITH_AS(write_manifest(m, tmp / "m.jsonl"), doctest::Contains("'a'"), DataError);
    CHECK_FALSE(std::filesystem::exists(tmp / "m.jsonl"));
}

TEST_CASE("serialization is byte-deterministic")
{
    TempDir tmp;
    write_manifest(two_docs(), tmp / "1.jsonl");
    write_manifest(two_docs(), tmp / "2.jsonl");
    CHECK(mods::testing::read_file(tmp / "1.jsonl") == mods::testing::read_file(tmp / "2.jsonl"));
}

TEST_CASE("other invariants: reading order, word id uniqueness, probability range")
{
    CorpusManifest m = two_docs();
    std::swap(m.documents[0].words[0], m.documents[0].words[1]);
    CHECK_THROWS_AS(validate(m), DataError);

    m = two_docs();
    m.documents[1].words[0].word_id = "a/0";
    CHECK_THROWS_WITH_AS(validate(m), doctest::Contains("a/0"), DataError);

    m = two_docs();
    m.documents[0].words[0].stopword_prob = 1.5;
    CHECK_THROWS_AS(validate(m), DataError);

    m = two_docs();
    m.documents[0].words[0].line_index = -1;
    CHECK_THROWS_AS(validate(m), DataError);
}

TEST_CASE("labels are stored case-folded")
{
    CorpusManifest m;
    m.documents.push_back({"d", std::nullopt, {word("d/0", 0, 0, "The")}});
    const auto back = parse_manifest(serialize_manifest(m));
    CHECK(*back.documents[0].words[0].label == "the");
}

TEST_CASE("malformed lines report the line number")
{
    CHECK_THROWS_WITH_AS(parse_manifest("{\"doc_id\":\"a\",\"words\":[]}\n{oops"), doctest::Contains("line 2"),
                         DataError);
    CHECK_THROWS_WITH_AS(parse_manifest("{\"doc_id\":\"a\"}"), doctest::Contains("words"), DataError);
}

TEST_CASE("reading order sort")
{
    std::vector<WordBox> w{word("c", 50, 1), word("a", 90, 0), word("b", 10, 1), word("d", 5, 0)};
    sort_reading_order(w);
    CHECK(w[0].word_id == "d");
    CHECK(w[1].word_id == "a");
    CHECK(w[2].word_id == "b");
    CHECK(w[3].word_id == "c");
}

TEST_CASE("iou and unite")
{
    CHECK(iou({0, 0, 10, 10}, {0, 0, 10, 10}) == 1.0);
    CHECK(iou({0, 0, 10, 10}, {5, 0, 10, 10}) == doctest::Approx(50.0 / 150.0));
    CHECK(iou({0, 0, 10, 10}, {20, 20, 5, 5}) == 0.0);
    CHECK(unite({0, 0, 10, 10}, {20, 5, 5, 10}) == BBox{0, 0, 25, 15});
}

TEST_CASE("handcrafted MODSEMB1 file decodes exactly")
{
    std::string bytes = "MODSEMB1" + le32(1) + le32(2);
    bytes += std::string("\x02\x00", 2) + "w0";
    bytes += f32(std::nanf(""));
    bytes += f32(1.0f) + f32(0.0f);
    // Independently checked layout: 16 header + 2 + 2 + 4 + 8 bytes.
    REQUIRE(bytes.size() == 32);
    REQUIRE(static_cast<unsigned char>(bytes[24]) == 0x00);
    REQUIRE(static_cast<unsigned char>(bytes[27]) == 0x3F);  // 1.0f = 0x3F800000

    const EmbeddingStore s = decode_embeddings(bytes);
    REQUIRE(s.size() == 1);
    CHECK(s.dimension() == 2);
    const auto& r = s.records()[0];
    CHECK(r.word_id == "w0");
    CHECK_FALSE(r.stopword_prob.has_value());
    CHECK(r.vector == std::vector<float>{1.0f, 0.0f});
    CHECK(encode_embeddings(s) == bytes);
}

TEST_CASE("embedding roundtrip is bitwise")
{
    std::mt19937_64 rng(5);
    EmbeddingStore s(7);
    for (int i = 0; i < 20; ++i) {
        std::vector<float> v(7);
        for (auto& x : v) x = std::uniform_real_distribution<float>(-3, 3)(rng);
        v[0] = -0.0f;
        std::optional<float> p;
        if (i % 3 == 0) p = static_cast<float>(i) / 20.0f;
        s.add({"w" + std::to_string(i), p, v});
    }
    TempDir tmp;
    write_embeddings(s, tmp / "e.bin");
    const auto back = read_embeddings(tmp / "e.bin");
    REQUIRE(back.size() == s.size());
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(back.records()[i] == s.records()[i]);
    CHECK(std::signbit(back.records()[0].vector[0]));
}

TEST_CASE("truncated, bad magic and trailing bytes")
{
    EmbeddingStore s(2);
    s.add({"w0", std::nullopt, {1, 0}});
    std::string bytes = encode_embeddings(s);
    std::string two = bytes;
    two[8] = 2;  // count = 2 but one record
    CHECK_THROWS_WITH_AS(decode_embeddings(two), doctest::Contains("truncated"), DataError);

    std::string magic = bytes;
    magic[0] = 'X';
    CHECK_THROWS_WITH_AS(decode_embeddings(magic), doctest::Contains("magic"), DataError);

    CHECK_THROWS_WITH_AS(decode_embeddings(bytes + "xyz"), doctest::Contains("dimension mismatch"), DataError);
    CHECK_THROWS_AS(decode_embeddings("MODS"), DataError);
}

TEST_CASE("empty store is a header-only file; sizes follow the record formula")
{
    CHECK(encode_embeddings(EmbeddingStore(4)).size() == kEmbeddingHeaderSize);

    EmbeddingStore s(4);
    for (const char* id : {"a", "bb", "ccc"}) s.add({id, 0.5f, {1, 2, 3, 4}});
    // per record: 2 (length) + id bytes + 4 (prob) + 4·d
    const std::size_t expected = 16 + (2 + 1 + 4 + 16) + (2 + 2 + 4 + 16) + (2 + 3 + 4 + 16);
    CHECK(encode_embeddings(s).size() == expected);
}

TEST_CASE("mixed dimensions are rejected before writing")
{
    EmbeddingStore s(3);
    s.add({"a", std::nullopt, {1, 2, 3}});
    CHECK_THROWS_AS(s.add({"b", std::nullopt, {1, 2}}), DataError);
    CHECK_THROWS_AS(s.add({"a", std::nullopt, {1, 2, 3}}), DataError);
    CHECK(s.size() == 1);
}

TEST_CASE("validate_against resolves every embedding to one word")
{
    const CorpusManifest m = two_docs();
    EmbeddingStore s(2);
    s.add({"a/0", std::nullopt, {1, 0}});
    CHECK_NOTHROW(validate_against(m, s));
    s.add({"ghost", std::nullopt, {0, 1}});
    CHECK_THROWS_WITH_AS(validate_against(m, s), doctest::Contains("ghost"), DataError);

    EmbeddingStore wrong(3);
    CHECK_THROWS_AS(validate_against(m, wrong), DataError);
}

TEST_CASE("property: random manifests roundtrip")
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        CorpusManifest m;
        m.name = "r" + std::to_string(trial);
        const int docs = static_cast<int>(rng() % 4);
        for (int d = 0; d < docs; ++d) {
            DocumentRecord doc{"d" + std::to_string(d), std::nullopt, {}};
            if (rng() % 2) doc.page_image = "p" + std::to_string(d) + ".png";
            int x = 0, line = 0;
            const int n = static_cast<int>(rng() % 6);
            for (int i = 0; i < n; ++i) {
                if (rng() % 3 == 0) {
                    ++line;
                    x = 0;
                }
                x += 1 + static_cast<int>(rng() % 40);
                WordBox w = word(doc.doc_id + "/" + std::to_string(i), x, line);
                if (rng() % 2) w.label = "l" + std::to_string(rng() % 10);
                if (rng() % 2) w.stopword_prob = static_cast<double>(rng() % 1000) / 999.0;
                doc.words.push_back(w);
            }
            m.documents.push_back(doc);
        }
        CHECK(parse_manifest(serialize_manifest(m)) == m);
    }
}

}  // TEST_SUITE

#include "mods/fixtures.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <optional>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "mods/descriptor.hpp"

namespace mods::eval {

std::string_view degree_name(Degree d)
{
    switch (d) {
    case Degree::near_copy: return "near_copy";
    case Degree::light: return "light";
    case Degree::heavy: return "heavy";
    case Degree::none: return "none";
    }
    return "?";
}

void FixtureSpec::validate() const
{
    if (sources.empty() && num_sources == 0) throw std::invalid_argument("fixture spec has no sources");
    for (std::size_t i = 0; i < sources.size(); ++i)
        if (tokenize(sources[i]).empty())
            throw std::invalid_argument("fixture source " + std::to_string(i) + " is empty");
    if (sources.empty() && tokens_per_source == 0)
        throw std::invalid_argument("tokens_per_source must be ≥ 1");
    if (noise < 0.0) throw std::invalid_argument("noise must be ≥ 0");
    if (dimension == 0) throw std::invalid_argument("dimension must be ≥ 1");
    if (words_per_line < 2) throw std::invalid_argument("words_per_line must be ≥ 2");
    for (double r : {light_replace, heavy_replace, none_topic_share})
        if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("fixture rates must be in [0, 1]");
}

std::vector<std::string> tokenize(std::string_view text)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        const char l = (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
        if ((l >= 'a' && l <= 'z') || (l == '\'' && !cur.empty())) {
            cur += l;
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

namespace {

using Sentence = std::vector<std::string>;

// Portable draws; the std distributions are not bit-specified across libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
    template <typename T>
    void shuffle(std::vector<T>& v)
    {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
    }

private:
    std::mt19937_64 gen_;
};

std::uint64_t mix(std::uint64_t a, std::uint64_t b)
{
    std::uint64_t x = a ^ (b + 0x9E3779B97F4A7C15ULL + (a << 6) + (a >> 2));
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::array<std::string_view, 20> kFunctionWords{
    "the", "of", "and", "to", "a", "in", "is", "that", "for", "it",
    "with", "as", "was", "on", "by", "this", "are", "be", "from", "at"};

class WordFactory {
public:
    explicit WordFactory(std::uint64_t seed) : rng_(seed) {}

    std::string fresh()
    {
        static constexpr std::string_view onset = "bcdfghklmnprstvz";
        static constexpr std::string_view vowel = "aeiou";
        static constexpr std::string_view coda = "nrslt";
        for (;;) {
            std::string w;
            const std::size_t syllables = 2 + rng_.index(2);
            for (std::size_t s = 0; s < syllables; ++s) {
                w += onset[rng_.index(onset.size())];
                w += vowel[rng_.index(vowel.size())];
                if (rng_.uniform() < 0.3) w += coda[rng_.index(coda.size())];
            }
            if (!desc::default_lexicon().contains(w) && used_.insert(w).second) return w;
        }
    }

    void reserve(const std::string& w) { used_.insert(w); }

private:
    Rng rng_;
    std::set<std::string> used_;
};

bool is_function_word(const std::string& w) { return desc::default_lexicon().contains(w); }

std::vector<Sentence> split_sentences(std::string_view text)
{
    std::vector<Sentence> out(1);
    std::string chunk;
    auto flush = [&] {
        for (auto& t : tokenize(chunk)) out.back().push_back(std::move(t));
        chunk.clear();
        if (!out.back().empty()) out.emplace_back();
    };
    for (char c : text) {
        if (c == '.' || c == '!' || c == '?') flush();
        else chunk += c;
    }
    flush();
    if (out.back().empty()) out.pop_back();
    return out;
}

// Picks a content word with a skew towards the head of the pool, so topic
// words repeat within a document.
const std::string& draw_topic(Rng& rng, const std::vector<std::string>& pool)
{
    const auto i = static_cast<std::size_t>(std::pow(rng.uniform(), 1.5) * static_cast<double>(pool.size()));
    return pool[std::min(i, pool.size() - 1)];
}

std::vector<Sentence> generate_text(Rng& rng, std::size_t tokens, const std::vector<std::string>& topic,
                                    const std::vector<std::string>* general, double topic_share)
{
    std::vector<Sentence> out;
    std::size_t total = 0;
    while (total < tokens) {
        Sentence s;
        const std::size_t len = std::min<std::size_t>(8 + rng.index(7), tokens - total);
        for (std::size_t i = 0; i < len; ++i) {
            if (rng.uniform() < 0.35)
                s.emplace_back(kFunctionWords[rng.index(kFunctionWords.size())]);
            else if (!general || rng.uniform() < topic_share)
                s.push_back(draw_topic(rng, topic));
            else
                s.push_back(draw_topic(rng, *general));
        }
        total += s.size();
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<std::string> flatten(const std::vector<Sentence>& sentences)
{
    std::vector<std::string> out;
    for (const auto& s : sentences) out.insert(out.end(), s.begin(), s.end());
    return out;
}

void replace_fraction(std::vector<std::string>& tokens, double fraction, Rng& rng, WordFactory& words)
{
    std::vector<std::size_t> content;
    for (std::size_t i = 0; i < tokens.size(); ++i)
        if (!is_function_word(tokens[i])) content.push_back(i);
    const auto wanted = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(tokens.size())));
    rng.shuffle(content);
    content.resize(std::min(wanted, content.size()));
    std::sort(content.begin(), content.end());
    for (std::size_t i : content) tokens[i] = words.fresh();
}

std::string number(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

}  // namespace

DocumentRecord layout_document(const std::string& doc_id, const std::vector<std::string>& labels,
                               const LayoutParams& params, std::uint64_t seed)
{
    Rng rng(seed);
    DocumentRecord doc;
    doc.doc_id = doc_id;
    int line = 0, x = params.margin, on_line = 0;
    auto line_capacity = [&] {
        const int j = params.line_jitter > 0
                          ? static_cast<int>(rng.index(static_cast<std::size_t>(2 * params.line_jitter + 1))) -
                                params.line_jitter
                          : 0;
        return std::max(1, params.words_per_line + j);
    };
    int capacity = line_capacity();
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (on_line == capacity) {
            ++line;
            x = params.margin;
            on_line = 0;
            capacity = line_capacity();
        }
        const int w = std::max(1, static_cast<int>(labels[i].size())) * params.char_width;
        char id[16];
        std::snprintf(id, sizeof id, "/w%04zu", i);
        doc.words.push_back(WordBox{doc_id + id,
                                    {x, params.margin + line * params.line_pitch, w, params.line_height},
                                    line,
                                    labels[i],
                                    std::nullopt});
        x += w + params.word_gap;
        ++on_line;
    }
    return doc;
}

Fixture gen_fixtures(const FixtureSpec& spec)
{
    spec.validate();
    Fixture fx;
    WordFactory words(mix(spec.seed, 0xF1F1));

    // Source texts and their topic pools.
    std::vector<std::vector<Sentence>> sources;
    std::vector<std::vector<std::string>> topics;
    if (!spec.sources.empty()) {
        for (const auto& text : spec.sources) {
            sources.push_back(split_sentences(text));
            std::vector<std::string> pool;
            for (const auto& t : flatten(sources.back())) {
                words.reserve(t);
                if (!is_function_word(t) && std::find(pool.begin(), pool.end(), t) == pool.end())
                    pool.push_back(t);
            }
            if (pool.empty()) pool.push_back(words.fresh());
            topics.push_back(std::move(pool));
        }
    } else {
        for (std::size_t s = 0; s < spec.num_sources; ++s) {
            std::vector<std::string> pool;
            for (int i = 0; i < 40; ++i) pool.push_back(words.fresh());
            Rng rng(mix(spec.seed, 100 + s));
            sources.push_back(generate_text(rng, spec.tokens_per_source, pool, nullptr, 1.0));
            topics.push_back(std::move(pool));
        }
    }
    std::vector<std::string> general;
    for (int i = 0; i < 400; ++i) general.push_back(words.fresh());

    struct Pending {
        std::string doc_id;
        std::vector<std::string> tokens;
        std::size_t source = 0;
        std::optional<Degree> degree;
    };
    std::vector<Pending> docs;

    const std::pair<Degree, std::size_t> plan[] = {{Degree::near_copy, spec.near_copy},
                                                    {Degree::light, spec.light},
                                                    {Degree::heavy, spec.heavy},
                                                    {Degree::none, spec.none}};
    for (std::size_t s = 0; s < sources.size(); ++s) {
        const std::string src_id = "src" + std::to_string(s);
        fx.source_ids.push_back(src_id);
        docs.push_back({src_id, flatten(sources[s]), s, std::nullopt});
        for (const auto& [degree, count] : plan) {
            for (std::size_t n = 0; n < count; ++n) {
                Rng rng(mix(mix(spec.seed, s), mix(static_cast<std::uint64_t>(degree), n)));
                std::vector<std::string> tokens;
                switch (degree) {
                case Degree::near_copy:
                    tokens = flatten(sources[s]);
                    break;
                case Degree::light:
                    tokens = flatten(sources[s]);
                    replace_fraction(tokens, spec.light_replace, rng, words);
                    break;
                case Degree::heavy: {
                    auto shuffled = sources[s];
                    rng.shuffle(shuffled);
                    tokens = flatten(shuffled);
                    replace_fraction(tokens, spec.heavy_replace, rng, words);
                    break;
                }
                case Degree::none:
                    tokens = flatten(generate_text(rng, flatten(sources[s]).size(), topics[s], &general,
                                                   spec.none_topic_share));
                    break;
                }
                docs.push_back({src_id + "_" + std::string(degree_name(degree)) + std::to_string(n),
                                std::move(tokens), s, degree});
            }
        }
    }

    fx.manifest.name = "docsim-synthetic";
    fx.manifest.embedding_dim = static_cast<std::uint32_t>(spec.dimension);
    auto& p = fx.manifest.params;
    p["seed"] = std::to_string(spec.seed);
    p["noise"] = number(spec.noise);
    p["words_per_line"] = std::to_string(spec.words_per_line);
    p["reflow"] = spec.reflow ? "true" : "false";
    p["light_replace"] = number(spec.light_replace);
    p["heavy_replace"] = number(spec.heavy_replace);
    p["none_topic_share"] = number(spec.none_topic_share);
    p["counts"] = "near_copy=" + std::to_string(spec.near_copy) + ",light=" + std::to_string(spec.light) +
                  ",heavy=" + std::to_string(spec.heavy) + ",none=" + std::to_string(spec.none);

    fx.store = EmbeddingStore(static_cast<std::uint32_t>(spec.dimension));
    for (const auto& d : docs) {
        const std::uint64_t writer = desc::writer_seed(spec.seed, d.doc_id);
        LayoutParams layout;
        layout.words_per_line = spec.words_per_line;
        if (spec.reflow && d.degree) {
            layout.words_per_line += static_cast<int>(writer % 3) - 1;
            layout.line_jitter = 1;
        }
        DocumentRecord rec = layout_document(d.doc_id, d.tokens, layout, mix(writer, 7));
        for (const auto& w : rec.words)
            fx.store.add({w.word_id, std::nullopt, desc::synth_embed(*w.label, writer, spec.noise, spec.dimension)});
        fx.manifest.documents.push_back(std::move(rec));
    }

    for (std::size_t s = 0; s < sources.size(); ++s)
        for (const auto& d : docs) {
            if (d.doc_id == fx.source_ids[s]) continue;
            const int grade = (d.degree && d.source == s) ? static_cast<int>(*d.degree) : 0;
            fx.truth.push_back({fx.source_ids[s], d.doc_id, grade});
        }
    validate(fx.manifest);
    return fx;
}

FixtureSpec parse_fixture_spec(std::string_view json_text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError(std::string("fixture spec: ") + e.what());
    }
    if (!j.is_object()) throw DataError("fixture spec must be a JSON object");
    FixtureSpec spec;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "sources") spec.sources = value.get<std::vector<std::string>>();
            else if (key == "num_sources") spec.num_sources = value.get<std::size_t>();
            else if (key == "tokens_per_source") spec.tokens_per_source = value.get<std::size_t>();
            else if (key == "near_copy") spec.near_copy = value.get<std::size_t>();
            else if (key == "light") spec.light = value.get<std::size_t>();
            else if (key == "heavy") spec.heavy = value.get<std::size_t>();
            else if (key == "none") spec.none = value.get<std::size_t>();
            else if (key == "seed") spec.seed = value.get<std::uint64_t>();
            else if (key == "noise") spec.noise = value.get<double>();
            else if (key == "dimension") spec.dimension = value.get<std::size_t>();
            else if (key == "words_per_line") spec.words_per_line = value.get<int>();
            else if (key == "reflow") spec.reflow = value.get<bool>();
            else if (key == "light_replace") spec.light_replace = value.get<double>();
            else if (key == "heavy_replace") spec.heavy_replace = value.get<double>();
            else if (key == "none_topic_share") spec.none_topic_share = value.get<double>();
            else throw DataError("fixture spec: unknown key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("fixture spec: ") + e.what());
    }
    return spec;
}

std::string serialize_truth(const std::vector<GradeEntry>& truth)
{
    std::string out;
    for (const auto& g : truth) {
        nlohmann::ordered_json j;
        j["query_doc"] = g.query_doc;
        j["target_doc"] = g.target_doc;
        j["grade"] = g.grade;
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::vector<GradeEntry> parse_truth(std::string_view text)
{
    std::vector<GradeEntry> out;
    std::size_t pos = 0, line_no = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        const std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            GradeEntry g{j.at("query_doc").get<std::string>(), j.at("target_doc").get<std::string>(),
                         j.at("grade").get<int>()};
            if (g.grade < 0) throw DataError("ground truth line " + std::to_string(line_no) + ": negative grade");
            out.push_back(std::move(g));
        } catch (const nlohmann::json::exception& e) {
            throw DataError("ground truth line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::vector<GradeEntry> read_truth(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read ground truth '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_truth(ss.str());
}

void write_truth(const std::vector<GradeEntry>& truth, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out << serialize_truth(truth);
}

}  // namespace mods::eval

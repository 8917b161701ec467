#include "mods/doc_model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace mods {

using nlohmann::json;

double iou(const BBox& a, const BBox& b)
{
    if (a.w <= 0 || a.h <= 0 || b.w <= 0 || b.h <= 0) return 0.0;
    const int ix = std::max(0, std::min(a.right(), b.right()) - std::max(a.x, b.x));
    const int iy = std::max(0, std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y));
    const double inter = static_cast<double>(ix) * iy;
    const double uni = static_cast<double>(a.w) * a.h + static_cast<double>(b.w) * b.h - inter;
    return uni > 0 ? inter / uni : 0.0;
}

BBox unite(const BBox& a, const BBox& b)
{
    const int x0 = std::min(a.x, b.x);
    const int y0 = std::min(a.y, b.y);
    const int x1 = std::max(a.right(), b.right());
    const int y1 = std::max(a.bottom(), b.bottom());
    return {x0, y0, x1 - x0, y1 - y0};
}

const DocumentRecord* CorpusManifest::find(std::string_view doc_id) const
{
    for (const auto& d : documents)
        if (d.doc_id == doc_id) return &d;
    return nullptr;
}

std::string fold_case(std::string_view s)
{
    std::string out(s);
    for (auto& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

void sort_reading_order(std::vector<WordBox>& words)
{
    std::stable_sort(words.begin(), words.end(), [](const WordBox& a, const WordBox& b) {
        if (a.line_index != b.line_index) return a.line_index < b.line_index;
        return a.bbox.x < b.bbox.x;
    });
}

void validate(const CorpusManifest& m)
{
    std::unordered_set<std::string> docs;
    std::unordered_set<std::string> words;
    for (const auto& d : m.documents) {
        if (d.doc_id.empty()) throw DataError("document with empty doc_id");
        if (!docs.insert(d.doc_id).second) throw DataError("duplicate doc_id '" + d.doc_id + "'");
        const WordBox* prev = nullptr;
        for (const auto& w : d.words) {
            const std::string where = "doc_id '" + d.doc_id + "' word_id '" + w.word_id + "'";
            if (w.word_id.empty()) throw DataError("empty word_id in doc_id '" + d.doc_id + "'");
            if (!words.insert(w.word_id).second) throw DataError("duplicate " + where);
            if (w.bbox.w <= 0 || w.bbox.h <= 0)
                throw DataError("degenerate bbox (w and h must be > 0) at " + where);
            if (w.line_index < 0) throw DataError("negative line index at " + where);
            if (w.stopword_prob && !(*w.stopword_prob >= 0.0 && *w.stopword_prob <= 1.0))
                throw DataError("stopword_prob outside [0,1] at " + where);
            if (prev && (prev->line_index > w.line_index ||
                         (prev->line_index == w.line_index && prev->bbox.x > w.bbox.x)))
                throw DataError("words not in reading order at " + where);
            prev = &w;
        }
    }
}

// ---------------------------------------------------------------------------
// Manifest text format

namespace {

json word_to_json(const WordBox& w)
{
    json j = {{"word_id", w.word_id}, {"x", w.bbox.x}, {"y", w.bbox.y},
              {"w", w.bbox.w},        {"h", w.bbox.h}, {"line", w.line_index}};
    if (w.label) j["label"] = fold_case(*w.label);
    if (w.stopword_prob) j["stopword_prob"] = *w.stopword_prob;
    return j;
}

template <typename T>
T field(const json& j, const char* name, std::size_t line)
{
    auto it = j.find(name);
    if (it == j.end())
        throw DataError("line " + std::to_string(line) + ": missing field '" + name + "'");
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw DataError("line " + std::to_string(line) + ": field '" + name + "' has wrong type");
    }
}

WordBox word_from_json(const json& j, std::size_t line)
{
    if (!j.is_object()) throw DataError("line " + std::to_string(line) + ": word is not an object");
    WordBox w;
    w.word_id = field<std::string>(j, "word_id", line);
    w.bbox = {field<int>(j, "x", line), field<int>(j, "y", line), field<int>(j, "w", line),
              field<int>(j, "h", line)};
    w.line_index = field<int>(j, "line", line);
    if (auto it = j.find("label"); it != j.end() && !it->is_null())
        w.label = fold_case(field<std::string>(j, "label", line));
    if (auto it = j.find("stopword_prob"); it != j.end() && !it->is_null())
        w.stopword_prob = field<double>(j, "stopword_prob", line);
    return w;
}

}  // namespace

std::string serialize_manifest(const CorpusManifest& m)
{
    validate(m);
    std::string out;
    json header = {{"corpus",
                    {{"name", m.name}, {"embedding_dim", m.embedding_dim}, {"params", m.params}}}};
    out += header.dump();
    out += '\n';
    for (const auto& d : m.documents) {
        json words = json::array();
        for (const auto& w : d.words) words.push_back(word_to_json(w));
        json j = {{"doc_id", d.doc_id},
                  {"page_image", d.page_image ? json(*d.page_image) : json(nullptr)},
                  {"words", std::move(words)}};
        out += j.dump();
        out += '\n';
    }
    return out;
}

CorpusManifest parse_manifest(std::string_view text)
{
    CorpusManifest m;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool seen_header = false;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw DataError("line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!j.is_object()) throw DataError("line " + std::to_string(line_no) + ": not an object");

        if (auto c = j.find("corpus"); c != j.end()) {
            if (seen_header || !m.documents.empty())
                throw DataError("line " + std::to_string(line_no) + ": corpus header must come first");
            seen_header = true;
            m.name = field<std::string>(*c, "name", line_no);
            m.embedding_dim = field<std::uint32_t>(*c, "embedding_dim", line_no);
            if (auto p = c->find("params"); p != c->end()) {
                for (const auto& [k, v] : p->items()) {
                    if (!v.is_string())
                        throw DataError("line " + std::to_string(line_no) + ": param '" + k +
                                        "' must be a string");
                    m.params[k] = v.get<std::string>();
                }
            }
            continue;
        }

        DocumentRecord d;
        d.doc_id = field<std::string>(j, "doc_id", line_no);
        if (auto p = j.find("page_image"); p != j.end() && !p->is_null())
            d.page_image = field<std::string>(j, "page_image", line_no);
        auto words = j.find("words");
        if (words == j.end() || !words->is_array())
            throw DataError("line " + std::to_string(line_no) + ": missing field 'words'");
        for (const auto& w : *words) d.words.push_back(word_from_json(w, line_no));
        m.documents.push_back(std::move(d));
    }
    validate(m);
    return m;
}

CorpusManifest read_manifest(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read manifest '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_manifest(ss.str());
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace

void write_manifest(const CorpusManifest& m, const std::filesystem::path& path)
{
    write_file(path, serialize_manifest(m));
}

// ---------------------------------------------------------------------------
// MODSEMB1

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

namespace {

template <typename T>
void put_le(std::string& out, T value)
{
    using U = std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint32_t>;
    U bits;
    std::memcpy(&bits, &value, sizeof bits);
    for (std::size_t i = 0; i < sizeof bits; ++i)
        out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFFu));
}

template <typename T>
T get_le(std::string_view bytes, std::size_t offset)
{
    using U = std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint32_t>;
    U bits = 0;
    for (std::size_t i = 0; i < sizeof bits; ++i)
        bits |= static_cast<U>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
    T value;
    std::memcpy(&value, &bits, sizeof value);
    return value;
}

bool same_bits(float a, float b)
{
    return std::bit_cast<std::uint32_t>(a) == std::bit_cast<std::uint32_t>(b);
}

}  // namespace

bool EmbeddingRecord::operator==(const EmbeddingRecord& o) const
{
    if (word_id != o.word_id || vector.size() != o.vector.size()) return false;
    if (stopword_prob.has_value() != o.stopword_prob.has_value()) return false;
    if (stopword_prob && !same_bits(*stopword_prob, *o.stopword_prob)) return false;
    for (std::size_t i = 0; i < vector.size(); ++i)
        if (!same_bits(vector[i], o.vector[i])) return false;
    return true;
}

void EmbeddingStore::add(EmbeddingRecord record)
{
    if (records_.empty() && dim_ == 0) dim_ = static_cast<std::uint32_t>(record.vector.size());
    if (record.vector.size() != dim_)
        throw DataError("embedding '" + record.word_id + "' has dimension " +
                        std::to_string(record.vector.size()) + ", store dimension is " +
                        std::to_string(dim_));
    if (record.word_id.size() > std::numeric_limits<std::uint16_t>::max())
        throw DataError("word_id too long for MODSEMB1: '" + record.word_id.substr(0, 32) + "...'");
    if (by_id_.contains(record.word_id))
        throw DataError("duplicate embedding word_id '" + record.word_id + "'");
    by_id_.emplace(record.word_id, records_.size());
    records_.push_back(std::move(record));
}

const EmbeddingRecord* EmbeddingStore::find(std::string_view word_id) const
{
    auto it = by_id_.find(std::string(word_id));
    return it == by_id_.end() ? nullptr : &records_[it->second];
}

std::string encode_embeddings(const EmbeddingStore& store)
{
    for (const auto& r : store.records())
        if (r.vector.size() != store.dimension())
            throw DataError("mixed dimensions in embedding store at '" + r.word_id + "'");
    std::string out(kEmbeddingMagic, sizeof kEmbeddingMagic);
    put_le(out, static_cast<std::uint32_t>(store.size()));
    put_le(out, store.dimension());
    for (const auto& r : store.records()) {
        put_le(out, static_cast<std::uint16_t>(r.word_id.size()));
        out += r.word_id;
        put_le(out, r.stopword_prob ? *r.stopword_prob : std::numeric_limits<float>::quiet_NaN());
        for (float v : r.vector) put_le(out, v);
    }
    return out;
}

EmbeddingStore decode_embeddings(std::string_view bytes)
{
    if (bytes.size() < kEmbeddingHeaderSize ||
        std::memcmp(bytes.data(), kEmbeddingMagic, sizeof kEmbeddingMagic) != 0)
        throw DataError("bad magic: not a MODSEMB1 embedding file");
    const auto count = get_le<std::uint32_t>(bytes, 8);
    const auto dim = get_le<std::uint32_t>(bytes, 12);

    EmbeddingStore store(dim);
    std::size_t off = kEmbeddingHeaderSize;
    for (std::uint32_t i = 0; i < count; ++i) {
        if (off + 2 > bytes.size())
            throw DataError("truncated embedding file: record " + std::to_string(i) + " of " +
                            std::to_string(count) + " missing");
        const auto id_len = get_le<std::uint16_t>(bytes, off);
        off += 2;
        const std::size_t need = id_len + 4 + static_cast<std::size_t>(dim) * 4;
        if (off + need > bytes.size())
            throw DataError("truncated embedding file: record " + std::to_string(i) + " of " +
                            std::to_string(count) + " incomplete");
        EmbeddingRecord r;
        r.word_id.assign(bytes.substr(off, id_len));
        off += id_len;
        const float prob = get_le<float>(bytes, off);
        off += 4;
        if (!std::isnan(prob)) r.stopword_prob = prob;
        r.vector.resize(dim);
        for (std::uint32_t k = 0; k < dim; ++k, off += 4) r.vector[k] = get_le<float>(bytes, off);
        store.add(std::move(r));
    }
    if (off != bytes.size())
        throw DataError("dimension mismatch: " + std::to_string(bytes.size() - off) +
                        " trailing bytes after " + std::to_string(count) + " records of dimension " +
                        std::to_string(dim));
    return store;
}

EmbeddingStore read_embeddings(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read embeddings '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return decode_embeddings(ss.str());
}

void write_embeddings(const EmbeddingStore& store, const std::filesystem::path& path)
{
    write_file(path, encode_embeddings(store));
}

void validate_against(const CorpusManifest& m, const EmbeddingStore& store)
{
    if (m.embedding_dim != 0 && m.embedding_dim != store.dimension())
        throw DataError("dimension mismatch: manifest declares " + std::to_string(m.embedding_dim) +
                        ", embeddings have " + std::to_string(store.dimension()));
    std::unordered_set<std::string_view> ids;
    for (const auto& d : m.documents)
        for (const auto& w : d.words) ids.insert(w.word_id);
    for (const auto& r : store.records())
        if (!ids.contains(r.word_id))
            throw DataError("embedding word_id '" + r.word_id + "' not found in manifest");
}

}  // namespace mods

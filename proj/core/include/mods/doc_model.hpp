#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mods {

/// Malformed input: parse failures, invariant violations, missing references.
/// The message names the offending location (line/field, doc_id, word_id).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Pixel rectangle, image coordinates, origin top-left.
struct BBox {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    int right() const { return x + w; }
    int bottom() const { return y + h; }
    double center_x() const { return x + w / 2.0; }
    double center_y() const { return y + h / 2.0; }

    friend bool operator==(const BBox&, const BBox&) = default;
};

/// Intersection-over-union of two rectangles; 0 when either is empty.
double iou(const BBox& a, const BBox& b);

/// Smallest rectangle containing both.
BBox unite(const BBox& a, const BBox& b);

struct WordBox {
    std::string word_id;
    BBox bbox;
    int line_index = 0;
    std::optional<std::string> label;
    std::optional<double> stopword_prob;

    friend bool operator==(const WordBox&, const WordBox&) = default;
};

struct DocumentRecord {
    std::string doc_id;
    std::optional<std::string> page_image;
    std::vector<WordBox> words;  // reading order: (line_index, bbox.x)

    std::size_t word_count() const { return words.size(); }

    friend bool operator==(const DocumentRecord&, const DocumentRecord&) = default;
};

struct CorpusManifest {
    std::string name;
    std::uint32_t embedding_dim = 0;  // 0 = unspecified
    std::map<std::string, std::string> params;
    std::vector<DocumentRecord> documents;

    const DocumentRecord* find(std::string_view doc_id) const;

    friend bool operator==(const CorpusManifest&, const CorpusManifest&) = default;
};

/// ASCII lowercase fold; non-ASCII bytes pass through unchanged.
std::string fold_case(std::string_view s);

/// Stable sort of words into reading order.
void sort_reading_order(std::vector<WordBox>& words);

/// Throws DataError naming the offending doc_id/word_id. word_ids must be
/// unique across the whole corpus so that embedding stores can key on them.
void validate(const CorpusManifest& m);

CorpusManifest read_manifest(const std::filesystem::path& path);
CorpusManifest parse_manifest(std::string_view text);
void write_manifest(const CorpusManifest& m, const std::filesystem::path& path);
std::string serialize_manifest(const CorpusManifest& m);

// ---------------------------------------------------------------------------
// Embedding store (MODSEMB1)

struct EmbeddingRecord {
    std::string word_id;
    std::optional<float> stopword_prob;  // NaN on disk
    std::vector<float> vector;

    bool operator==(const EmbeddingRecord& o) const;
};

class EmbeddingStore {
public:
    EmbeddingStore() = default;
    explicit EmbeddingStore(std::uint32_t dim) : dim_(dim) {}

    /// Throws DataError on dimension mismatch or duplicate word_id.
    void add(EmbeddingRecord record);

    std::uint32_t dimension() const { return dim_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    const std::vector<EmbeddingRecord>& records() const { return records_; }
    const EmbeddingRecord* find(std::string_view word_id) const;

private:
    std::uint32_t dim_ = 0;
    std::vector<EmbeddingRecord> records_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

inline constexpr char kEmbeddingMagic[8] = {'M', 'O', 'D', 'S', 'E', 'M', 'B', '1'};
inline constexpr std::size_t kEmbeddingHeaderSize = 16;

EmbeddingStore read_embeddings(const std::filesystem::path& path);
EmbeddingStore decode_embeddings(std::string_view bytes);
void write_embeddings(const EmbeddingStore& store, const std::filesystem::path& path);
/// Records are written in insertion order.
std::string encode_embeddings(const EmbeddingStore& store);

/// Every embedding word_id must resolve to a WordBox of the manifest.
void validate_against(const CorpusManifest& m, const EmbeddingStore& store);

}  // namespace mods

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mods/ann_index.hpp"
#include "mods/descriptor.hpp"
#include "mods/doc_model.hpp"

namespace mods::match {

struct MatchConfig {
    double gamma = 0.6;     // cosine-distance cut for a word pair to count
    int region_lines = 3;   // k consecutive text lines per region
    int region_stride = 1;  // lines between region starts
    double stopword_tau = desc::kDefaultStopwordTau;
    ann::Mode ann_mode = ann::Mode::kdtree;
    ann::KdTreeParams ann_params;

    /// Throws std::invalid_argument naming the offending setting.
    void validate() const;
};

/// A document after stopword removal, with unit-norm vectors for the kept
/// words (in reading order) and an index over them.
struct PreparedDocument {
    std::string doc_id;
    std::vector<std::string> word_ids;
    std::vector<int> lines;
    std::vector<std::vector<float>> vectors;
    ann::VectorIndex index;

    std::size_t size() const { return word_ids.size(); }
};

/// Drops stopwords (box evidence first, then the stored stopword_prob) and
/// attaches embeddings. Throws DataError naming a kept word with no embedding.
PreparedDocument prepare(const DocumentRecord& doc, const EmbeddingStore& store,
                         const MatchConfig& cfg, const desc::Lexicon& lexicon = desc::default_lexicon());

/// Symmetric mean of best cross-document L2 distances; 2.0 when either side
/// is empty.
double swm_score(const PreparedDocument& a, const PreparedDocument& b);
double swm_score(const DocumentRecord& a, const DocumentRecord& b, const EmbeddingStore& store,
                 const MatchConfig& cfg, const desc::Lexicon& lexicon = desc::default_lexicon());

struct Region {
    std::size_t region_id = 0;
    std::string doc_id;
    int first_line = 0;
    int last_line = 0;
    std::vector<std::size_t> members;  // indices into the prepared document

    std::size_t size() const { return members.size(); }
};

/// Windows of `region_lines` consecutive line indices advanced by
/// `region_stride`, the last window clamped to the final line; empty windows
/// are dropped.
std::vector<Region> tile_regions(const PreparedDocument& doc, const MatchConfig& cfg);
/// Same tiling over every word of a raw document record.
std::vector<Region> tile_regions(const DocumentRecord& doc, const MatchConfig& cfg);

struct RegionMatch {
    std::size_t source = 0;
    std::optional<std::size_t> target;  // index into the target region list
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (source word, target word)
    std::vector<double> pair_distances;
    double score = 0.0;
};

/// 1 - cosine similarity, clamped at 0.
double cosine_distance(std::span<const float> a, std::span<const float> b);

/// Best target region for `p` under one-to-one word assignment; retained
/// pairs have distance ≤ gamma and the score is Σ(1 - d) / max(|p|, |q|).
RegionMatch region_score(const Region& p, std::span<const Region> targets,
                         const PreparedDocument& source, const PreparedDocument& target,
                         const MatchConfig& cfg);

struct PairScore {
    std::string query_doc;
    std::string target_doc;
    double swm = 2.0;
    double mods_raw = 0.0;
    double mods_norm = 0.0;
    std::vector<Region> source_regions;
    std::vector<Region> target_regions;
    std::vector<RegionMatch> region_matches;
};

PairScore mods_score(const PreparedDocument& a, const PreparedDocument& b, const MatchConfig& cfg);
PairScore mods_score(const DocumentRecord& a, const DocumentRecord& b, const EmbeddingStore& store,
                     const MatchConfig& cfg, const desc::Lexicon& lexicon = desc::default_lexicon());

enum class Metric { mods, swm };

/// Scores `query` against every other document on `jobs` worker threads and
/// sorts by descending mods_norm (or ascending swm), ties by doc_id. The
/// result does not depend on the worker count.
std::vector<PairScore> rank_corpus(const DocumentRecord& query, const CorpusManifest& corpus,
                                   const EmbeddingStore& store, const MatchConfig& cfg, Metric metric,
                                   const desc::Lexicon& lexicon = desc::default_lexicon(),
                                   unsigned jobs = 1);
std::vector<PairScore> rank_prepared(const PreparedDocument& query,
                                     std::span<const PreparedDocument> corpus, const MatchConfig& cfg,
                                     Metric metric, unsigned jobs = 1);

/// One JSON object: query_doc, target_doc, swm, mods_raw, mods_norm and,
/// when `with_regions`, region_matches with line spans and matched word ids.
std::string format_score_line(const PairScore& s, const PreparedDocument& a,
                              const PreparedDocument& b, bool with_regions,
                              std::optional<std::size_t> rank = std::nullopt);

struct ScoreLine {
    std::string query_doc;
    std::string target_doc;
    double swm = 0.0;
    double mods_raw = 0.0;
    double mods_norm = 0.0;
};

/// Parses score report lines; blank lines are skipped. Throws DataError with
/// the line number on malformed input.
std::vector<ScoreLine> parse_score_report(std::string_view text);

}  // namespace mods::match

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mods/doc_model.hpp"

namespace mods::eval {

/// Copy grades; the numeric value is the nDCG relevance.
enum class Degree : int { none = 0, heavy = 1, light = 2, near_copy = 3 };

std::string_view degree_name(Degree d);

struct FixtureSpec {
    /// Source texts; when empty, `num_sources` pseudo-texts are generated.
    std::vector<std::string> sources;
    std::size_t num_sources = 5;
    std::size_t tokens_per_source = 120;

    // Derived documents per source, by degree.
    std::size_t near_copy = 4;
    std::size_t light = 5;
    std::size_t heavy = 5;
    std::size_t none = 5;

    std::uint64_t seed = 1;
    double noise = 0.15;  // synth_embed noise per writer
    std::size_t dimension = 1024;

    int words_per_line = 7;
    bool reflow = true;  // derived docs vary words per line (writer style)

    double light_replace = 0.10;
    double heavy_replace = 0.25;
    double none_topic_share = 0.20;  // content words a non-copy shares with the source topic

    /// Throws std::invalid_argument on a degenerate spec.
    void validate() const;
};

struct GradeEntry {
    std::string query_doc;
    std::string target_doc;
    int grade = 0;

    friend bool operator==(const GradeEntry&, const GradeEntry&) = default;
};

struct Fixture {
    CorpusManifest manifest;
    EmbeddingStore store;
    std::vector<GradeEntry> truth;  // every (source, other document) pair
    std::vector<std::string> source_ids;
};

/// Deterministic for a given spec: equal specs give byte-identical files.
Fixture gen_fixtures(const FixtureSpec& spec);

/// Reads a JSON fixture spec; unknown keys are rejected.
FixtureSpec parse_fixture_spec(std::string_view json_text);

struct LayoutParams {
    int words_per_line = 7;
    int line_jitter = 0;  // per-line words-per-line varies in [-jitter, +jitter]
    int char_width = 10;
    int word_gap = 16;
    int line_height = 30;
    int line_pitch = 60;
    int margin = 20;
};

/// Places labels in reading order on synthetic lines; word ids are
/// "<doc_id>/w<NNNN>".
DocumentRecord layout_document(const std::string& doc_id, const std::vector<std::string>& labels,
                               const LayoutParams& params, std::uint64_t seed);

/// Ground-truth file: one {query_doc, target_doc, grade} object per line.
std::string serialize_truth(const std::vector<GradeEntry>& truth);
std::vector<GradeEntry> parse_truth(std::string_view text);
std::vector<GradeEntry> read_truth(const std::filesystem::path& path);
void write_truth(const std::vector<GradeEntry>& truth, const std::filesystem::path& path);

/// Lowercase alphabetic tokens (apostrophes kept) of free text.
std::vector<std::string> tokenize(std::string_view text);

}  // namespace mods::eval

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <opencv2/core.hpp>

#include "mods/doc_model.hpp"

namespace mods::desc {

struct DescriptorConfig {
    int height = 48;
    int width = 128;
    int grid_rows = 6;
    int grid_cols = 16;
    int orientation_bins = 8;
    bool include_profiles = true;

    std::size_t dimension() const
    {
        return static_cast<std::size_t>(grid_rows * grid_cols * orientation_bins) +
               (include_profiles ? static_cast<std::size_t>(width) * 2 : 0);
    }
    /// Throws std::invalid_argument when a size is non-positive or the grid
    /// does not divide the canvas.
    void validate() const;
};

/// Most frequent intensity; ties resolve to the darker value.
int modal_intensity(const cv::Mat& gray);

/// Sub-image bounded by the pixels differing from `background` by more than
/// `min_contrast`; the whole image when there are none. Removes the
/// translation of the ink inside a word box.
cv::Mat trim_to_ink(const cv::Mat& gray, int background, int min_contrast = 32);

/// Aspect-preserving fit of `gray` into a height × width canvas, centred,
/// padded with `background` (default: the image's modal intensity).
cv::Mat fit_canvas(const cv::Mat& gray, int height, int width, std::optional<int> background = std::nullopt);

/// The image is trimmed to its ink and fitted to the canvas, then described by
/// gradient-orientation histograms on a grid of cells (soft-binned in space
/// and orientation) followed by column and row ink projection profiles.
/// Each block is unit-normalized before the whole vector is. A blank image
/// yields zero gradient bins and a flat profile block.
std::vector<float> baseline_descriptor(const cv::Mat& gray, const DescriptorConfig& cfg = {});

inline constexpr std::size_t kSynthDimension = 1024;

/// Deterministic label embedding: a unit base vector seeded by the folded
/// label plus Gaussian noise of per-component scale noise/sqrt(d) seeded by
/// (label, writer_seed), re-normalized. Expected cosine between two writers
/// of one label is about 1/(1 + noise²).
std::vector<float> synth_embed(std::string_view label, std::uint64_t writer_seed, double noise,
                               std::size_t dimension = kSynthDimension);

using Lexicon = std::unordered_set<std::string>;

/// One lowercase word per line; '#' starts a comment.
Lexicon parse_lexicon(std::string_view text);
Lexicon read_lexicon(const std::filesystem::path& path);
/// The built-in English stopword list.
const Lexicon& default_lexicon();

inline constexpr double kDefaultStopwordTau = 0.7;

/// Probability evidence (stopword_prob ≥ tau) wins over the label lexicon;
/// with neither present the word is kept.
bool is_stopword(const WordBox& box, double tau, const Lexicon& lexicon);

/// FNV-1a, stable across platforms.
std::uint64_t stable_hash(std::string_view s);

/// Per-document writer style derived from the run seed.
std::uint64_t writer_seed(std::uint64_t seed, std::string_view doc_id);

}  // namespace mods::desc

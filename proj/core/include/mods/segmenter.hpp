#pragma once

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

#include "mods/doc_model.hpp"

namespace mods::seg {

/// Per-row ink statistics of a component; lets a component be sliced
/// horizontally without keeping its pixel mask around.
struct RowSpan {
    int count = 0;
    double x_sum = 0.0;
    int x_min = 0;
    int x_max = 0;  // inclusive
};

struct ConnectedComponent {
    BBox bbox;
    int pixel_count = 0;
    double cx = 0.0;
    double cy = 0.0;
    std::vector<RowSpan> rows;  // rows[i] describes image row bbox.y + i; may be empty
};

struct SizeClasses {
    std::vector<ConnectedComponent> small;   // punctuation
    std::vector<ConnectedComponent> medium;  // characters
    std::vector<ConnectedComponent> large;   // probable line merges
};

struct LineHypothesis {
    int line_index = 0;
    std::vector<ConnectedComponent> members;  // sorted by cx
    BBox bbox;
};

struct WordHypothesisSet {
    int threshold_id = 0;
    double gap_factor = 1.0;
    std::vector<WordBox> boxes;
};

struct SegmenterConfig {
    std::optional<int> binarize_threshold;  // unset = Otsu
    double small_factor = 0.4;
    double large_factor = 2.0;
    double cost_threshold = 1.5;
    double page_scale_factor = 3.0;  // × median medium-component height
    std::vector<double> gap_factors{1.0, 1.5, 2.0};
};

/// 8-connected foreground components of a dark-on-light 8-bit page.
/// Foreground is pixels at or below the threshold (Otsu unless overridden).
/// Sorted by (bbox.y, bbox.x).
std::vector<ConnectedComponent> extract_components(const cv::Mat& gray,
                                                   std::optional<int> threshold = std::nullopt);

SizeClasses partition_components(std::span<const ConnectedComponent> ccs,
                                 double small_factor = 0.4, double large_factor = 2.0);

/// Adjacency strength in [0,3]: y-overlap IoU + (1 - normalized centroid
/// distance) + (1 - normalized centroid angle). Higher means more likely
/// neighbours on one text line.
double pair_cost(const ConnectedComponent& a, const ConnectedComponent& b, double page_scale);

/// 3 × median height of the medium class (or 1 when there is none).
double page_scale(const SizeClasses& classes, double factor = 3.0);

std::vector<LineHypothesis> build_lines(const SizeClasses& classes, double page_scale,
                                        double cost_threshold = 1.5);

/// Median horizontal gap between consecutive members over all lines, floored at 1 px.
double median_gap(std::span<const LineHypothesis> lines);

/// One hypothesis set per factor; consecutive members whose gap is at most
/// factor × median_gap merge into one word. Word ids are "l<line>_t<set>_w<n>".
std::vector<WordHypothesisSet> group_words(std::span<const LineHypothesis> lines,
                                           std::span<const double> gap_factors);
std::vector<WordHypothesisSet> group_words(std::span<const LineHypothesis> lines,
                                           std::span<const double> gap_factors, double median);

/// Full pipeline for one page.
std::vector<WordHypothesisSet> segment_page(const cv::Mat& gray, const SegmenterConfig& cfg = {});

/// Union of the hypothesis sets with exact duplicates removed, in reading
/// order, word ids prefixed with `doc_id`.
DocumentRecord to_document(std::string doc_id, std::span<const WordHypothesisSet> sets,
                           std::optional<std::string> page_image = std::nullopt);

/// Loads an 8-bit grayscale image; throws DataError naming the path on failure.
cv::Mat load_gray(const std::string& path);

}  // namespace mods::seg

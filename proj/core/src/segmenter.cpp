#include "mods/segmenter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <tuple>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

namespace mods::seg {

namespace {

double median_of(std::vector<double> v)
{
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Recomputes bbox, pixel count and centroid from the row profile, restricted
// to rows [first, last).
std::optional<ConnectedComponent> slice_rows(const ConnectedComponent& cc, int first, int last)
{
    first = std::max(first, cc.bbox.y);
    last = std::min(last, cc.bbox.bottom());
    ConnectedComponent out;
    double y_sum = 0.0;
    double x_sum = 0.0;
    int x0 = std::numeric_limits<int>::max(), x1 = std::numeric_limits<int>::min();
    int y0 = std::numeric_limits<int>::max(), y1 = std::numeric_limits<int>::min();
    for (int y = first; y < last; ++y) {
        const RowSpan& r = cc.rows[static_cast<std::size_t>(y - cc.bbox.y)];
        if (r.count == 0) continue;
        out.pixel_count += r.count;
        x_sum += r.x_sum;
        y_sum += static_cast<double>(y) * r.count;
        x0 = std::min(x0, r.x_min);
        x1 = std::max(x1, r.x_max);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
    }
    if (out.pixel_count == 0) return std::nullopt;
    out.bbox = {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
    out.cx = x_sum / out.pixel_count;
    out.cy = y_sum / out.pixel_count;
    out.rows.assign(cc.rows.begin() + (y0 - cc.bbox.y), cc.rows.begin() + (y1 + 1 - cc.bbox.y));
    return out;
}

struct DisjointSets {
    std::vector<std::size_t> parent;
    explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t i)
    {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    }
    void join(std::size_t a, std::size_t b)
    {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

void finalize(LineHypothesis& line)
{
    std::stable_sort(line.members.begin(), line.members.end(),
                     [](const auto& a, const auto& b) { return a.cx < b.cx; });
    line.bbox = line.members.front().bbox;
    for (const auto& m : line.members) line.bbox = unite(line.bbox, m.bbox);
}

}  // namespace

std::vector<ConnectedComponent> extract_components(const cv::Mat& gray, std::optional<int> threshold)
{
    CV_Assert(!gray.empty() && gray.type() == CV_8UC1);
    double lo = 0, hi = 0;
    cv::minMaxLoc(gray, &lo, &hi);
    if (lo == hi && !threshold) return {};

    cv::Mat bin;
    if (threshold)
        cv::threshold(gray, bin, *threshold, 255, cv::THRESH_BINARY_INV);
    else
        cv::threshold(gray, bin, 0, 255, cv::THRESH_BINARY_INV | cv::THRESH_OTSU);

    cv::Mat labels, stats, centroids;
    const int n = cv::connectedComponentsWithStats(bin, labels, stats, centroids, 8, CV_32S);

    std::vector<ConnectedComponent> ccs(static_cast<std::size_t>(std::max(0, n - 1)));
    for (int i = 1; i < n; ++i) {
        auto& cc = ccs[static_cast<std::size_t>(i - 1)];
        cc.bbox = {stats.at<int>(i, cv::CC_STAT_LEFT), stats.at<int>(i, cv::CC_STAT_TOP),
                   stats.at<int>(i, cv::CC_STAT_WIDTH), stats.at<int>(i, cv::CC_STAT_HEIGHT)};
        cc.rows.resize(static_cast<std::size_t>(cc.bbox.h));
    }
    for (int y = 0; y < labels.rows; ++y) {
        const int* row = labels.ptr<int>(y);
        for (int x = 0; x < labels.cols; ++x) {
            if (row[x] == 0) continue;
            auto& cc = ccs[static_cast<std::size_t>(row[x] - 1)];
            RowSpan& r = cc.rows[static_cast<std::size_t>(y - cc.bbox.y)];
            if (r.count == 0) r.x_min = r.x_max = x;
            r.x_min = std::min(r.x_min, x);
            r.x_max = std::max(r.x_max, x);
            r.x_sum += x;
            ++r.count;
        }
    }
    for (auto& cc : ccs) {
        double ys = 0, xs = 0;
        for (std::size_t i = 0; i < cc.rows.size(); ++i) {
            cc.pixel_count += cc.rows[i].count;
            xs += cc.rows[i].x_sum;
            ys += static_cast<double>(cc.bbox.y + static_cast<int>(i)) * cc.rows[i].count;
        }
        cc.cx = xs / cc.pixel_count;
        cc.cy = ys / cc.pixel_count;
    }
    std::stable_sort(ccs.begin(), ccs.end(), [](const auto& a, const auto& b) {
        return std::tie(a.bbox.y, a.bbox.x) < std::tie(b.bbox.y, b.bbox.x);
    });
    return ccs;
}

SizeClasses partition_components(std::span<const ConnectedComponent> ccs, double small_factor,
                                 double large_factor)
{
    std::vector<double> heights;
    heights.reserve(ccs.size());
    for (const auto& c : ccs) heights.push_back(c.bbox.h);
    const double m = median_of(heights);

    SizeClasses out;
    for (const auto& c : ccs) {
        if (c.bbox.h < small_factor * m)
            out.small.push_back(c);
        else if (c.bbox.h > large_factor * m)
            out.large.push_back(c);
        else
            out.medium.push_back(c);
    }
    return out;
}

double pair_cost(const ConnectedComponent& a, const ConnectedComponent& b, double page_scale)
{
    const int inter = std::min(a.bbox.bottom(), b.bbox.bottom()) - std::max(a.bbox.y, b.bbox.y);
    const int uni = std::max(a.bbox.bottom(), b.bbox.bottom()) - std::min(a.bbox.y, b.bbox.y);
    const double overlap = (inter > 0 && uni > 0) ? static_cast<double>(inter) / uni : 0.0;

    const double dx = std::abs(a.cx - b.cx);
    const double dy = std::abs(a.cy - b.cy);
    double dist = 0.0, angle = 0.0;
    if (dx > 0.0 || dy > 0.0) {
        dist = std::clamp(std::hypot(dx, dy) / page_scale, 0.0, 1.0);
        angle = std::clamp(std::atan2(dy, dx) / (std::numbers::pi / 2), 0.0, 1.0);
    }
    return overlap + (1.0 - dist) + (1.0 - angle);
}

double page_scale(const SizeClasses& classes, double factor)
{
    std::vector<double> h;
    for (const auto& c : classes.medium) h.push_back(c.bbox.h);
    const double m = median_of(h);
    return m > 0 ? factor * m : 1.0;
}

std::vector<LineHypothesis> build_lines(const SizeClasses& classes, double scale,
                                        double cost_threshold)
{
    const auto& mid = classes.medium;
    if (mid.empty()) return {};

    DisjointSets sets(mid.size());
    for (std::size_t i = 0; i < mid.size(); ++i)
        for (std::size_t j = i + 1; j < mid.size(); ++j)
            if (pair_cost(mid[i], mid[j], scale) > cost_threshold) sets.join(i, j);

    std::vector<LineHypothesis> lines;
    std::vector<std::ptrdiff_t> slot(mid.size(), -1);
    for (std::size_t i = 0; i < mid.size(); ++i) {
        const std::size_t root = sets.find(i);
        if (slot[root] < 0) {
            slot[root] = static_cast<std::ptrdiff_t>(lines.size());
            lines.emplace_back();
        }
        lines[static_cast<std::size_t>(slot[root])].members.push_back(mid[i]);
    }
    for (auto& l : lines) finalize(l);
    std::stable_sort(lines.begin(), lines.end(), [](const auto& a, const auto& b) {
        return std::make_pair(a.bbox.center_y(), a.bbox.x) <
               std::make_pair(b.bbox.center_y(), b.bbox.x);
    });

    // Geometry of the medium-only lines drives the placement of the rest.
    std::vector<BBox> bands;
    for (const auto& l : lines) bands.push_back(l.bbox);

    auto nearest = [&](double cy) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < bands.size(); ++i)
            if (std::abs(bands[i].center_y() - cy) < std::abs(bands[best].center_y() - cy)) best = i;
        return best;
    };

    for (const auto& big : classes.large) {
        std::vector<std::size_t> hit;
        for (std::size_t i = 0; i < bands.size(); ++i)
            if (bands[i].y < big.bbox.bottom() && big.bbox.y < bands[i].bottom()) hit.push_back(i);
        if (hit.size() < 2) {
            lines[hit.empty() ? nearest(big.cy) : hit.front()].members.push_back(big);
            continue;
        }
        // Cut halfway between consecutive intersected lines.
        int top = big.bbox.y;
        for (std::size_t h = 0; h < hit.size(); ++h) {
            int bottom = big.bbox.bottom();
            if (h + 1 < hit.size())
                bottom = static_cast<int>(std::lround(
                    0.5 * (bands[hit[h]].center_y() + bands[hit[h + 1]].center_y())));
            if (auto piece = slice_rows(big, top, bottom)) lines[hit[h]].members.push_back(*piece);
            top = bottom;
        }
    }

    for (const auto& dot : classes.small) lines[nearest(dot.cy)].members.push_back(dot);

    for (std::size_t i = 0; i < lines.size(); ++i) {
        finalize(lines[i]);
        lines[i].line_index = static_cast<int>(i);
    }
    return lines;
}

double median_gap(std::span<const LineHypothesis> lines)
{
    std::vector<double> gaps;
    for (const auto& l : lines) {
        if (l.members.empty()) continue;
        int right = l.members.front().bbox.right();
        for (std::size_t i = 1; i < l.members.size(); ++i) {
            gaps.push_back(l.members[i].bbox.x - right);
            right = std::max(right, l.members[i].bbox.right());
        }
    }
    return std::max(1.0, median_of(std::move(gaps)));
}

std::vector<WordHypothesisSet> group_words(std::span<const LineHypothesis> lines,
                                           std::span<const double> gap_factors)
{
    return group_words(lines, gap_factors, median_gap(lines));
}

std::vector<WordHypothesisSet> group_words(std::span<const LineHypothesis> lines,
                                           std::span<const double> gap_factors, double median)
{
    std::vector<WordHypothesisSet> out;
    for (std::size_t t = 0; t < gap_factors.size(); ++t) {
        WordHypothesisSet set;
        set.threshold_id = static_cast<int>(t);
        set.gap_factor = gap_factors[t];
        const double limit = gap_factors[t] * median;
        for (const auto& line : lines) {
            if (line.members.empty()) continue;
            int n = 0;
            auto emit = [&](const BBox& box) {
                set.boxes.push_back(WordBox{"l" + std::to_string(line.line_index) + "_t" +
                                                std::to_string(t) + "_w" + std::to_string(n++),
                                            box, line.line_index, std::nullopt, std::nullopt});
            };
            BBox current = line.members.front().bbox;
            for (std::size_t i = 1; i < line.members.size(); ++i) {
                const BBox& next = line.members[i].bbox;
                if (next.x - current.right() <= limit) {
                    current = unite(current, next);
                } else {
                    emit(current);
                    current = next;
                }
            }
            emit(current);
        }
        out.push_back(std::move(set));
    }
    return out;
}

std::vector<WordHypothesisSet> segment_page(const cv::Mat& gray, const SegmenterConfig& cfg)
{
    const auto ccs = extract_components(gray, cfg.binarize_threshold);
    if (ccs.empty()) return group_words({}, cfg.gap_factors);
    const auto classes = partition_components(ccs, cfg.small_factor, cfg.large_factor);
    const auto lines =
        build_lines(classes, page_scale(classes, cfg.page_scale_factor), cfg.cost_threshold);
    return group_words(lines, cfg.gap_factors);
}

DocumentRecord to_document(std::string doc_id, std::span<const WordHypothesisSet> sets,
                           std::optional<std::string> page_image)
{
    DocumentRecord doc;
    doc.doc_id = std::move(doc_id);
    doc.page_image = std::move(page_image);
    std::set<std::tuple<int, int, int, int, int>> seen;
    for (const auto& set : sets) {
        for (const auto& box : set.boxes) {
            const auto key = std::make_tuple(box.line_index, box.bbox.x, box.bbox.w, box.bbox.y,
                                             box.bbox.h);
            if (!seen.insert(key).second) continue;
            WordBox w = box;
            w.word_id = doc.doc_id + "/" + box.word_id;
            doc.words.push_back(std::move(w));
        }
    }
    std::stable_sort(doc.words.begin(), doc.words.end(), [](const WordBox& a, const WordBox& b) {
        return std::make_tuple(a.line_index, a.bbox.x, a.bbox.w, a.bbox.y, a.bbox.h) <
               std::make_tuple(b.line_index, b.bbox.x, b.bbox.w, b.bbox.y, b.bbox.h);
    });
    return doc;
}

cv::Mat load_gray(const std::string& path)
{
    cv::Mat img = cv::imread(path, cv::IMREAD_GRAYSCALE);
    if (img.empty()) throw DataError("cannot read image '" + path + "'");
    return img;
}

}  // namespace mods::seg

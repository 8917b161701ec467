#include <doctest.h>

#include <numeric>
#include <random>
#include <set>

#include <opencv2/imgproc.hpp>

#include "mods/segmenter.hpp"
#include "test_support.hpp"

using namespace mods;
using namespace mods::seg;

namespace {

cv::Mat white(int h, int w) { return cv::Mat(h, w, CV_8UC1, cv::Scalar(255)); }

void square(cv::Mat& img, int x, int y, int w, int h)
{
    img(cv::Rect(x, y, w, h)).setTo(cv::Scalar(0));
}

ConnectedComponent cc(int x, int y, int w, int h)
{
    ConnectedComponent c;
    c.bbox = {x, y, w, h};
    c.pixel_count = w * h;
    c.cx = x + (w - 1) / 2.0;
    c.cy = y + (h - 1) / 2.0;
    for (int r = 0; r < h; ++r) c.rows.push_back({w, w * c.cx, x, x + w - 1});
    return c;
}

std::vector<int> heights(const std::vector<ConnectedComponent>& v)
{
    std::vector<int> h;
    for (const auto& c : v) h.push_back(c.bbox.h);
    return h;
}

}  // namespace

TEST_SUITE("segmenter") {

TEST_CASE("uniform white image has no components")
{
    CHECK(extract_components(white(40, 40)).empty());
}

TEST_CASE("one 10x10 square")
{
    cv::Mat img = white(30, 30);
    square(img, 5, 5, 10, 10);
    const auto ccs = extract_components(img);
    REQUIRE(ccs.size() == 1);
    CHECK(ccs[0].bbox == BBox{5, 5, 10, 10});
    CHECK(ccs[0].pixel_count == 100);
    CHECK(ccs[0].cx == doctest::Approx(9.5));
    CHECK(ccs[0].cy == doctest::Approx(9.5));
}

TEST_CASE("disjoint squares sorted by y then x")
{
    cv::Mat img = white(60, 60);
    square(img, 40, 30, 5, 5);
    square(img, 30, 2, 5, 5);
    square(img, 2, 30, 5, 5);
    const auto ccs = extract_components(img);
    REQUIRE(ccs.size() == 3);
    CHECK(ccs[0].bbox.y == 2);
    CHECK(ccs[1].bbox.x == 2);
    CHECK(ccs[2].bbox.x == 40);
}

TEST_CASE("diagonal pixels join under 8-connectivity")
{
    cv::Mat img = white(10, 10);
    img.at<std::uint8_t>(2, 2) = 0;
    img.at<std::uint8_t>(3, 3) = 0;
    CHECK(extract_components(img, 128).size() == 1);
}

TEST_CASE("component invariants: pixel count within box, centroid inside box")
{
    const auto page = mods::testing::render_page(3);
    for (const auto& c : extract_components(page.image)) {
        CHECK(c.pixel_count <= c.bbox.w * c.bbox.h);
        CHECK(c.cx >= c.bbox.x);
        CHECK(c.cx <= c.bbox.right() - 1);
        CHECK(c.cy >= c.bbox.y);
        CHECK(c.cy <= c.bbox.bottom() - 1);
    }
}

TEST_CASE("size classes")
{
    SUBCASE("equal heights are all medium")
    {
        std::vector<ConnectedComponent> v{cc(0, 0, 5, 10), cc(10, 0, 5, 10), cc(20, 0, 5, 10)};
        const auto s = partition_components(v);
        CHECK(s.small.empty());
        CHECK(s.medium.size() == 3);
        CHECK(s.large.empty());
    }
    SUBCASE("heights {2,10,10,10,30}")
    {
        std::vector<ConnectedComponent> v{cc(0, 0, 5, 2), cc(10, 0, 5, 10), cc(20, 0, 5, 10), cc(30, 0, 5, 10),
                                          cc(40, 0, 5, 30)};
        const auto s = partition_components(v);
        CHECK(heights(s.small) == std::vector<int>{2});
        CHECK(heights(s.medium) == std::vector<int>{10, 10, 10});
        CHECK(heights(s.large) == std::vector<int>{30});
    }
    SUBCASE("a single component is medium")
    {
        std::vector<ConnectedComponent> v{cc(0, 0, 3, 7)};
        CHECK(partition_components(v).medium.size() == 1);
    }
}

TEST_CASE("pair cost examples")
{
    SUBCASE("side by side")
    {
        CHECK(pair_cost(cc(0, 0, 10, 10), cc(12, 0, 10, 10), 100) == doctest::Approx(2.88));
    }
    SUBCASE("stacked vertically")
    {
        const double c = pair_cost(cc(0, 0, 10, 10), cc(0, 20, 10, 10), 100);
        CHECK(c == doctest::Approx(1.0 - 0.2));
        CHECK(c <= 1.0);
    }
    SUBCASE("identical boxes reach the maximum")
    {
        CHECK(pair_cost(cc(3, 4, 10, 10), cc(3, 4, 10, 10), 50) == 3.0);
    }
}

TEST_CASE("property: pair cost is symmetric and within [0,3]")
{
    std::mt19937_64 rng(2);
    auto r = [&](int n) { return static_cast<int>(rng() % static_cast<unsigned>(n)); };
    for (int i = 0; i < 1000; ++i) {
        const auto a = cc(r(200), r(200), 1 + r(30), 1 + r(30));
        const auto b = cc(r(200), r(200), 1 + r(30), 1 + r(30));
        const double scale = 1 + r(300);
        const double ab = pair_cost(a, b, scale);
        CHECK(ab == pair_cost(b, a, scale));
        CHECK(ab >= 0.0);
        CHECK(ab <= 3.0);
    }
}

TEST_CASE("lines from chained components")
{
    SUBCASE("three in a row form one line")
    {
        SizeClasses s;
        s.medium = {cc(0, 0, 10, 10), cc(12, 0, 10, 10), cc(24, 0, 10, 10)};
        const auto lines = build_lines(s, 100);
        REQUIRE(lines.size() == 1);
        CHECK(lines[0].members.size() == 3);
        CHECK(lines[0].line_index == 0);
    }
    SUBCASE("two separated rows, indexed top to bottom")
    {
        SizeClasses s;
        s.medium = {cc(0, 60, 10, 10), cc(12, 60, 10, 10), cc(0, 0, 10, 10), cc(12, 0, 10, 10)};
        const double scale = 30;
        CHECK(pair_cost(s.medium[0], s.medium[2], scale) < 1.5);
        const auto lines = build_lines(s, scale);
        REQUIRE(lines.size() == 2);
        CHECK(lines[0].line_index == 0);
        CHECK(lines[0].bbox.y == 0);
        CHECK(lines[1].bbox.y == 60);
    }
    SUBCASE("a dot above row 0 joins line 0")
    {
        SizeClasses s;
        s.medium = {cc(0, 10, 10, 10), cc(12, 10, 10, 10), cc(0, 70, 10, 10), cc(12, 70, 10, 10)};
        s.small = {cc(4, 3, 2, 2)};
        const auto lines = build_lines(s, 30);
        REQUIRE(lines.size() == 2);
        CHECK(lines[0].members.size() == 3);
        CHECK(lines[1].members.size() == 2);
    }
}

TEST_CASE("tall component spanning two lines is cut between them")
{
    SizeClasses s;
    s.medium = {cc(0, 0, 10, 10), cc(12, 0, 10, 10), cc(0, 40, 10, 10), cc(12, 40, 10, 10)};
    s.large = {cc(30, 0, 6, 50)};
    const auto lines = build_lines(s, 30);
    REQUIRE(lines.size() == 2);
    REQUIRE(lines[0].members.size() == 3);
    REQUIRE(lines[1].members.size() == 3);
    // Cut at the midpoint of the line centres (5 and 45) → rows [0,25) and [25,50).
    const auto top = std::find_if(lines[0].members.begin(), lines[0].members.end(),
                                  [](const auto& c) { return c.bbox.x == 30; });
    const auto bottom = std::find_if(lines[1].members.begin(), lines[1].members.end(),
                                     [](const auto& c) { return c.bbox.x == 30; });
    REQUIRE(top != lines[0].members.end());
    REQUIRE(bottom != lines[1].members.end());
    CHECK(top->bbox == BBox{30, 0, 6, 25});
    CHECK(bottom->bbox == BBox{30, 25, 6, 25});
    CHECK(top->pixel_count + bottom->pixel_count == 300);
}

TEST_CASE("property: every component lands in exactly one line")
{
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto page = mods::testing::render_page(seed);
        const auto ccs = extract_components(page.image);
        const auto classes = partition_components(ccs);
        const auto lines = build_lines(classes, page_scale(classes));
        long in = 0, out = 0;
        for (const auto& c : ccs) in += c.pixel_count;
        std::size_t members = 0;
        for (const auto& l : lines) {
            members += l.members.size();
            for (const auto& c : l.members) out += c.pixel_count;
        }
        // Ink is conserved; large components may be split into several pieces.
        CHECK(out == in);
        CHECK(members >= ccs.size());
    }
}

TEST_CASE("word grouping by gap threshold")
{
    // Gaps between consecutive members: 2, 2, 12, 2.
    LineHypothesis line;
    int x = 0;
    for (int gap : {0, 2, 2, 12, 2}) {
        x += gap;
        line.members.push_back(cc(x, 0, 10, 10));
        x += 10;
    }
    std::vector<LineHypothesis> lines{line};
    CHECK(median_gap(lines) == 2.0);

    SUBCASE("t = 1.5 splits only at the wide gap")
    {
        const std::vector<double> t{1.5};
        const auto sets = group_words(lines, t);
        REQUIRE(sets.size() == 1);
        REQUIRE(sets[0].boxes.size() == 2);
        CHECK(sets[0].boxes[0].bbox == BBox{0, 0, 34, 10});
        CHECK(sets[0].boxes[1].bbox == BBox{46, 0, 22, 10});
    }
    SUBCASE("t = infinity keeps the whole line")
    {
        const std::vector<double> t{std::numeric_limits<double>::infinity()};
        const auto sets = group_words(lines, t);
        REQUIRE(sets[0].boxes.size() == 1);
        CHECK(sets[0].boxes[0].bbox == BBox{0, 0, 68, 10});
    }
    SUBCASE("three thresholds give three consistent sets")
    {
        const std::vector<double> t{1.0, 1.5, 2.0};
        const auto sets = group_words(lines, t);
        REQUIRE(sets.size() == 3);
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(sets[i].threshold_id == static_cast<int>(i));
            CHECK(sets[i].gap_factor == t[i]);
            std::set<std::string> ids;
            for (const auto& b : sets[i].boxes) ids.insert(b.word_id);
            CHECK(ids.size() == sets[i].boxes.size());
        }
    }
}

TEST_CASE("property: word boxes tile their line")
{
    const auto page = mods::testing::render_page(9);
    const auto ccs = extract_components(page.image);
    const auto classes = partition_components(ccs);
    const auto lines = build_lines(classes, page_scale(classes));
    const std::vector<double> t{1.0, 1.5, 2.0, 4.0};
    for (const auto& set : group_words(lines, t)) {
        for (const auto& line : lines) {
            // Union of the word boxes equals the union of the line's members.
            std::optional<BBox> words;
            int count = 0;
            for (const auto& b : set.boxes)
                if (b.line_index == line.line_index) {
                    words = words ? unite(*words, b.bbox) : b.bbox;
                    ++count;
                }
            REQUIRE(words.has_value());
            CHECK(*words == line.bbox);
            CHECK(count >= 1);
        }
    }
}

TEST_CASE("segment_page and to_document")
{
    const auto page = mods::testing::render_page(1);
    const auto sets = segment_page(page.image);
    REQUIRE(sets.size() == 3);
    const auto doc = to_document("p1", sets, "p1.png");
    CHECK(doc.doc_id == "p1");
    CHECK(*doc.page_image == "p1.png");
    CHECK_FALSE(doc.words.empty());
    std::set<std::string> ids;
    for (std::size_t i = 0; i < doc.words.size(); ++i) {
        CHECK(doc.words[i].word_id.starts_with("p1/"));
        ids.insert(doc.words[i].word_id);
        if (i > 0) {
            const auto& a = doc.words[i - 1];
            const auto& b = doc.words[i];
            CHECK(std::make_pair(a.line_index, a.bbox.x) <= std::make_pair(b.line_index, b.bbox.x));
        }
    }
    CHECK(ids.size() == doc.words.size());
    CorpusManifest m;
    m.documents.push_back(doc);
    CHECK_NOTHROW(validate(m));
}

TEST_CASE("recall on a rendered page")
{
    const auto page = mods::testing::render_page(21);
    const auto doc = to_document("p", segment_page(page.image));
    std::size_t hit = 0;
    for (const auto& gt : page.words)
        for (const auto& w : doc.words)
            if (iou(gt, w.bbox) >= 0.5) {
                ++hit;
                break;
            }
    CHECK(static_cast<double>(hit) / static_cast<double>(page.words.size()) >= 0.9);
}

TEST_CASE("load_gray names a missing path")
{
    CHECK_THROWS_WITH_AS(load_gray("/nonexistent/page.png"), doctest::Contains("/nonexistent/page.png"), DataError);
}

}  // TEST_SUITE

#include "test_support.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <opencv2/imgproc.hpp>

namespace mods::testing {

std::vector<float> random_unit(std::mt19937_64& rng, std::size_t dim)
{
    std::normal_distribution<double> g;
    std::vector<double> v(dim);
    double ss = 0.0;
    for (auto& x : v) {
        x = g(rng);
        ss += x * x;
    }
    std::vector<float> out(dim);
    for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(v[i] / std::sqrt(ss));
    return out;
}

TempDir::TempDir()
{
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() / ("mods-test-" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir()
{
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

std::string read_file(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& p, const std::string& bytes)
{
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << bytes;
}

DocumentRecord make_document(const std::string& doc_id, const std::vector<std::vector<std::string>>& lines)
{
    DocumentRecord d;
    d.doc_id = doc_id;
    for (std::size_t l = 0; l < lines.size(); ++l)
        for (std::size_t i = 0; i < lines[l].size(); ++i)
            d.words.push_back(WordBox{doc_id + "/" + std::to_string(l) + "." + std::to_string(i),
                                      {static_cast<int>(20 + 80 * i), static_cast<int>(20 + 60 * l), 60, 30},
                                      static_cast<int>(l),
                                      lines[l][i],
                                      std::nullopt});
    return d;
}

namespace {

struct Glyph {
    cv::Rect body;
    bool ascender = false;
    bool descender = false;
};

}  // namespace

RenderedPage render_page(std::uint64_t seed, const PageStyle& s)
{
    std::mt19937_64 rng(seed);
    auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    auto chance = [&](double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; };

    const int height = 2 * s.margin + s.lines * s.line_pitch;
    cv::Mat ink(height, s.width, CV_8UC1, cv::Scalar(0));
    RenderedPage page;

    const int asc = s.x_height * 3 / 5;
    const int desc = s.x_height / 2;
    for (int line = 0; line < s.lines; ++line) {
        const int baseline = s.margin + line * s.line_pitch + s.line_pitch / 2 + s.x_height / 2;
        int x = s.margin + uni(0, 20);
        std::vector<Glyph> line_descenders;
        while (true) {
            const int glyphs = uni(2, 7);
            const int drift = uni(-2, 2);
            std::vector<Glyph> word;
            int wx = x;
            for (int g = 0; g < glyphs; ++g) {
                Glyph gl;
                const int w = uni(6, 12);
                const int h = s.x_height + uni(-2, 2);
                gl.body = cv::Rect(wx, baseline + drift - h, w, h);
                gl.ascender = chance(s.ascender_rate);
                gl.descender = !gl.ascender && chance(s.descender_rate);
                word.push_back(gl);
                wx += w + uni(s.intra_gap_min, s.intra_gap_max);
            }
            if (wx > s.width - s.margin) break;

            BBox box{word.front().body.x, 1 << 30, 0, 0};
            int bottom = 0;
            for (const auto& gl : word) {
                cv::Rect r = gl.body;
                if (gl.ascender) r = cv::Rect(r.x, r.y - asc, r.width, r.height + asc);
                if (gl.descender) r = cv::Rect(r.x, r.y, r.width, r.height + desc);
                cv::ellipse(ink, cv::Point(r.x + r.width / 2, r.y + r.height / 2),
                            cv::Size(r.width / 2, r.height / 2), 0, 0, 360, cv::Scalar(255), cv::FILLED,
                            cv::LINE_AA);
                box.y = std::min(box.y, r.y);
                bottom = std::max(bottom, r.y + r.height);
                box.w = r.x + r.width - box.x;
                if (!gl.ascender && chance(s.dot_rate)) {
                    const cv::Point c(gl.body.x + gl.body.width / 2, gl.body.y - 6);
                    cv::circle(ink, c, 2, cv::Scalar(255), cv::FILLED, cv::LINE_AA);
                    box.y = std::min(box.y, c.y - 2);
                }
                if (gl.descender) line_descenders.push_back(gl);
            }
            box.h = bottom - box.y;
            page.words.push_back(box);
            page.word_lines.push_back(line);
            x = wx - s.intra_gap_max + uni(s.word_gap_min, s.word_gap_max);
        }
        // A long descender that runs into the line below.
        if (line + 1 < s.lines && !line_descenders.empty() && chance(s.merge_rate)) {
            const Glyph& gl = line_descenders[static_cast<std::size_t>(uni(0, static_cast<int>(line_descenders.size()) - 1))];
            const int cx = gl.body.x + gl.body.width / 2;
            const int next_top = baseline + s.line_pitch - s.x_height - 2;
            cv::line(ink, cv::Point(cx, gl.body.y + gl.body.height), cv::Point(cx, next_top + 4), cv::Scalar(255), 3);
        }
    }

    cv::Mat noise(ink.size(), CV_32F);
    cv::RNG(seed ^ 0x5eedULL).fill(noise, cv::RNG::NORMAL, 0.0, s.noise_sigma);
    cv::Mat paper;
    ink.convertTo(paper, CV_32F, -0.8, 235.0);  // ink ~ 31, paper ~ 235
    paper += noise;
    paper.convertTo(page.image, CV_8U);
    return page;
}

}  // namespace mods::testing

#include "mods/descriptor.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>

#include <opencv2/imgproc.hpp>

namespace mods::desc {

extern const char* const kDefaultStopwordText;  // generated from data/stopwords.txt

void DescriptorConfig::validate() const
{
    if (height <= 0 || width <= 0 || grid_rows <= 0 || grid_cols <= 0 || orientation_bins <= 0)
        throw std::invalid_argument("descriptor sizes must be positive");
    if (height % grid_rows || width % grid_cols)
        throw std::invalid_argument("descriptor grid must divide the canvas");
}

int modal_intensity(const cv::Mat& gray)
{
    CV_Assert(gray.type() == CV_8UC1);
    std::array<int, 256> hist{};
    for (int y = 0; y < gray.rows; ++y) {
        const auto* row = gray.ptr<std::uint8_t>(y);
        for (int x = 0; x < gray.cols; ++x) ++hist[row[x]];
    }
    return static_cast<int>(std::max_element(hist.begin(), hist.end()) - hist.begin());
}

cv::Mat fit_canvas(const cv::Mat& gray, int height, int width, std::optional<int> background)
{
    CV_Assert(!gray.empty() && gray.type() == CV_8UC1);
    const double scale = std::min(static_cast<double>(height) / gray.rows,
                                  static_cast<double>(width) / gray.cols);
    const int w = std::clamp(static_cast<int>(std::lround(gray.cols * scale)), 1, width);
    const int h = std::clamp(static_cast<int>(std::lround(gray.rows * scale)), 1, height);
    cv::Mat resized;
    cv::resize(gray, resized, cv::Size(w, h), 0, 0, scale < 1.0 ? cv::INTER_AREA : cv::INTER_LINEAR);

    cv::Mat canvas(height, width, CV_8UC1, cv::Scalar(background.value_or(modal_intensity(gray))));
    resized.copyTo(canvas(cv::Rect((width - w) / 2, (height - h) / 2, w, h)));
    return canvas;
}

cv::Mat trim_to_ink(const cv::Mat& gray, int background, int min_contrast)
{
    CV_Assert(!gray.empty() && gray.type() == CV_8UC1);
    cv::Mat diff, mask;
    cv::absdiff(gray, cv::Scalar(background), diff);
    cv::threshold(diff, mask, min_contrast, 255, cv::THRESH_BINARY);
    const cv::Rect ink = cv::boundingRect(mask);
    if (ink.area() == 0) return gray;
    return gray(ink);
}

namespace {

void normalize_block(std::span<double> block, bool flat_if_zero)
{
    double ss = 0.0;
    for (double v : block) ss += v * v;
    if (ss > 0.0) {
        const double inv = 1.0 / std::sqrt(ss);
        for (double& v : block) v *= inv;
    } else if (flat_if_zero && !block.empty()) {
        std::fill(block.begin(), block.end(), 1.0 / std::sqrt(static_cast<double>(block.size())));
    }
}

void gradient_histograms(const cv::Mat& canvas, const DescriptorConfig& cfg, std::span<double> out)
{
    cv::Mat f, gx, gy;
    canvas.convertTo(f, CV_32F, 1.0 / 255.0);
    cv::Sobel(f, gx, CV_32F, 1, 0, 1);
    cv::Sobel(f, gy, CV_32F, 0, 1, 1);

    const int bins = cfg.orientation_bins;
    const double cell_h = static_cast<double>(cfg.height) / cfg.grid_rows;
    const double cell_w = static_cast<double>(cfg.width) / cfg.grid_cols;
    const double bin_width = std::numbers::pi / bins;

    auto add = [&](int r, int c, int b, double v) {
        if (r < 0 || r >= cfg.grid_rows || c < 0 || c >= cfg.grid_cols) return;
        out[static_cast<std::size_t>((r * cfg.grid_cols + c) * bins + b)] += v;
    };

    for (int y = 0; y < cfg.height; ++y) {
        const float* dx = gx.ptr<float>(y);
        const float* dy = gy.ptr<float>(y);
        const double fy = (y + 0.5) / cell_h - 0.5;
        const int r0 = static_cast<int>(std::floor(fy));
        const double wy = fy - r0;
        for (int x = 0; x < cfg.width; ++x) {
            const double mag = std::hypot(dx[x], dy[x]);
            if (mag == 0.0) continue;
            double angle = std::atan2(dy[x], dx[x]);
            if (angle < 0) angle += std::numbers::pi;
            const double fb = angle / bin_width - 0.5;
            const int b0 = static_cast<int>(std::floor(fb));
            const double wb = fb - b0;
            const int lo = (b0 % bins + bins) % bins;
            const int hi = (lo + 1) % bins;

            const double fx = (x + 0.5) / cell_w - 0.5;
            const int c0 = static_cast<int>(std::floor(fx));
            const double wx = fx - c0;
            for (int dr = 0; dr < 2; ++dr) {
                const double vy = dr ? wy : 1.0 - wy;
                for (int dc = 0; dc < 2; ++dc) {
                    const double v = mag * vy * (dc ? wx : 1.0 - wx);
                    add(r0 + dr, c0 + dc, lo, v * (1.0 - wb));
                    add(r0 + dr, c0 + dc, hi, v * wb);
                }
            }
        }
    }
}

void ink_profiles(const cv::Mat& canvas, int background, std::span<double> out)
{
    const int H = canvas.rows, W = canvas.cols;
    cv::Mat rows(H, 1, CV_64F, cv::Scalar(0));
    for (int y = 0; y < H; ++y) {
        const auto* px = canvas.ptr<std::uint8_t>(y);
        for (int x = 0; x < W; ++x) {
            const double ink = std::abs(static_cast<int>(px[x]) - background) / 255.0;
            out[static_cast<std::size_t>(x)] += ink / H;
            rows.at<double>(y) += ink / W;
        }
    }
    cv::Mat stretched;
    cv::resize(rows, stretched, cv::Size(1, W), 0, 0, cv::INTER_LINEAR);
    for (int i = 0; i < W; ++i) out[static_cast<std::size_t>(W + i)] = stretched.at<double>(i);
}

std::uint64_t splitmix(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Box-Muller over mt19937_64; std::normal_distribution is not specified
// bit-for-bit across standard libraries and embedding files must match.
class Gaussian {
public:
    explicit Gaussian(std::uint64_t seed) : rng_(seed) {}
    double operator()()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = (static_cast<double>(rng_() >> 11) + 0.5) * 0x1.0p-53;
        const double u2 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
        has_spare_ = true;
        return r * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace

std::vector<float> baseline_descriptor(const cv::Mat& gray, const DescriptorConfig& cfg)
{
    cfg.validate();
    // Background tone comes from the whole box: a tight crop can be mostly ink.
    const int background = modal_intensity(gray);
    const cv::Mat canvas = fit_canvas(trim_to_ink(gray, background), cfg.height, cfg.width, background);

    std::vector<double> v(cfg.dimension(), 0.0);
    const std::size_t hog_size =
        static_cast<std::size_t>(cfg.grid_rows * cfg.grid_cols * cfg.orientation_bins);
    std::span<double> hog(v.data(), hog_size);
    gradient_histograms(canvas, cfg, hog);
    normalize_block(hog, false);
    if (cfg.include_profiles) {
        std::span<double> prof(v.data() + hog_size, v.size() - hog_size);
        ink_profiles(canvas, background, prof);
        normalize_block(prof, true);
    }
    normalize_block(v, true);
    return {v.begin(), v.end()};
}

std::uint64_t stable_hash(std::string_view s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t writer_seed(std::uint64_t seed, std::string_view doc_id)
{
    return splitmix(seed ^ splitmix(stable_hash(doc_id)));
}

std::vector<float> synth_embed(std::string_view label, std::uint64_t writer_seed, double noise,
                               std::size_t dimension)
{
    const std::uint64_t label_seed = stable_hash(fold_case(label));
    Gaussian base_rng(label_seed);
    std::vector<double> v(dimension);
    for (auto& x : v) x = base_rng();
    normalize_block(v, true);

    if (noise > 0.0) {
        Gaussian noise_rng(splitmix(label_seed ^ splitmix(writer_seed)));
        const double scale = noise / std::sqrt(static_cast<double>(dimension));
        for (auto& x : v) x += scale * noise_rng();
        normalize_block(v, true);
    }
    return {v.begin(), v.end()};
}

Lexicon parse_lexicon(std::string_view text)
{
    Lexicon out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string_view::npos) continue;
        const auto e = line.find_last_not_of(" \t\r");
        out.insert(fold_case(line.substr(b, e - b + 1)));
    }
    return out;
}

Lexicon read_lexicon(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read stopword lexicon '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_lexicon(ss.str());
}

const Lexicon& default_lexicon()
{
    static const Lexicon lexicon = parse_lexicon(kDefaultStopwordText);
    return lexicon;
}

bool is_stopword(const WordBox& box, double tau, const Lexicon& lexicon)
{
    if (box.stopword_prob) return *box.stopword_prob >= tau;
    if (box.label) return lexicon.contains(fold_case(*box.label));
    return false;
}

}  // namespace mods::desc

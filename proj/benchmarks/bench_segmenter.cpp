#include <random>

#include <benchmark/benchmark.h>
#include <opencv2/imgproc.hpp>

#include "mods/segmenter.hpp"

namespace {

// Lines of blob words on noisy paper.
cv::Mat page(int lines)
{
    std::mt19937_64 rng(11);
    cv::Mat img(60 + 56 * lines, 1000, CV_8UC1, cv::Scalar(235));
    for (int l = 0; l < lines; ++l) {
        const int base = 60 + 56 * l;
        int x = 30;
        while (x < 940) {
            const int glyphs = 2 + static_cast<int>(rng() % 6);
            for (int g = 0; g < glyphs && x < 960; ++g) {
                const int w = 6 + static_cast<int>(rng() % 5);
                const int h = 12 + static_cast<int>(rng() % 10);
                cv::ellipse(img, cv::Point(x + w / 2, base - h / 2), cv::Size(w / 2, h / 2), 0, 0, 360,
                            cv::Scalar(25), cv::FILLED);
                x += w + 3;
            }
            x += 18;
        }
    }
    cv::Mat noise(img.size(), CV_16SC1);
    cv::RNG(5).fill(noise, cv::RNG::NORMAL, 0, 6);
    cv::add(img, noise, img, cv::noArray(), CV_8UC1);
    return img;
}

void BM_SegmentPage(benchmark::State& state)
{
    const cv::Mat img = page(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(mods::seg::segment_page(img));
}
BENCHMARK(BM_SegmentPage)->Arg(6)->Arg(12)->Arg(24)->Unit(benchmark::kMillisecond);

void BM_ExtractComponents(benchmark::State& state)
{
    const cv::Mat img = page(12);
    for (auto _ : state) benchmark::DoNotOptimize(mods::seg::extract_components(img));
}
BENCHMARK(BM_ExtractComponents)->Unit(benchmark::kMillisecond);

}  // namespace

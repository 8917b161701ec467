#include <random>

#include <benchmark/benchmark.h>
#include <opencv2/imgproc.hpp>

#include "mods/descriptor.hpp"

namespace {

cv::Mat word_image(int width)
{
    std::mt19937_64 rng(7);
    cv::Mat img(50, width, CV_8UC1, cv::Scalar(230));
    for (int x = 6; x + 12 < width; x += 11) {
        const int h = 14 + static_cast<int>(rng() % 14);
        cv::ellipse(img, cv::Point(x + 4, 36 - h / 2), cv::Size(4, h / 2), 0, 0, 360, cv::Scalar(30), cv::FILLED);
    }
    return img;
}

void BM_BaselineDescriptor(benchmark::State& state)
{
    const cv::Mat img = word_image(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(mods::desc::baseline_descriptor(img));
}
BENCHMARK(BM_BaselineDescriptor)->Arg(60)->Arg(160)->Arg(400);

void BM_SynthEmbed(benchmark::State& state)
{
    std::uint64_t writer = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(mods::desc::synth_embed("manuscript", ++writer, 0.15,
                                                         static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_SynthEmbed)->Arg(128)->Arg(1024);

}  // namespace

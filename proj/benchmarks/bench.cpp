// Microbenchmarks for the hot paths: forward pass, NMS, anchor generation,
// augmentation, and prediction decoding.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include <opencv2/core.hpp>

#include "ladr/anchors.hpp"
#include "ladr/boxes.hpp"
#include "ladr/dataset.hpp"
#include "ladr/infer.hpp"
#include "ladr/network.hpp"
#include "ladr/synth.hpp"

namespace {

using namespace ladr;

double unit(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

void BM_ForwardDesk(benchmark::State& state) {
  Network<float> net(desk_network_config());
  net.init(1);
  Tensor<float> x(1, 1, 96, 96);
  std::mt19937_64 rng(2);
  for (auto& v : x.data) v = static_cast<float>(unit(rng));
  for (auto _ : state) {
    auto rows = net.forward(x, false);
    benchmark::DoNotOptimize(rows);
    net.clear_caches();
  }
}
BENCHMARK(BM_ForwardDesk)->Unit(benchmark::kMillisecond);

void BM_ForwardPaper(benchmark::State& state) {
  Network<float> net(paper_network_config());
  net.init(1);
  Tensor<float> x(1, 3, 416, 416);
  std::mt19937_64 rng(2);
  for (auto& v : x.data) v = static_cast<float>(unit(rng));
  for (auto _ : state) {
    auto rows = net.forward(x, false);
    benchmark::DoNotOptimize(rows);
    net.clear_caches();
  }
}
BENCHMARK(BM_ForwardPaper)->Unit(benchmark::kMillisecond)->Iterations(3);

void BM_TrainStepDesk(benchmark::State& state) {
  Network<float> net(desk_network_config());
  net.init(1);
  Tensor<float> x(7, 1, 96, 96);
  std::mt19937_64 rng(2);
  for (auto& v : x.data) v = static_cast<float>(unit(rng));
  std::vector<std::vector<float>> grads;
  for (auto _ : state) {
    auto rows = net.forward(x, true);
    grads.assign(rows.size(), {});
    for (std::size_t i = 0; i < rows.size(); ++i)
      grads[i].assign(rows[i].size(), 1e-4f);
    net.backward(grads);
    net.zero_grad();
    net.clear_caches();
  }
}
BENCHMARK(BM_TrainStepDesk)->Unit(benchmark::kMillisecond);

void BM_Nms(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::vector<Detection> dets(static_cast<std::size_t>(state.range(0)));
  for (auto& d : dets) {
    d.box = BoxXYWH{unit(rng) * 96, unit(rng) * 96, 4 + unit(rng) * 30,
                    4 + unit(rng) * 30};
    d.score = unit(rng);
  }
  for (auto _ : state) {
    auto kept = nms(dets, 0.5, 100);
    benchmark::DoNotOptimize(kept);
  }
}
BENCHMARK(BM_Nms)->Arg(200)->Arg(1000);

void BM_GenerateAnchors(benchmark::State& state) {
  const AnchorConfig cfg = desk_network_config().anchors;
  for (auto _ : state) {
    auto anchors = generate_anchors(cfg);
    benchmark::DoNotOptimize(anchors);
  }
}
BENCHMARK(BM_GenerateAnchors);

void BM_Augment(benchmark::State& state) {
  cv::Mat img(96, 96, CV_32FC1, cv::Scalar(0.3));
  Sample s;
  s.origin = DatasetOrigin::kDs1;
  s.objects.push_back(render_face(img, 48, 48, 20, RotationAngle(0.25)));
  s.image = img;
  AugmentConfig aug;
  aug.p_rot90 = 0.5;
  aug.p_hflip = 0.5;
  aug.p_vflip = 0.5;
  std::uint64_t seed = 1;
  for (auto _ : state) {
    Sample out = augment(s, aug, seed++, nullptr);
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(BM_Augment);

void BM_DecodePredictions(benchmark::State& state) {
  const auto anchors = generate_anchors(desk_network_config().anchors);
  std::mt19937_64 rng(4);
  std::vector<float> raw(anchors.size() * kRawFields);
  for (auto& v : raw) v = static_cast<float>(unit(rng) * 4 - 2);
  for (auto _ : state) {
    auto dets = decode_predictions<float>(raw, anchors, 0.5, 0.5, 100);
    benchmark::DoNotOptimize(dets);
  }
}
BENCHMARK(BM_DecodePredictions);

}  // namespace

BENCHMARK_MAIN();

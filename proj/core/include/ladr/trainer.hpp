#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <random>
#include <vector>

#include "ladr/dataset.hpp"
#include "ladr/losses.hpp"
#include "ladr/network.hpp"
#include "ladr/targets.hpp"

namespace ladr {

struct TrainConfig {
  int total_steps = 2000;
  double lr = 1e-3;
  double lr_final = 1e-5;
  int warmup_steps = 200;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double grad_clip = 10.0;  // global gradient norm
  LossWeights weights;
  int minibatch = 256;
  double pos_fraction = 0.5;
  double pos_iou = 0.5;
  double neg_iou = 0.4;
  std::uint64_t seed = 1;
};

struct StepLog {
  int step = 0;
  LossBreakdown loss;
  double lr = 0.0;
};

struct TrainResult {
  std::vector<StepLog> logs;
};

struct TrainHooks {
  std::ostream* csv = nullptr;  // receives the header + one row per step
  std::function<void(int)> on_step;
};

// Linear warmup into cosine decay.
double lr_at_step(const TrainConfig& cfg, int step);

// Runs the optimization loop: draw dual batch, forward, assign + sample per
// image, pooled loss, backprop, clipped Adam step. Deterministic in
// cfg.seed (with the iterator seeded independently by the caller). Throws
// NonFiniteLoss naming the step and component that diverged.
TrainResult train(Network<float>& net, DualBatchIterator& data,
                  const TrainConfig& cfg, const TrainHooks& hooks = {});

// Per-image loss inputs computed from ground truth (used by train and by the
// gradient checker).
struct PreparedImage {
  AnchorTargets targets;
  std::vector<std::int32_t> sampled;
};

template <typename T>
LossBreakdown network_loss(Network<T>& net, const Tensor<T>& x,
                           const std::vector<PreparedImage>& prep,
                           const LossWeights& w, bool train_mode,
                           std::vector<std::vector<T>>* grad_rows = nullptr) {
  const auto rows = net.forward(x, train_mode);
  std::vector<LossInput<T>> items(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    items[i] = {std::span<const T>(rows[i]), &prep[i].targets,
                std::span<const std::int32_t>(prep[i].sampled)};
  if (!grad_rows) return detection_loss<T>(items, w);
  grad_rows->assign(rows.size(), {});
  std::vector<std::span<T>> spans(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    (*grad_rows)[i].assign(rows[i].size(), T(0));
    spans[i] = std::span<T>((*grad_rows)[i]);
  }
  return detection_loss<T>(items, w, spans);
}

// Central finite differences on `count` randomly chosen parameters against
// the analytic gradient; returns the worst error, relative where the
// magnitudes exceed 1. Training-mode forwards throughout so the batch-norm
// path is exercised.
template <typename T>
double grad_check(Network<T>& net, const Tensor<T>& x,
                  const std::vector<PreparedImage>& prep,
                  const LossWeights& w, int count, double h,
                  std::uint64_t seed) {
  net.zero_grad();
  std::vector<std::vector<T>> grad_rows;
  network_loss(net, x, prep, w, /*train_mode=*/true, &grad_rows);
  net.backward(grad_rows);

  auto params = net.parameters();
  std::vector<std::pair<std::size_t, std::size_t>> picks;
  std::mt19937_64 rng(seed);
  for (int i = 0; i < count; ++i) {
    const std::size_t t = rng() % params.size();
    picks.emplace_back(t, rng() % params[t].value->size());
  }

  double worst = 0.0;
  for (const auto& [t, j] : picks) {
    T& slot = (*params[t].value)[j];
    const T saved = slot;
    slot = saved + static_cast<T>(h);
    const double up = network_loss(net, x, prep, w, true).total;
    slot = saved - static_cast<T>(h);
    const double down = network_loss(net, x, prep, w, true).total;
    slot = saved;
    net.clear_caches();
    const double fd = (up - down) / (2.0 * h);
    const double analytic = static_cast<double>((*params[t].grad)[j]);
    const double err = std::abs(fd - analytic) /
                       std::max({std::abs(fd), std::abs(analytic), 1.0});
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace ladr

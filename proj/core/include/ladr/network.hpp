#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "ladr/anchors.hpp"
#include "ladr/errors.hpp"
#include "ladr/layers.hpp"
#include "ladr/losses.hpp"

namespace ladr {

// Channel plan for the detector. widths[i] is the working width of backbone
// block i+1; thirds[i] is the (wider) final width of block i+2, which is what
// the neck taps. All presets keep strides 8/16/32/64 for the four output
// levels.
struct NetworkConfig {
  int input_size = 96;
  int in_channels = 1;
  std::array<int, 5> widths{8, 8, 16, 16, 16};
  std::array<int, 4> thirds{32, 64, 64, 64};
  int neck = 16;
  AnchorConfig anchors;
};

NetworkConfig desk_network_config();
NetworkConfig paper_network_config();
NetworkConfig tiny_network_config();  // minimal shape for numeric checks

// Conv + BatchNorm + ReLU.
template <typename T>
class Cba {
 public:
  Cba(int in_c, int out_c, int k, int stride)
      : conv(in_c, out_c, k, stride, /*bias=*/false), bn(out_c) {}

  Tensor<T> forward(const Tensor<T>& x, bool train) {
    return relu.forward(bn.forward(conv.forward(x, train), train), train);
  }
  Tensor<T> backward(const Tensor<T>& dy) {
    return conv.backward(bn.backward(relu.backward(dy)));
  }
  void init(std::mt19937_64& rng) { conv.init(rng); }
  void collect(const std::string& prefix, std::vector<ParamRef<T>>& params,
               std::vector<ParamRef<T>>& buffers) {
    conv.collect(prefix + ".conv", params);
    bn.collect(prefix + ".bn", params, buffers);
  }
  void clear_cache() {
    conv.clear_cache();
    bn.clear_cache();
    relu.clear_cache();
  }

  Conv2d<T> conv;
  BatchNorm<T> bn;
  Relu<T> relu;
};

// One-stage detector: 14-layer CBA backbone tapped at strides 8/16/32, a
// lateral+top-down neck producing four levels (the fourth from a stride-2
// conv on the deepest lateral), and a single 3x3 head shared across levels
// that emits 9 values per anchor slot.
template <typename T>
class Network {
 public:
  explicit Network(const NetworkConfig& cfg) : cfg_(cfg) {
    if (cfg.anchors.input_size != cfg.input_size)
      throw ConfigError("anchor/network input size mismatch");
    if (cfg.anchors.levels.size() != 4)
      throw ConfigError("network expects four anchor levels");
    const auto& w = cfg.widths;
    const auto& t = cfg.thirds;
    int prev = cfg.in_channels;
    auto add = [&](int out_c, int k, int s) {
      cbas_.emplace_back(prev, out_c, k, s);
      prev = out_c;
    };
    add(w[0], 7, 2);
    add(w[0], 3, 1);
    for (int b = 0; b < 4; ++b) {
      add(w[b + 1], 3, 2);
      add(w[b + 1], 3, 1);
      add(t[b], 3, 1);
    }
    lat_.emplace_back(t[1], cfg.neck, 1, 1);
    lat_.emplace_back(t[2], cfg.neck, 1, 1);
    lat_.emplace_back(t[3], cfg.neck, 1, 1);
    for (int i = 0; i < 3; ++i) smooth_.emplace_back(cfg.neck, cfg.neck, 3, 1);
    p6_ = std::make_unique<Conv2d<T>>(cfg.neck, cfg.neck, 3, 2);
    const int k = cfg.anchors.anchors_per_cell();
    head_ = std::make_unique<Conv2d<T>>(cfg.neck, kRawFields * k, 3, 1);
  }

  void init(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (auto& c : cbas_) c.init(rng);
    for (auto& c : lat_) c.init(rng);
    for (auto& c : smooth_) c.init(rng);
    p6_->init(rng);
    head_->init(rng);
    // Bias the foreground logit so the initial objectness prior is ~1%,
    // which keeps the focal term tame on the first steps.
    const T prior = static_cast<T>(-std::log((1.0 - 0.01) / 0.01));
    const int k = cfg_.anchors.anchors_per_cell();
    for (int s = 0; s < k; ++s) head_->b[s * kRawFields + kObjFg] = prior;
  }

  // Returns one flat row block per image: anchor-major, 9 values per anchor,
  // anchors ordered level -> row -> col -> slot to match generate_anchors.
  std::vector<std::vector<T>> forward(const Tensor<T>& x, bool train) {
    if (x.h != cfg_.input_size || x.w != cfg_.input_size ||
        x.c != cfg_.in_channels)
      throw ConfigError("network input shape mismatch");
    std::array<Tensor<T>, 3> taps;
    Tensor<T> cur = x;
    for (std::size_t i = 0; i < cbas_.size(); ++i) {
      cur = cbas_[i].forward(cur, train);
      if (i == 7) taps[0] = cur;
      else if (i == 10) taps[1] = cur;
      else if (i == 13) taps[2] = std::move(cur);
    }
    Tensor<T> l3 = lat_[0].forward(taps[0], train);
    Tensor<T> l4 = lat_[1].forward(taps[1], train);
    Tensor<T> l5 = lat_[2].forward(taps[2], train);
    Tensor<T> m4 = add_tensors(l4, upsample2x(l5));
    Tensor<T> m3 = add_tensors(l3, upsample2x(m4));
    std::array<Tensor<T>, 4> levels;
    levels[0] = head_->forward(smooth_[0].forward(m3, train), train);
    levels[1] = head_->forward(smooth_[1].forward(m4, train), train);
    levels[2] = head_->forward(smooth_[2].forward(l5, train), train);
    levels[3] = head_->forward(p6_->forward(l5, train), train);

    last_n_ = x.n;
    for (int l = 0; l < 4; ++l) level_hw_[l] = {levels[l].h, levels[l].w};
    return flatten(levels);
  }

  // grad_rows must match the layout of the last training forward.
  void backward(const std::vector<std::vector<T>>& grad_rows) {
    std::array<Tensor<T>, 4> dlevels = unflatten(grad_rows);
    // Shared head caches pop in reverse order of application.
    Tensor<T> dp6 = head_->backward(dlevels[3]);
    Tensor<T> dp5 = head_->backward(dlevels[2]);
    Tensor<T> dp4 = head_->backward(dlevels[1]);
    Tensor<T> dp3 = head_->backward(dlevels[0]);

    Tensor<T> dl5 = p6_->backward(dp6);
    Tensor<T> dm5 = smooth_[2].backward(dp5);
    Tensor<T> dm4 = smooth_[1].backward(dp4);
    Tensor<T> dm3 = smooth_[0].backward(dp3);

    accumulate(dm4, upsample2x_backward(dm3));
    accumulate(dm5, upsample2x_backward(dm4));
    accumulate(dl5, dm5);
    Tensor<T> dc3 = lat_[0].backward(dm3);
    Tensor<T> dc4 = lat_[1].backward(dm4);
    Tensor<T> dc5 = lat_[2].backward(dl5);

    Tensor<T> d = std::move(dc5);
    for (int i = 13; i >= 0; --i) {
      if (i == 10) accumulate(d, dc4);
      if (i == 7) accumulate(d, dc3);
      d = cbas_[i].backward(d);
    }
  }

  void zero_grad() {
    for (auto& p : parameters())
      std::fill(p.grad->begin(), p.grad->end(), T(0));
  }

  void clear_caches() {
    for (auto& c : cbas_) c.clear_cache();
    for (auto& c : lat_) c.clear_cache();
    for (auto& c : smooth_) c.clear_cache();
    p6_->clear_cache();
    head_->clear_cache();
  }

  std::vector<ParamRef<T>> parameters() {
    std::vector<ParamRef<T>> params, buffers;
    collect(params, buffers);
    return params;
  }
  std::vector<ParamRef<T>> buffers() {
    std::vector<ParamRef<T>> params, buffers;
    collect(params, buffers);
    return buffers;
  }

  std::size_t parameter_count() {
    std::size_t n = 0;
    for (auto& p : parameters()) n += p.value->size();
    return n;
  }

  const NetworkConfig& config() const { return cfg_; }

 private:
  void collect(std::vector<ParamRef<T>>& params,
               std::vector<ParamRef<T>>& buffers) {
    for (std::size_t i = 0; i < cbas_.size(); ++i)
      cbas_[i].collect("backbone.cba" + std::to_string(i), params, buffers);
    for (int i = 0; i < 3; ++i)
      lat_[i].collect("neck.lat" + std::to_string(i + 3), params);
    for (int i = 0; i < 3; ++i)
      smooth_[i].collect("neck.smooth" + std::to_string(i + 3), params);
    p6_->collect("neck.p6", params);
    head_->collect("head", params);
  }

  static Tensor<T> add_tensors(const Tensor<T>& a, const Tensor<T>& b) {
    if (!a.same_shape(b)) throw ConfigError("neck level shape mismatch");
    Tensor<T> out = a;
    for (std::size_t j = 0; j < out.size(); ++j) out.data[j] += b.data[j];
    return out;
  }

  static void accumulate(Tensor<T>& into, const Tensor<T>& from) {
    if (!into.same_shape(from)) throw ConfigError("gradient shape mismatch");
    for (std::size_t j = 0; j < into.size(); ++j)
      into.data[j] += from.data[j];
  }

  std::vector<std::vector<T>> flatten(
      const std::array<Tensor<T>, 4>& levels) const {
    const int k = cfg_.anchors.anchors_per_cell();
    std::size_t total = 0;
    for (const auto& lvl : levels)
      total += static_cast<std::size_t>(lvl.h) * lvl.w * k * kRawFields;
    std::vector<std::vector<T>> rows(last_n_);
    for (int in = 0; in < last_n_; ++in) {
      rows[in].resize(total);
      std::size_t idx = 0;
      for (const auto& lvl : levels)
        for (int y = 0; y < lvl.h; ++y)
          for (int x = 0; x < lvl.w; ++x)
            for (int s = 0; s < k; ++s)
              for (int f = 0; f < kRawFields; ++f)
                rows[in][idx++] = lvl.at(in, s * kRawFields + f, y, x);
    }
    return rows;
  }

  std::array<Tensor<T>, 4> unflatten(
      const std::vector<std::vector<T>>& rows) const {
    if (static_cast<int>(rows.size()) != last_n_)
      throw ConfigError("gradient batch size mismatch");
    const int k = cfg_.anchors.anchors_per_cell();
    std::array<Tensor<T>, 4> levels;
    for (int l = 0; l < 4; ++l)
      levels[l] = Tensor<T>(last_n_, kRawFields * k, level_hw_[l][0],
                            level_hw_[l][1]);
    for (int in = 0; in < last_n_; ++in) {
      std::size_t idx = 0;
      for (auto& lvl : levels)
        for (int y = 0; y < lvl.h; ++y)
          for (int x = 0; x < lvl.w; ++x)
            for (int s = 0; s < k; ++s)
              for (int f = 0; f < kRawFields; ++f)
                lvl.at(in, s * kRawFields + f, y, x) = rows[in][idx++];
    }
    return levels;
  }

  NetworkConfig cfg_;
  std::vector<Cba<T>> cbas_;
  std::vector<Conv2d<T>> lat_;
  std::vector<Conv2d<T>> smooth_;
  std::unique_ptr<Conv2d<T>> p6_;
  std::unique_ptr<Conv2d<T>> head_;
  int last_n_ = 0;
  std::array<std::array<int, 2>, 4> level_hw_{};
};

}  // namespace ladr

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ladr/tensor.hpp"

namespace ladr {

// Named view of one trainable tensor (or buffer) plus its gradient slot.
template <typename T>
struct ParamRef {
  std::string name;
  std::vector<int> shape;
  std::vector<T>* value = nullptr;
  std::vector<T>* grad = nullptr;  // null for buffers
};

// Platform-stable standard normal (Box-Muller), so seeded init does not
// depend on the library's distribution implementation.
inline double gaussian(std::mt19937_64& rng) {
  const double u1 = 1.0 - static_cast<double>(rng() >> 11) * 0x1.0p-53;
  const double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.14159265358979323846 * u2);
}

// 2-D convolution with symmetric zero padding k/2, so output spatial size is
// ceil(input / stride). Training forwards push onto a cache stack; backward
// pops, which lets one instance be applied several times per step (the shared
// detection head) as long as backwards come in reverse order.
template <typename T>
class Conv2d {
 public:
  Conv2d(int in_c, int out_c, int k, int stride, bool bias = true)
      : in_c_(in_c), out_c_(out_c), k_(k), stride_(stride), has_bias_(bias),
        w(static_cast<std::size_t>(out_c) * in_c * k * k, T(0)),
        dw(w.size(), T(0)),
        b(bias ? out_c : 0, T(0)),
        db(b.size(), T(0)) {}

  void init(std::mt19937_64& rng) {
    const double scale =
        std::sqrt(2.0 / (static_cast<double>(in_c_) * k_ * k_));
    for (auto& v : w) v = static_cast<T>(gaussian(rng) * scale);
    for (auto& v : b) v = T(0);
  }

  Tensor<T> forward(const Tensor<T>& x, bool train) {
    Tensor<T> y = run(x);
    if (train) cache_.push_back(x);
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    Tensor<T> x = std::move(cache_.back());
    cache_.pop_back();
    const int p = k_ / 2;
    const int oh = dy.h, ow = dy.w;
    const int kk = in_c_ * k_ * k_;
    Tensor<T> dx(x.n, x.c, x.h, x.w);
    std::vector<T> col(static_cast<std::size_t>(kk) * oh * ow);
    std::vector<T> dcol(col.size());
    for (int in = 0; in < x.n; ++in) {
      im2col(x, in, col.data(), oh, ow, p);
      const T* dyn = dy.data.data() +
                     static_cast<std::size_t>(in) * out_c_ * oh * ow;
      // dW += dY * col^T, db += row sums of dY.
      gemm_nt(dyn, col.data(), dw.data(), out_c_, oh * ow, kk);
      if (has_bias_) {
        for (int oc = 0; oc < out_c_; ++oc) {
          T acc = T(0);
          const T* row = dyn + static_cast<std::size_t>(oc) * oh * ow;
          for (int j = 0; j < oh * ow; ++j) acc += row[j];
          db[oc] += acc;
        }
      }
      // dcol = W^T * dY, scattered back through the padding.
      std::fill(dcol.begin(), dcol.end(), T(0));
      gemm_tn(w.data(), dyn, dcol.data(), kk, out_c_, oh * ow);
      col2im(dcol.data(), dx, in, oh, ow, p);
    }
    return dx;
  }

  void collect(const std::string& prefix, std::vector<ParamRef<T>>& out) {
    out.push_back({prefix + ".w", {out_c_, in_c_, k_, k_}, &w, &dw});
    if (has_bias_) out.push_back({prefix + ".b", {out_c_}, &b, &db});
  }

  void clear_cache() { cache_.clear(); }
  int out_channels() const { return out_c_; }

  std::vector<T> w, dw, b, db;

 private:
  Tensor<T> run(const Tensor<T>& x) const {
    const int p = k_ / 2;
    const int oh = (x.h + 2 * p - k_) / stride_ + 1;
    const int ow = (x.w + 2 * p - k_) / stride_ + 1;
    const int kk = in_c_ * k_ * k_;
    Tensor<T> y(x.n, out_c_, oh, ow);
    std::vector<T> col(static_cast<std::size_t>(kk) * oh * ow);
    for (int in = 0; in < x.n; ++in) {
      im2col(x, in, col.data(), oh, ow, p);
      T* yn = y.data.data() + static_cast<std::size_t>(in) * out_c_ * oh * ow;
      gemm(w.data(), col.data(), yn, out_c_, kk, oh * ow);
      if (has_bias_) {
        for (int oc = 0; oc < out_c_; ++oc) {
          T* row = yn + static_cast<std::size_t>(oc) * oh * ow;
          for (int j = 0; j < oh * ow; ++j) row[j] += b[oc];
        }
      }
    }
    return y;
  }

  void im2col(const Tensor<T>& x, int in, T* col, int oh, int ow,
              int p) const {
    std::size_t r = 0;
    for (int ic = 0; ic < in_c_; ++ic) {
      for (int ky = 0; ky < k_; ++ky) {
        for (int kx = 0; kx < k_; ++kx, ++r) {
          T* dst = col + r * oh * ow;
          for (int oy = 0; oy < oh; ++oy) {
            const int iy = oy * stride_ + ky - p;
            if (iy < 0 || iy >= x.h) {
              for (int ox = 0; ox < ow; ++ox) dst[oy * ow + ox] = T(0);
              continue;
            }
            for (int ox = 0; ox < ow; ++ox) {
              const int ix = ox * stride_ + kx - p;
              dst[oy * ow + ox] =
                  (ix < 0 || ix >= x.w) ? T(0) : x.at(in, ic, iy, ix);
            }
          }
        }
      }
    }
  }

  void col2im(const T* dcol, Tensor<T>& dx, int in, int oh, int ow,
              int p) const {
    std::size_t r = 0;
    for (int ic = 0; ic < in_c_; ++ic) {
      for (int ky = 0; ky < k_; ++ky) {
        for (int kx = 0; kx < k_; ++kx, ++r) {
          const T* src = dcol + r * oh * ow;
          for (int oy = 0; oy < oh; ++oy) {
            const int iy = oy * stride_ + ky - p;
            if (iy < 0 || iy >= dx.h) continue;
            for (int ox = 0; ox < ow; ++ox) {
              const int ix = ox * stride_ + kx - p;
              if (ix < 0 || ix >= dx.w) continue;
              dx.at(in, ic, iy, ix) += src[oy * ow + ox];
            }
          }
        }
      }
    }
  }

  int in_c_, out_c_, k_, stride_;
  bool has_bias_;
  std::vector<Tensor<T>> cache_;
};

// Batch normalisation over N,H,W per channel. Training uses batch statistics
// (biased variance) and folds them into the running buffers with momentum;
// eval uses the running buffers, so a freshly loaded checkpoint reproduces
// training-time outputs only through those buffers.
template <typename T>
class BatchNorm {
 public:
  explicit BatchNorm(int c)
      : c_(c), gamma(c, T(1)), beta(c, T(0)), dgamma(c, T(0)), dbeta(c, T(0)),
        run_mean(c, T(0)), run_var(c, T(1)) {}

  Tensor<T> forward(const Tensor<T>& x, bool train) {
    Tensor<T> y(x.n, x.c, x.h, x.w);
    const std::size_t plane = static_cast<std::size_t>(x.h) * x.w;
    const double m = static_cast<double>(x.n) * plane;
    Cache cache;
    if (train) {
      cache.xhat = Tensor<T>(x.n, x.c, x.h, x.w);
      cache.invstd.resize(c_);
    }
    for (int ic = 0; ic < c_; ++ic) {
      double mean, var;
      if (train) {
        double sum = 0.0, sq = 0.0;
        for (int in = 0; in < x.n; ++in) {
          const T* p = channel_ptr(x, in, ic);
          for (std::size_t j = 0; j < plane; ++j) {
            const double v = static_cast<double>(p[j]);
            sum += v;
            sq += v * v;
          }
        }
        mean = sum / m;
        var = sq / m - mean * mean;
        if (var < 0.0) var = 0.0;
        run_mean[ic] = static_cast<T>((1.0 - momentum) *
                                      static_cast<double>(run_mean[ic]) +
                                      momentum * mean);
        run_var[ic] = static_cast<T>(
            (1.0 - momentum) * static_cast<double>(run_var[ic]) +
            momentum * var);
      } else {
        mean = static_cast<double>(run_mean[ic]);
        var = static_cast<double>(run_var[ic]);
      }
      const double invstd = 1.0 / std::sqrt(var + eps);
      const double g = static_cast<double>(gamma[ic]);
      const double bt = static_cast<double>(beta[ic]);
      for (int in = 0; in < x.n; ++in) {
        const T* p = channel_ptr(x, in, ic);
        T* q = channel_ptr(y, in, ic);
        T* xh = train ? channel_ptr(cache.xhat, in, ic) : nullptr;
        for (std::size_t j = 0; j < plane; ++j) {
          const double h = (static_cast<double>(p[j]) - mean) * invstd;
          if (train) xh[j] = static_cast<T>(h);
          q[j] = static_cast<T>(g * h + bt);
        }
      }
      if (train) cache.invstd[ic] = invstd;
    }
    if (train) cache_.push_back(std::move(cache));
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    Cache cache = std::move(cache_.back());
    cache_.pop_back();
    const Tensor<T>& xhat = cache.xhat;
    Tensor<T> dx(dy.n, dy.c, dy.h, dy.w);
    const std::size_t plane = static_cast<std::size_t>(dy.h) * dy.w;
    const double m = static_cast<double>(dy.n) * plane;
    for (int ic = 0; ic < c_; ++ic) {
      double sum_dy = 0.0, sum_dy_xhat = 0.0;
      for (int in = 0; in < dy.n; ++in) {
        const T* d = channel_ptr(dy, in, ic);
        const T* xh = channel_ptr(xhat, in, ic);
        for (std::size_t j = 0; j < plane; ++j) {
          sum_dy += static_cast<double>(d[j]);
          sum_dy_xhat += static_cast<double>(d[j]) * static_cast<double>(xh[j]);
        }
      }
      dgamma[ic] += static_cast<T>(sum_dy_xhat);
      dbeta[ic] += static_cast<T>(sum_dy);
      const double scale =
          static_cast<double>(gamma[ic]) * cache.invstd[ic] / m;
      for (int in = 0; in < dy.n; ++in) {
        const T* d = channel_ptr(dy, in, ic);
        const T* xh = channel_ptr(xhat, in, ic);
        T* out = channel_ptr(dx, in, ic);
        for (std::size_t j = 0; j < plane; ++j) {
          out[j] = static_cast<T>(
              scale * (m * static_cast<double>(d[j]) - sum_dy -
                       static_cast<double>(xh[j]) * sum_dy_xhat));
        }
      }
    }
    return dx;
  }

  void collect(const std::string& prefix, std::vector<ParamRef<T>>& params,
               std::vector<ParamRef<T>>& buffers) {
    params.push_back({prefix + ".gamma", {c_}, &gamma, &dgamma});
    params.push_back({prefix + ".beta", {c_}, &beta, &dbeta});
    buffers.push_back({prefix + ".run_mean", {c_}, &run_mean, nullptr});
    buffers.push_back({prefix + ".run_var", {c_}, &run_var, nullptr});
  }

  void clear_cache() { cache_.clear(); }

  std::vector<T> gamma, beta, dgamma, dbeta, run_mean, run_var;
  double momentum = 0.1;
  double eps = 1e-5;

 private:
  struct Cache {
    Tensor<T> xhat;
    std::vector<double> invstd;
  };

  static T* channel_ptr(Tensor<T>& t, int in, int ic) {
    return t.data.data() +
           (static_cast<std::size_t>(in) * t.c + ic) * t.h * t.w;
  }
  static const T* channel_ptr(const Tensor<T>& t, int in, int ic) {
    return t.data.data() +
           (static_cast<std::size_t>(in) * t.c + ic) * t.h * t.w;
  }

  int c_;
  std::vector<Cache> cache_;
};

template <typename T>
class Relu {
 public:
  Tensor<T> forward(const Tensor<T>& x, bool train) {
    Tensor<T> y(x.n, x.c, x.h, x.w);
    std::vector<std::uint8_t> mask;
    if (train) mask.resize(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
      const bool on = x.data[j] > T(0);
      y.data[j] = on ? x.data[j] : T(0);
      if (train) mask[j] = on;
    }
    if (train) cache_.push_back(std::move(mask));
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    std::vector<std::uint8_t> mask = std::move(cache_.back());
    cache_.pop_back();
    Tensor<T> dx(dy.n, dy.c, dy.h, dy.w);
    for (std::size_t j = 0; j < dy.size(); ++j)
      dx.data[j] = mask[j] ? dy.data[j] : T(0);
    return dx;
  }

  void clear_cache() { cache_.clear(); }

 private:
  std::vector<std::vector<std::uint8_t>> cache_;
};

// Nearest-neighbour 2x upsampling; backward sums each 2x2 block.
template <typename T>
Tensor<T> upsample2x(const Tensor<T>& x) {
  Tensor<T> y(x.n, x.c, x.h * 2, x.w * 2);
  for (int in = 0; in < x.n; ++in)
    for (int ic = 0; ic < x.c; ++ic)
      for (int iy = 0; iy < x.h; ++iy)
        for (int ix = 0; ix < x.w; ++ix) {
          const T v = x.at(in, ic, iy, ix);
          y.at(in, ic, 2 * iy, 2 * ix) = v;
          y.at(in, ic, 2 * iy, 2 * ix + 1) = v;
          y.at(in, ic, 2 * iy + 1, 2 * ix) = v;
          y.at(in, ic, 2 * iy + 1, 2 * ix + 1) = v;
        }
  return y;
}

template <typename T>
Tensor<T> upsample2x_backward(const Tensor<T>& dy) {
  Tensor<T> dx(dy.n, dy.c, dy.h / 2, dy.w / 2);
  for (int in = 0; in < dy.n; ++in)
    for (int ic = 0; ic < dy.c; ++ic)
      for (int iy = 0; iy < dy.h; ++iy)
        for (int ix = 0; ix < dy.w; ++ix)
          dx.at(in, ic, iy / 2, ix / 2) += dy.at(in, ic, iy, ix);
  return dx;
}

}  // namespace ladr

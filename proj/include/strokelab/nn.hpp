#pragma once

// Minimal layers with hand-written backward passes. Parameters live in a
// caller-owned flat vector; layers only remember their offsets into it.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "strokelab/random.hpp"

namespace strokelab::nn {

using Params = std::span<const double>;
using Grads = std::span<double>;

inline double silu(double x) { return x / (1.0 + std::exp(-x)); }
inline double silu_grad(double x) {
  const double s = 1.0 / (1.0 + std::exp(-x));
  return s * (1.0 + x * (1.0 - s));
}
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// y = W x + b with W stored row-major (out x in), followed by b.
struct Dense {
  int in = 0;
  int out = 0;
  std::size_t offset = 0;

  std::size_t param_count() const { return static_cast<std::size_t>(in) * out + out; }
  void init(std::span<double> params, Rng& rng, double gain = 1.0) const;
  void forward(Params params, std::span<const double> x, std::span<double> y) const;
  /// Accumulates into dparams; writes dx when non-empty.
  void backward(Params params, std::span<const double> x, std::span<const double> dy,
                Grads dparams, std::span<double> dx) const;
};

/// 3x3 convolution, padding 1, planar (C, H, W) layout.
struct Conv3x3 {
  int in_ch = 0;
  int out_ch = 0;
  int in_h = 0;
  int in_w = 0;
  int stride = 1;
  std::size_t offset = 0;

  int out_h() const { return (in_h - 1) / stride + 1; }
  int out_w() const { return (in_w - 1) / stride + 1; }
  std::size_t in_size() const { return static_cast<std::size_t>(in_ch) * in_h * in_w; }
  std::size_t out_size() const { return static_cast<std::size_t>(out_ch) * out_h() * out_w(); }
  std::size_t param_count() const { return static_cast<std::size_t>(out_ch) * in_ch * 9 + out_ch; }
  void init(std::span<double> params, Rng& rng) const;
  void forward(Params params, std::span<const double> x, std::span<double> y) const;
  void backward(Params params, std::span<const double> x, std::span<const double> dy,
                Grads dparams, std::span<double> dx) const;
};

/// Adam with bias correction.
class Adam {
 public:
  explicit Adam(std::size_t n, double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {}

  void step(std::span<double> params, std::span<const double> grad);
  void set_lr(double lr) { lr_ = lr; }
  double lr() const { return lr_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::vector<double> m_, v_;
  long steps_ = 0;
};

}  // namespace strokelab::nn

#include "strokelab/nn.hpp"

namespace strokelab::nn {

void Dense::init(std::span<double> params, Rng& rng, double gain) const {
  const double scale = gain * std::sqrt(1.0 / in);
  double* w = params.data() + offset;
  for (std::size_t i = 0; i < static_cast<std::size_t>(in) * out; ++i) w[i] = scale * rng.normal();
  for (int i = 0; i < out; ++i) w[static_cast<std::size_t>(in) * out + i] = 0.0;
}

void Dense::forward(Params params, std::span<const double> x, std::span<double> y) const {
  const double* w = params.data() + offset;
  const double* b = w + static_cast<std::size_t>(in) * out;
  for (int o = 0; o < out; ++o) {
    const double* row = w + static_cast<std::size_t>(o) * in;
    double acc = b[o];
    for (int i = 0; i < in; ++i) acc += row[i] * x[i];
    y[o] = acc;
  }
}

void Dense::backward(Params params, std::span<const double> x, std::span<const double> dy,
                     Grads dparams, std::span<double> dx) const {
  const double* w = params.data() + offset;
  double* dw = dparams.data() + offset;
  double* db = dw + static_cast<std::size_t>(in) * out;
  for (int o = 0; o < out; ++o) {
    const double g = dy[o];
    if (g == 0.0) continue;
    double* drow = dw + static_cast<std::size_t>(o) * in;
    for (int i = 0; i < in; ++i) drow[i] += g * x[i];
    db[o] += g;
  }
  if (dx.empty()) return;
  for (int i = 0; i < in; ++i) dx[i] = 0.0;
  for (int o = 0; o < out; ++o) {
    const double g = dy[o];
    if (g == 0.0) continue;
    const double* row = w + static_cast<std::size_t>(o) * in;
    for (int i = 0; i < in; ++i) dx[i] += g * row[i];
  }
}

void Conv3x3::init(std::span<double> params, Rng& rng) const {
  const double scale = std::sqrt(2.0 / (in_ch * 9.0));
  double* w = params.data() + offset;
  const std::size_t nw = static_cast<std::size_t>(out_ch) * in_ch * 9;
  for (std::size_t i = 0; i < nw; ++i) w[i] = scale * rng.normal();
  for (int i = 0; i < out_ch; ++i) w[nw + i] = 0.0;
}

void Conv3x3::forward(Params params, std::span<const double> x, std::span<double> y) const {
  const double* w = params.data() + offset;
  const double* b = w + static_cast<std::size_t>(out_ch) * in_ch * 9;
  const int oh = out_h(), ow = out_w();
  for (int oc = 0; oc < out_ch; ++oc) {
    double* yp = y.data() + static_cast<std::size_t>(oc) * oh * ow;
    for (int i = 0; i < oh * ow; ++i) yp[i] = b[oc];
    for (int ic = 0; ic < in_ch; ++ic) {
      const double* k = w + (static_cast<std::size_t>(oc) * in_ch + ic) * 9;
      const double* xp = x.data() + static_cast<std::size_t>(ic) * in_h * in_w;
      for (int oy = 0; oy < oh; ++oy) {
        for (int ky = 0; ky < 3; ++ky) {
          const int iy = oy * stride + ky - 1;
          if (iy < 0 || iy >= in_h) continue;
          for (int ox = 0; ox < ow; ++ox) {
            double acc = 0.0;
            for (int kx = 0; kx < 3; ++kx) {
              const int ix = ox * stride + kx - 1;
              if (ix < 0 || ix >= in_w) continue;
              acc += k[ky * 3 + kx] * xp[iy * in_w + ix];
            }
            yp[oy * ow + ox] += acc;
          }
        }
      }
    }
  }
}

void Conv3x3::backward(Params params, std::span<const double> x, std::span<const double> dy,
                       Grads dparams, std::span<double> dx) const {
  const double* w = params.data() + offset;
  double* dw = dparams.data() + offset;
  double* db = dw + static_cast<std::size_t>(out_ch) * in_ch * 9;
  const int oh = out_h(), ow = out_w();
  if (!dx.empty())
    for (auto& v : dx) v = 0.0;
  for (int oc = 0; oc < out_ch; ++oc) {
    const double* gp = dy.data() + static_cast<std::size_t>(oc) * oh * ow;
    double gsum = 0.0;
    for (int i = 0; i < oh * ow; ++i) gsum += gp[i];
    db[oc] += gsum;
    for (int ic = 0; ic < in_ch; ++ic) {
      const double* k = w + (static_cast<std::size_t>(oc) * in_ch + ic) * 9;
      double* dk = dw + (static_cast<std::size_t>(oc) * in_ch + ic) * 9;
      const double* xp = x.data() + static_cast<std::size_t>(ic) * in_h * in_w;
      double* dxp = dx.empty() ? nullptr : dx.data() + static_cast<std::size_t>(ic) * in_h * in_w;
      for (int oy = 0; oy < oh; ++oy) {
        for (int ky = 0; ky < 3; ++ky) {
          const int iy = oy * stride + ky - 1;
          if (iy < 0 || iy >= in_h) continue;
          for (int ox = 0; ox < ow; ++ox) {
            const double g = gp[oy * ow + ox];
            for (int kx = 0; kx < 3; ++kx) {
              const int ix = ox * stride + kx - 1;
              if (ix < 0 || ix >= in_w) continue;
              dk[ky * 3 + kx] += g * xp[iy * in_w + ix];
              if (dxp) dxp[iy * in_w + ix] += g * k[ky * 3 + kx];
            }
          }
        }
      }
    }
  }
}

void Adam::step(std::span<double> params, std::span<const double> grad) {
  ++steps_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
  }
}

}  // namespace strokelab::nn

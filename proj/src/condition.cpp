#include "strokelab/condition.hpp"

#include <cmath>

#include "strokelab/error.hpp"

namespace strokelab {

ConditionProjector::ConditionProjector(int input_dim, int output_dim, Rng& rng)
    : in_(input_dim), out_(output_dim), w_(static_cast<std::size_t>(input_dim) * output_dim) {
  require(in_ > 0 && out_ > 0, ErrorKind::Config, "projector dimensions must be positive");
  const double scale = 1.0 / std::sqrt(static_cast<double>(in_));
  for (auto& v : w_) v = scale * rng.normal();
}

ConditionProjector::ConditionProjector(int input_dim, int output_dim, std::vector<double> weights)
    : in_(input_dim), out_(output_dim), w_(std::move(weights)) {
  require(w_.size() == static_cast<std::size_t>(in_) * out_, ErrorKind::Contract,
          "projector weight count mismatch");
}

std::vector<double> ConditionProjector::concat(std::span<const double> stroke_params,
                                               std::span<const double> context) {
  std::vector<double> out(stroke_params.begin(), stroke_params.end());
  out.insert(out.end(), context.begin(), context.end());
  return out;
}

std::vector<double> ConditionProjector::project(std::span<const double> features) const {
  require(static_cast<int>(features.size()) == in_, ErrorKind::Contract,
          "projector input size mismatch");
  std::vector<double> z(out_, 0.0);
  for (int o = 0; o < out_; ++o) {
    double acc = 0.0;
    for (int i = 0; i < in_; ++i) acc += w_[static_cast<std::size_t>(o) * in_ + i] * features[i];
    z[o] = acc;
  }
  return z;
}

void ConditionProjector::accumulate_gradient(std::span<const double> features,
                                             std::span<const double> dz,
                                             std::span<double> dw) const {
  for (int o = 0; o < out_; ++o)
    for (int i = 0; i < in_; ++i) dw[static_cast<std::size_t>(o) * in_ + i] += dz[o] * features[i];
}

}  // namespace strokelab

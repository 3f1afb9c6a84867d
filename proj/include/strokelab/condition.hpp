#pragma once

#include <span>
#include <vector>

#include "strokelab/random.hpp"

namespace strokelab {

/// z = W [c_p ; c]: linear projection of the concatenated stroke parameters
/// and context features into the denoiser's conditioning slot.
class ConditionProjector {
 public:
  ConditionProjector(int input_dim, int output_dim, Rng& rng);
  ConditionProjector(int input_dim, int output_dim, std::vector<double> weights);

  int input_dim() const { return in_; }
  int output_dim() const { return out_; }
  std::span<const double> weights() const { return w_; }
  std::span<double> weights() { return w_; }

  static std::vector<double> concat(std::span<const double> stroke_params,
                                    std::span<const double> context);

  std::vector<double> project(std::span<const double> features) const;
  /// Accumulates dL/dW given dL/dz.
  void accumulate_gradient(std::span<const double> features, std::span<const double> dz,
                           std::span<double> dw) const;

 private:
  int in_;
  int out_;
  std::vector<double> w_;  // row-major out x in
};

}  // namespace strokelab

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "strokelab/nn.hpp"
#include "strokelab/random.hpp"
#include "strokelab/smr.hpp"

namespace strokelab {

/// Feed-forward tau-predictor: [x_t', sinusoidal(t), z] -> hidden -> tau_hat.
struct DenoiserArch {
  int data_dim = 256;
  int time_embed = 16;
  int cond_dim = 0;
  std::vector<int> hidden{128, 128};
  std::string activation = "silu";

  int input_dim() const { return data_dim + time_embed + cond_dim; }
  nlohmann::json to_json() const;
  static DenoiserArch from_json(const nlohmann::json& j);
};

/// One regression example: predict `target` from (x, t, cond).
struct DenoiserExample {
  Tensor x;
  int t = 0;
  Tensor target;
  Tensor cond;  // empty when the model is unconditional
};

/// Sinusoidal features of the timestep; first half sines, second half cosines.
std::vector<double> timestep_embedding(int t, int dims);

class Denoiser {
 public:
  Denoiser(DenoiserArch arch, Rng& rng);
  Denoiser(DenoiserArch arch, std::vector<double> params);

  const DenoiserArch& arch() const { return arch_; }
  std::span<const double> params() const { return params_; }
  std::span<double> params() { return params_; }
  std::size_t param_count() const { return params_.size(); }

  Tensor forward(TensorView x, int t, TensorView cond = {}) const;

  /// Squared error averaged over elements for one example. Accumulates
  /// d(loss)/d(theta) into `grad` and, when non-empty, writes
  /// d(loss)/d(cond) into `cond_grad`.
  double example_loss_gradient(const DenoiserExample& ex, std::span<double> grad,
                               std::span<double> cond_grad = {}) const;

 private:
  void build_layers();
  void assemble_input(TensorView x, int t, TensorView cond, std::span<double> in) const;

  DenoiserArch arch_;
  std::vector<nn::Dense> layers_;
  std::vector<double> params_;
};

/// Mean over the batch of per-example losses, with its gradient written to
/// `grad` (overwritten). Serial reference implementation.
double batch_loss_gradient_serial(const Denoiser& model, std::span<const DenoiserExample> batch,
                                  std::span<double> grad);

/// OpenMP version. The batch is split into a fixed number of chunks whose
/// partial gradients are summed in chunk order, so results do not depend on
/// the thread count.
double batch_loss_gradient_omp(const Denoiser& model, std::span<const DenoiserExample> batch,
                               std::span<double> grad);

}  // namespace strokelab

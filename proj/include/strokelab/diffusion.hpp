#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "strokelab/condition.hpp"
#include "strokelab/denoiser.hpp"
#include "strokelab/smr.hpp"

namespace strokelab {

/// How the visual prior is injected during training.
enum class PriorMode {
  Stochastic,  // eta drawn per instance, x_s a random other sample
  Linear,      // deterministic sqrt(eta) curves over t
  Cosine,
  Ellipse,
  X0,          // degenerate: x_s := x0, eta drawn per instance
};

PriorMode parse_prior_mode(const std::string& s);
std::string to_string(PriorMode m);

/// Denoiser regression example built from a forward draw: input x_t',
/// target tau computed from the draw's combined noise so that
/// x_t' = sqrt(abar) x0 + sqrt(1 - abar) tau holds exactly.
DenoiserExample make_tau_example(const SmrDraw& draw, TensorView cond = {});

struct LossWithGradient {
  double loss = 0.0;
  std::vector<double> grad;
};

/// L_tau: mean squared error between tau targets and denoiser outputs.
LossWithGradient smr_training_loss(const Denoiser& model, std::span<const SmrDraw> draws);

struct TrainingImage {
  Tensor pixels;           // data range [-1, 1]
  Tensor cond_features;    // [c_p ; c], empty for unconditional training
};

struct DiffusionTrainConfig {
  SmrConfig smr;
  PriorMode prior_mode = PriorMode::Stochastic;
  int epochs = 120;
  int batch_size = 32;
  double learning_rate = 1e-3;
  double lr_decay = 0.99;  // per epoch
  std::vector<int> hidden{256, 256};
  int time_embed = 16;
  int cond_dim = 0;        // projector output size; 0 disables conditioning
  std::uint64_t seed = 0;
  bool parallel = true;
};

struct DiffusionTrainResult {
  Denoiser model;
  std::optional<ConditionProjector> projector;
  std::vector<double> epoch_loss;
  std::vector<double> step_loss;
};

/// Trains a tau-predictor. Each data sample is paired with `prior_pairs`
/// priors per epoch; per-pair randomness comes from streams keyed by
/// (seed, epoch, sample, pair). Starts from `init` when given.
DiffusionTrainResult train_diffusion(std::span<const TrainingImage> dataset,
                                     const DiffusionTrainConfig& config,
                                     const NoiseSchedule& sched,
                                     std::optional<Denoiser> init = std::nullopt);

/// Mean of the first and last `window` entries; returns last / first.
double smoothed_loss_ratio(std::span<const double> losses, std::size_t window);

/// Noise (tau) estimate for the current state at step t.
using TauPredictor = std::function<Tensor(TensorView x, int t)>;

struct SamplerOptions {
  bool inject_variance = true;
  bool clip_output = true;
  double clip_lo = -1.0;
  double clip_hi = 1.0;
};

/// eta = 0 ancestral sampling: x_T ~ N(0, I); for t >= 1 step to the DDPM
/// posterior mean (the simplified eps form with tau_hat as eps) plus the
/// posterior variance; at t = 0 return recover_x0.
Tensor ancestral_sample(const TauPredictor& predictor, const NoiseSchedule& sched,
                        std::uint64_t seed, std::size_t dim, const SamplerOptions& opts = {});

/// Same, starting from a given x_T and drawing step noise from `rng`.
Tensor ancestral_sample_from(const TauPredictor& predictor, const NoiseSchedule& sched,
                             Tensor x_T, Rng& rng, const SamplerOptions& opts = {});

TauPredictor as_predictor(const Denoiser& model, TensorView cond = {});

}  // namespace strokelab

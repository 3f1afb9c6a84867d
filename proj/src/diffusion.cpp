#include "strokelab/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "strokelab/error.hpp"

namespace strokelab {

PriorMode parse_prior_mode(const std::string& s) {
  if (s == "stochastic") return PriorMode::Stochastic;
  if (s == "linear") return PriorMode::Linear;
  if (s == "cosine") return PriorMode::Cosine;
  if (s == "ellipse") return PriorMode::Ellipse;
  if (s == "x0") return PriorMode::X0;
  fail(ErrorKind::Config, "unknown prior mode '" + s + "'");
}

std::string to_string(PriorMode m) {
  switch (m) {
    case PriorMode::Stochastic: return "stochastic";
    case PriorMode::Linear: return "linear";
    case PriorMode::Cosine: return "cosine";
    case PriorMode::Ellipse: return "ellipse";
    case PriorMode::X0: return "x0";
  }
  return "?";
}

DenoiserExample make_tau_example(const SmrDraw& draw, TensorView cond) {
  DenoiserExample ex;
  ex.x = draw.x_t_prime;
  ex.t = draw.t;
  ex.target = tau_target(draw.combined_noise(), draw.x_s, draw.eta).tau;
  ex.cond.assign(cond.begin(), cond.end());
  return ex;
}

LossWithGradient smr_training_loss(const Denoiser& model, std::span<const SmrDraw> draws) {
  require(!draws.empty(), ErrorKind::Contract, "training loss needs a non-empty batch");
  std::vector<DenoiserExample> batch;
  batch.reserve(draws.size());
  for (const auto& d : draws) batch.push_back(make_tau_example(d));
  LossWithGradient out;
  out.grad.assign(model.param_count(), 0.0);
  out.loss = batch_loss_gradient_serial(model, batch, out.grad);
  return out;
}

namespace {

double eta_for(PriorMode mode, int t, int steps, const SmrConfig& smr, Rng& rng) {
  if (mode == PriorMode::Stochastic || mode == PriorMode::X0) return make_eta(rng, smr);
  const double w_max = smr.eta_sampling == EtaSampling::EtaUniform ? std::sqrt(smr.upsilon)
                                                                   : smr.upsilon;
  const PriorCurve curve = mode == PriorMode::Linear   ? PriorCurve::Linear
                           : mode == PriorMode::Cosine ? PriorCurve::Cosine
                                                       : PriorCurve::Ellipse;
  const double w = deterministic_prior_weight(t, steps, curve, w_max);
  return w * w;
}

struct PairSpec {
  std::size_t sample;
  std::size_t pair;
};

}  // namespace

DiffusionTrainResult train_diffusion(std::span<const TrainingImage> dataset,
                                     const DiffusionTrainConfig& config,
                                     const NoiseSchedule& sched, std::optional<Denoiser> init) {
  require(!dataset.empty(), ErrorKind::Contract, "training dataset is empty");
  config.smr.validate();
  require(config.epochs >= 1 && config.batch_size >= 1, ErrorKind::Config,
          "epochs and batch size must be positive");
  const std::size_t dim = dataset[0].pixels.size();
  const std::size_t feat_dim = dataset[0].cond_features.size();
  for (const auto& s : dataset) {
    require(s.pixels.size() == dim, ErrorKind::Contract, "dataset images differ in size");
    require(s.cond_features.size() == feat_dim, ErrorKind::Contract,
            "dataset condition features differ in size");
  }
  const bool conditional = config.cond_dim > 0;
  require(!conditional || feat_dim > 0, ErrorKind::Config,
          "conditional training needs per-sample condition features");

  Rng init_rng = Rng::derive(config.seed, 0xD1FFu);
  DenoiserArch arch;
  arch.data_dim = static_cast<int>(dim);
  arch.time_embed = config.time_embed;
  arch.cond_dim = config.cond_dim;
  arch.hidden = config.hidden;

  DiffusionTrainResult result{init ? std::move(*init) : Denoiser(arch, init_rng), std::nullopt, {}, {}};
  require(result.model.arch().data_dim == static_cast<int>(dim), ErrorKind::Contract,
          "initial model does not match data dimension");
  if (conditional)
    result.projector.emplace(static_cast<int>(feat_dim), config.cond_dim, init_rng);

  Denoiser& model = result.model;
  nn::Adam opt(model.param_count(), config.learning_rate);
  std::optional<nn::Adam> proj_opt;
  if (conditional) proj_opt.emplace(result.projector->weights().size(), config.learning_rate);

  const int steps = sched.steps();
  std::vector<double> grad(model.param_count());
  std::vector<double> proj_grad(conditional ? result.projector->weights().size() : 0);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<PairSpec> pairs;
    pairs.reserve(dataset.size() * config.smr.prior_pairs);
    for (std::size_t i = 0; i < dataset.size(); ++i)
      for (int p = 0; p < config.smr.prior_pairs; ++p) pairs.push_back({i, static_cast<std::size_t>(p)});
    Rng shuffle_rng = Rng::derive(config.seed, 0x5A0000u + epoch);
    std::shuffle(pairs.begin(), pairs.end(), shuffle_rng.engine());

    double epoch_sum = 0.0;
    std::size_t epoch_batches = 0;
    for (std::size_t start = 0; start < pairs.size(); start += config.batch_size) {
      const std::size_t end = std::min(pairs.size(), start + config.batch_size);
      std::vector<DenoiserExample> batch;
      std::vector<const Tensor*> features;
      batch.reserve(end - start);
      for (std::size_t k = start; k < end; ++k) {
        const auto [si, pi] = pairs[k];
        const std::uint64_t stream =
            (static_cast<std::uint64_t>(epoch) << 40) ^ (static_cast<std::uint64_t>(si) << 12) ^ pi;
        Rng rng = Rng::derive(config.seed, stream);
        const TrainingImage& sample = dataset[si];
        const Tensor& prior = config.prior_mode == PriorMode::X0
                                  ? sample.pixels
                                  : dataset[rng.index(dataset.size())].pixels;
        const int t = static_cast<int>(rng.index(steps));
        const double eta = eta_for(config.prior_mode, t, steps, config.smr, rng);
        const SmrDraw draw = smr_forward_sample(sample.pixels, prior, t, eta, sched, rng);
        Tensor z;
        if (conditional) z = result.projector->project(sample.cond_features);
        batch.push_back(make_tau_example(draw, z));
        features.push_back(&sample.cond_features);
      }

      double loss = 0.0;
      if (!conditional) {
        loss = config.parallel ? batch_loss_gradient_omp(model, batch, grad)
                               : batch_loss_gradient_serial(model, batch, grad);
      } else {
        std::fill(grad.begin(), grad.end(), 0.0);
        std::fill(proj_grad.begin(), proj_grad.end(), 0.0);
        std::vector<double> dz(config.cond_dim);
        for (std::size_t k = 0; k < batch.size(); ++k) {
          loss += model.example_loss_gradient(batch[k], grad, dz);
          result.projector->accumulate_gradient(*features[k], dz, proj_grad);
        }
        const double inv = 1.0 / static_cast<double>(batch.size());
        loss *= inv;
        for (auto& g : grad) g *= inv;
        for (auto& g : proj_grad) g *= inv;
      }
      if (!std::isfinite(loss))
        fail(ErrorKind::Numerical, "training diverged: non-finite loss at epoch " +
                                       std::to_string(epoch) + ", batch " +
                                       std::to_string(epoch_batches));
      opt.step(model.params(), grad);
      if (conditional) proj_opt->step(result.projector->weights(), proj_grad);
      result.step_loss.push_back(loss);
      epoch_sum += loss;
      ++epoch_batches;
    }
    result.epoch_loss.push_back(epoch_sum / static_cast<double>(epoch_batches));
    opt.set_lr(opt.lr() * config.lr_decay);
    if (proj_opt) proj_opt->set_lr(proj_opt->lr() * config.lr_decay);
  }
  return result;
}

double smoothed_loss_ratio(std::span<const double> losses, std::size_t window) {
  require(!losses.empty() && window >= 1, ErrorKind::Contract, "no losses to smooth");
  window = std::min(window, losses.size());
  const double first = std::accumulate(losses.begin(), losses.begin() + window, 0.0) / window;
  const double last = std::accumulate(losses.end() - window, losses.end(), 0.0) / window;
  return last / first;
}

Tensor ancestral_sample_from(const TauPredictor& predictor, const NoiseSchedule& sched,
                             Tensor x, Rng& rng, const SamplerOptions& opts) {
  const int T = sched.steps();
  for (int t = T - 1; t >= 1; --t) {
    const Tensor tau_hat = predictor(x, t);
    Tensor mean = ddpm_posterior_mean_simplified(x, tau_hat, t, sched);
    if (opts.inject_variance) {
      const double var = (1.0 - sched.alpha[t]) * (1.0 - sched.alpha_bar[t - 1]) /
                         (1.0 - sched.alpha_bar[t]);
      const double sd = std::sqrt(var);
      for (auto& v : mean) v += sd * rng.normal();
    }
    for (double v : mean)
      if (!std::isfinite(v))
        fail(ErrorKind::Numerical, "sampling produced a non-finite value at step " +
                                       std::to_string(t));
    x = std::move(mean);
  }
  Tensor out = recover_x0(x, predictor(x, 0), 0, sched);
  for (double v : out)
    if (!std::isfinite(v))
      fail(ErrorKind::Numerical, "sampling produced a non-finite value at step 0");
  if (opts.clip_output)
    for (auto& v : out) v = std::clamp(v, opts.clip_lo, opts.clip_hi);
  return out;
}

Tensor ancestral_sample(const TauPredictor& predictor, const NoiseSchedule& sched,
                        std::uint64_t seed, std::size_t dim, const SamplerOptions& opts) {
  Rng rng(seed);
  Tensor x = rng.normal_vector(dim);
  return ancestral_sample_from(predictor, sched, std::move(x), rng, opts);
}

TauPredictor as_predictor(const Denoiser& model, TensorView cond) {
  Tensor c(cond.begin(), cond.end());
  return [&model, c](TensorView x, int t) { return model.forward(x, t, c); };
}

}  // namespace strokelab

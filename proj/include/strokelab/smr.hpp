#pragma once

// Smooth-regularized forward process: a visual prior x_s and compensating
// fresh noise eps* are mixed into every noisy state,
//
//   x_t' = x_t + sqrt(1 - abar_t) sqrt(eta) x_s - sqrt(1 - abar_t) sqrt(eta) eps*
//   x_t  = sqrt(abar_t) x0 + sqrt(1 - abar_t) eps
//
// with eta drawn once per training instance. eta = 0 recovers plain DDPM.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "strokelab/random.hpp"
#include "strokelab/schedule.hpp"

namespace strokelab {

using Tensor = std::vector<double>;
using TensorView = std::span<const double>;

enum class EtaSampling {
  EtaUniform,      // eta ~ U[0, upsilon)
  SqrtEtaUniform,  // sqrt(eta) ~ U[0, upsilon)
};

EtaSampling parse_eta_sampling(const std::string& s);
std::string to_string(EtaSampling m);

struct SmrConfig {
  double upsilon = 0.5;
  EtaSampling eta_sampling = EtaSampling::EtaUniform;
  int prior_pairs = 32;

  void validate() const;
};

struct SmrDraw {
  Tensor x0;
  Tensor x_s;
  int t = 0;
  double eta = 0.0;
  Tensor eps;
  Tensor eps_star;
  Tensor x_t_prime;

  /// (eps - sqrt(eta) eps*) / sqrt(1 + eta): the single standard-normal
  /// noise that, together with x_s, reproduces x_t' exactly.
  Tensor combined_noise() const;
};

struct GaussianMoments {
  Tensor mean;
  double variance = 0.0;  // isotropic
};

struct TauTarget {
  Tensor tau;
};

/// Plain DDPM marginal draw sqrt(abar_t) x0 + sqrt(1 - abar_t) eps.
Tensor ddpm_forward(TensorView x0, TensorView eps, int t, const NoiseSchedule& sched);

/// SmR forward draw with caller-supplied noise.
SmrDraw smr_forward_from_noise(TensorView x0, TensorView x_s, int t, double eta,
                               TensorView eps, TensorView eps_star,
                               const NoiseSchedule& sched);

/// SmR forward draw; eps and eps* are drawn from `rng` (eps first).
SmrDraw smr_forward_sample(TensorView x0, TensorView x_s, int t, double eta,
                           const NoiseSchedule& sched, Rng& rng);

/// q(x_t' | x0): mean sqrt(abar) x0 + sqrt(1-abar) sqrt(eta) x_s, variance (1+eta)(1-abar).
GaussianMoments smr_marginal_moments(TensorView x0, TensorView x_s, int t, double eta,
                                     const NoiseSchedule& sched);

/// q(x_t' | x_{t-1}') treating the three noise terms as independent. Requires t >= 1.
GaussianMoments smr_transition_moments(TensorView x_prev, TensorView x_s, int t,
                                       double eta, const NoiseSchedule& sched);

/// Affine-Gaussian form of the transition: x_t' ~ N(gain * x_{t-1}' + offset, variance).
struct LinearGaussian {
  double gain = 0.0;
  Tensor offset;
  double variance = 0.0;
};
LinearGaussian smr_transition_affine(TensorView x_s, int t, double eta,
                                     const NoiseSchedule& sched);

/// q(x_{t-1}' | x_t', x0) by Gaussian conjugacy between the transition and
/// the marginal at t-1. Requires t >= 1.
GaussianMoments smr_posterior_moments(TensorView x_t, TensorView x0, TensorView x_s,
                                      int t, double eta, const NoiseSchedule& sched);

/// Reference DDPM posterior (the eta = 0 closed form).
GaussianMoments ddpm_posterior_moments(TensorView x_t, TensorView x0, int t,
                                       const NoiseSchedule& sched);

/// 1 - abar_t + (1 + 2 alpha_t - 3 abar_t) eta: the posterior normalizer.
double smr_posterior_denominator(int t, double eta, const NoiseSchedule& sched);

TauTarget tau_target(TensorView eps, TensorView x_s, double eta);

/// x0 = (x_t' - sqrt(1 - abar_t) tau) / sqrt(abar_t).
Tensor recover_x0(TensorView x_t, TensorView tau, int t, const NoiseSchedule& sched);

/// (1/sqrt(alpha_t)) (x_t - (1 - alpha_t)/sqrt(1 - abar_t) eps). Requires t >= 1.
Tensor ddpm_posterior_mean_simplified(TensorView x_t, TensorView eps, int t,
                                      const NoiseSchedule& sched);

/// sqrt(SNR) per step with the prior counted as signal, assuming unit-power
/// x0 and x_s: SNR = (abar + eta (1 - abar)) / ((1 + eta)(1 - abar)).
/// Steps with abar == 1 report +infinity.
std::vector<double> snr_trajectory(const NoiseSchedule& sched, double eta_eff);

/// One eta per training instance.
double make_eta(Rng& rng, const SmrConfig& config);

enum class PriorCurve { Linear, Cosine, Ellipse };

PriorCurve parse_prior_curve(const std::string& s);
std::string to_string(PriorCurve c);

/// Fixed sqrt(eta) weight at step t for the deterministic-injection baselines.
double deterministic_prior_weight(int t, int steps, PriorCurve kind, double w_max = 1.0);

}  // namespace strokelab

#include "strokelab/smr.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "strokelab/error.hpp"

namespace strokelab {

namespace {

void check_step(int t, const NoiseSchedule& sched) {
  require(t >= 0 && t < sched.steps(), ErrorKind::Contract,
          "timestep " + std::to_string(t) + " outside [0, " +
              std::to_string(sched.steps()) + ")");
}

void check_same_size(TensorView a, TensorView b, const char* what) {
  require(a.size() == b.size(), ErrorKind::Contract,
          std::string("shape mismatch: ") + what);
}

void check_eta(double eta) {
  require(eta >= 0.0 && std::isfinite(eta), ErrorKind::Contract,
          "eta must be finite and non-negative");
}

}  // namespace

EtaSampling parse_eta_sampling(const std::string& s) {
  if (s == "eta_uniform") return EtaSampling::EtaUniform;
  if (s == "sqrt_eta_uniform") return EtaSampling::SqrtEtaUniform;
  fail(ErrorKind::Config, "unknown eta sampling mode '" + s + "'");
}

std::string to_string(EtaSampling m) {
  return m == EtaSampling::EtaUniform ? "eta_uniform" : "sqrt_eta_uniform";
}

void SmrConfig::validate() const {
  require(upsilon >= 0.0 && upsilon < 1.0, ErrorKind::Config,
          "upsilon must lie in [0, 1)");
  require(prior_pairs >= 1, ErrorKind::Config, "prior_pairs must be >= 1");
}

Tensor SmrDraw::combined_noise() const {
  Tensor out(eps.size());
  const double se = std::sqrt(eta);
  const double norm = 1.0 / std::sqrt(1.0 + eta);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (eps[i] - se * eps_star[i]) * norm;
  return out;
}

Tensor ddpm_forward(TensorView x0, TensorView eps, int t, const NoiseSchedule& sched) {
  check_step(t, sched);
  check_same_size(x0, eps, "x0 vs eps");
  const double a = std::sqrt(sched.alpha_bar[t]);
  const double s = std::sqrt(1.0 - sched.alpha_bar[t]);
  Tensor out(x0.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * x0[i] + s * eps[i];
  return out;
}

SmrDraw smr_forward_from_noise(TensorView x0, TensorView x_s, int t, double eta,
                               TensorView eps, TensorView eps_star,
                               const NoiseSchedule& sched) {
  check_step(t, sched);
  check_eta(eta);
  check_same_size(x0, x_s, "x0 vs x_s");
  check_same_size(x0, eps, "x0 vs eps");
  check_same_size(x0, eps_star, "x0 vs eps*");

  SmrDraw d;
  d.x0.assign(x0.begin(), x0.end());
  d.x_s.assign(x_s.begin(), x_s.end());
  d.t = t;
  d.eta = eta;
  d.eps.assign(eps.begin(), eps.end());
  d.eps_star.assign(eps_star.begin(), eps_star.end());

  d.x_t_prime = ddpm_forward(x0, eps, t, sched);
  const double k = std::sqrt(1.0 - sched.alpha_bar[t]) * std::sqrt(eta);
  for (std::size_t i = 0; i < d.x_t_prime.size(); ++i)
    d.x_t_prime[i] += k * x_s[i] - k * eps_star[i];
  return d;
}

SmrDraw smr_forward_sample(TensorView x0, TensorView x_s, int t, double eta,
                           const NoiseSchedule& sched, Rng& rng) {
  const Tensor eps = rng.normal_vector(x0.size());
  const Tensor eps_star = rng.normal_vector(x0.size());
  return smr_forward_from_noise(x0, x_s, t, eta, eps, eps_star, sched);
}

GaussianMoments smr_marginal_moments(TensorView x0, TensorView x_s, int t, double eta,
                                     const NoiseSchedule& sched) {
  check_step(t, sched);
  check_eta(eta);
  check_same_size(x0, x_s, "x0 vs x_s");
  const double abar = sched.alpha_bar[t];
  const double a = std::sqrt(abar);
  const double k = std::sqrt(1.0 - abar) * std::sqrt(eta);
  GaussianMoments m;
  m.mean.resize(x0.size());
  for (std::size_t i = 0; i < x0.size(); ++i) m.mean[i] = a * x0[i] + k * x_s[i];
  m.variance = (1.0 + eta) * (1.0 - abar);
  return m;
}

LinearGaussian smr_transition_affine(TensorView x_s, int t, double eta,
                                     const NoiseSchedule& sched) {
  check_step(t, sched);
  check_eta(eta);
  require(t >= 1, ErrorKind::Contract, "transition at t = 0 has no predecessor");
  const double alpha = sched.alpha[t];
  const double abar = sched.alpha_bar[t];
  const double abar_prev = sched.alpha_bar[t - 1];
  const double se = std::sqrt(eta);

  LinearGaussian g;
  g.gain = std::sqrt(alpha);
  const double c = (std::sqrt(1.0 - abar) - std::sqrt(alpha) * std::sqrt(1.0 - abar_prev)) * se;
  g.offset.resize(x_s.size());
  for (std::size_t i = 0; i < x_s.size(); ++i) g.offset[i] = c * x_s[i];
  g.variance = (1.0 + alpha - 2.0 * abar) * eta + 1.0 - alpha;
  return g;
}

GaussianMoments smr_transition_moments(TensorView x_prev, TensorView x_s, int t,
                                       double eta, const NoiseSchedule& sched) {
  check_same_size(x_prev, x_s, "x_prev vs x_s");
  const LinearGaussian g = smr_transition_affine(x_s, t, eta, sched);
  GaussianMoments m;
  m.mean.resize(x_prev.size());
  for (std::size_t i = 0; i < x_prev.size(); ++i) m.mean[i] = g.gain * x_prev[i] + g.offset[i];
  m.variance = g.variance;
  return m;
}

GaussianMoments smr_posterior_moments(TensorView x_t, TensorView x0, TensorView x_s,
                                      int t, double eta, const NoiseSchedule& sched) {
  require(t >= 1, ErrorKind::Contract, "posterior at t = 0 is undefined");
  check_same_size(x_t, x0, "x_t vs x0");
  const LinearGaussian tr = smr_transition_affine(x_s, t, eta, sched);
  const GaussianMoments prior = smr_marginal_moments(x0, x_s, t - 1, eta, sched);

  const double a = tr.gain;
  const double s1 = tr.variance;
  const double s2 = prior.variance;
  const double denom = a * a * s2 + s1;

  GaussianMoments post;
  post.variance = s1 * s2 / denom;
  post.mean.resize(x_t.size());
  for (std::size_t i = 0; i < x_t.size(); ++i)
    post.mean[i] = (a * (x_t[i] - tr.offset[i]) * s2 + prior.mean[i] * s1) / denom;
  return post;
}

GaussianMoments ddpm_posterior_moments(TensorView x_t, TensorView x0, int t,
                                       const NoiseSchedule& sched) {
  check_step(t, sched);
  require(t >= 1, ErrorKind::Contract, "posterior at t = 0 is undefined");
  check_same_size(x_t, x0, "x_t vs x0");
  const double alpha = sched.alpha[t];
  const double abar = sched.alpha_bar[t];
  const double abar_prev = sched.alpha_bar[t - 1];
  const double ct = std::sqrt(alpha) * (1.0 - abar_prev) / (1.0 - abar);
  const double c0 = std::sqrt(abar_prev) * (1.0 - alpha) / (1.0 - abar);
  GaussianMoments m;
  m.mean.resize(x_t.size());
  for (std::size_t i = 0; i < x_t.size(); ++i) m.mean[i] = ct * x_t[i] + c0 * x0[i];
  m.variance = (1.0 - alpha) * (1.0 - abar_prev) / (1.0 - abar);
  return m;
}

double smr_posterior_denominator(int t, double eta, const NoiseSchedule& sched) {
  check_step(t, sched);
  const double alpha = sched.alpha[t];
  const double abar = sched.alpha_bar[t];
  return 1.0 - abar + (1.0 + 2.0 * alpha - 3.0 * abar) * eta;
}

TauTarget tau_target(TensorView eps, TensorView x_s, double eta) {
  check_same_size(eps, x_s, "eps vs x_s");
  check_eta(eta);
  const double a = std::sqrt(1.0 + eta);
  const double b = std::sqrt(eta);
  TauTarget out;
  out.tau.resize(eps.size());
  for (std::size_t i = 0; i < eps.size(); ++i) out.tau[i] = a * eps[i] + b * x_s[i];
  return out;
}

Tensor recover_x0(TensorView x_t, TensorView tau, int t, const NoiseSchedule& sched) {
  check_step(t, sched);
  check_same_size(x_t, tau, "x_t vs tau");
  const double abar = sched.alpha_bar[t];
  require(abar > 0.0, ErrorKind::Numerical, "cannot invert: alpha_bar is zero");
  const double a = 1.0 / std::sqrt(abar);
  const double s = std::sqrt(1.0 - abar);
  Tensor out(x_t.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (x_t[i] - s * tau[i]) * a;
  return out;
}

Tensor ddpm_posterior_mean_simplified(TensorView x_t, TensorView eps, int t,
                                      const NoiseSchedule& sched) {
  check_step(t, sched);
  require(t >= 1, ErrorKind::Contract, "posterior at t = 0 is undefined");
  check_same_size(x_t, eps, "x_t vs eps");
  const double alpha = sched.alpha[t];
  const double k = (1.0 - alpha) / std::sqrt(1.0 - sched.alpha_bar[t]);
  const double inv = 1.0 / std::sqrt(alpha);
  Tensor out(x_t.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = inv * (x_t[i] - k * eps[i]);
  return out;
}

std::vector<double> snr_trajectory(const NoiseSchedule& sched, double eta_eff) {
  require(eta_eff >= 0.0, ErrorKind::Contract, "eta_eff must be non-negative");
  std::vector<double> out(sched.steps());
  for (int t = 0; t < sched.steps(); ++t) {
    const double abar = sched.alpha_bar[t];
    if (abar >= 1.0) {
      out[t] = std::numeric_limits<double>::infinity();
      continue;
    }
    const double signal = abar + eta_eff * (1.0 - abar);
    const double noise = (1.0 + eta_eff) * (1.0 - abar);
    out[t] = std::sqrt(signal / noise);
  }
  return out;
}

double make_eta(Rng& rng, const SmrConfig& config) {
  const double u = rng.uniform(0.0, config.upsilon);
  return config.eta_sampling == EtaSampling::EtaUniform ? u : u * u;
}

PriorCurve parse_prior_curve(const std::string& s) {
  if (s == "linear") return PriorCurve::Linear;
  if (s == "cosine") return PriorCurve::Cosine;
  if (s == "ellipse") return PriorCurve::Ellipse;
  fail(ErrorKind::Config, "unknown prior curve '" + s + "'");
}

std::string to_string(PriorCurve c) {
  switch (c) {
    case PriorCurve::Linear: return "linear";
    case PriorCurve::Cosine: return "cosine";
    case PriorCurve::Ellipse: return "ellipse";
  }
  return "?";
}

double deterministic_prior_weight(int t, int steps, PriorCurve kind, double w_max) {
  require(t >= 0 && t < steps, ErrorKind::Contract, "timestep outside [0, T)");
  const double s = steps == 1 ? 0.0 : static_cast<double>(t) / (steps - 1);
  switch (kind) {
    case PriorCurve::Linear: return w_max * s;
    case PriorCurve::Cosine: return w_max * (1.0 - std::cos(std::numbers::pi * s)) / 2.0;
    case PriorCurve::Ellipse: return w_max * std::sqrt(1.0 - (1.0 - s) * (1.0 - s));
  }
  return 0.0;
}

}  // namespace strokelab

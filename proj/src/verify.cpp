#include "strokelab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "strokelab/error.hpp"
#include "strokelab/io.hpp"

namespace strokelab {

namespace {

double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

IdentityResult make(std::string name, double err, double tol) {
  return {std::move(name), err, tol, std::isfinite(err) && err <= tol};
}

Tensor scalar(double v) { return Tensor{v}; }

// Moment match of the forward draw at a one-step schedule with abar = 0.5.
void marginal_monte_carlo(const VerifyConfig& cfg, const VerifyKernels& k,
                          std::vector<IdentityResult>& out) {
  const double beta = 0.5;
  const NoiseSchedule s = NoiseSchedule::from_betas(std::span(&beta, 1));
  const double eta = 0.25, x0 = 1.0, xs = 2.0;
  Rng rng = Rng::derive(cfg.seed, 11);
  const double root = std::sqrt(1.0 - s.alpha_bar[0]), re = std::sqrt(eta);
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < cfg.mc_draws; ++i) {
    const double e = rng.normal(), es = rng.normal();
    const double x = std::sqrt(s.alpha_bar[0]) * x0 + root * e + root * re * xs - root * re * es;
    sum += x;
    sum2 += x * x;
  }
  const double n = static_cast<double>(cfg.mc_draws);
  const double mean = sum / n, var = sum2 / n - mean * mean;
  const GaussianMoments m = k.marginal(scalar(x0), scalar(xs), 0, eta, s);
  out.push_back(make("marginal_mc_mean", std::abs(mean - m.mean[0]),
                     4.0 * std::sqrt(m.variance) / std::sqrt(n)));
  out.push_back(make("marginal_mc_variance", std::abs(var / m.variance - 1.0), 0.01));
}

// Chain step with the prior noise eps* held fixed along the trajectory:
// the DDPM part moves by the standard transition and the prior term is
// re-scaled, which reproduces the marginal at t exactly.
void chain_monte_carlo(const NoiseSchedule& s, const VerifyConfig& cfg, const VerifyKernels& k,
                       std::vector<IdentityResult>& out) {
  const int t = s.steps() / 2;
  const double eta = 0.3, x0 = 0.7, xs = -1.2;
  Rng rng = Rng::derive(cfg.seed, 12);
  const double re = std::sqrt(eta);
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < cfg.mc_draws; ++i) {
    const double eps_star = rng.normal();
    const double prior = re * (xs - eps_star);
    const double prev = std::sqrt(s.alpha_bar[t - 1]) * x0 +
                        std::sqrt(1.0 - s.alpha_bar[t - 1]) * (rng.normal() + prior);
    const double ddpm_prev = prev - std::sqrt(1.0 - s.alpha_bar[t - 1]) * prior;
    const double x = std::sqrt(s.alpha[t]) * ddpm_prev + std::sqrt(s.beta[t]) * rng.normal() +
                     std::sqrt(1.0 - s.alpha_bar[t]) * prior;
    sum += x;
    sum2 += x * x;
  }
  const double n = static_cast<double>(cfg.mc_draws);
  const double mean = sum / n, var = sum2 / n - mean * mean;
  const GaussianMoments m = k.marginal(scalar(x0), scalar(xs), t, eta, s);
  out.push_back(make("chain_mc_mean", std::abs(mean - m.mean[0]),
                     4.0 * std::sqrt(m.variance) / std::sqrt(n)));
  out.push_back(make("chain_mc_variance", std::abs(var / m.variance - 1.0), 0.01));
}

}  // namespace

std::vector<IdentityResult> run_identity_suite(const NoiseSchedule& s, const VerifyConfig& cfg,
                                               const VerifyKernels& k) {
  require(s.steps() >= 2, ErrorKind::Config, "identity suite needs at least two steps");
  require(cfg.t_stride >= 1, ErrorKind::Config, "t stride must be positive");
  std::vector<IdentityResult> out;
  const int T = s.steps();
  Rng rng = Rng::derive(cfg.seed, 10);

  // eta = 0 posterior against the closed-form DDPM posterior.
  {
    double err = 0.0;
    for (int t = 1; t < T; ++t) {
      const double xt = rng.normal(), x0 = rng.uniform(-1, 1), xs = rng.uniform(-1, 1);
      const double a = s.alpha[t], ab = s.alpha_bar[t], abp = s.alpha_bar[t - 1];
      const double mean = (std::sqrt(a) * (1 - abp) * xt + std::sqrt(abp) * (1 - a) * x0) / (1 - ab);
      const double var = (1 - a) * (1 - abp) / (1 - ab);
      const GaussianMoments p = k.posterior(scalar(xt), scalar(x0), scalar(xs), t, 0.0, s);
      err = std::max({err, rel_err(p.mean[0], mean), rel_err(p.variance, var)});
    }
    out.push_back(make("eta0_posterior_reduction", err, 1e-9));
  }

  // a^2 s2 + s1 against the closed-form normalizer, with a, s1 read off the
  // transition and s2 off the marginal at t - 1.
  {
    double err = 0.0;
    for (int t = 1; t < T; t += cfg.t_stride)
      for (double eta : cfg.etas) {
        const Tensor zero = scalar(0.0), one = scalar(1.0);
        const GaussianMoments tr0 = k.transition(zero, zero, t, eta, s);
        const GaussianMoments tr1 = k.transition(one, zero, t, eta, s);
        const double a = tr1.mean[0] - tr0.mean[0];
        const double s1 = tr0.variance;
        const double s2 = k.marginal(zero, zero, t - 1, eta, s).variance;
        const double want = 1 - s.alpha_bar[t] + (1 + 2 * s.alpha[t] - 3 * s.alpha_bar[t]) * eta;
        err = std::max(err, std::abs(a * a * s2 + s1 - want));
      }
    out.push_back(make("posterior_denominator", err, 1e-12));
  }

  // Coefficient of x_t' in the posterior mean.
  {
    double err = 0.0;
    for (int t = 1; t < T; t += cfg.t_stride)
      for (double eta : cfg.etas) {
        const Tensor x0 = scalar(rng.uniform(-1, 1)), xs = scalar(rng.uniform(-1, 1));
        const double c = k.posterior(scalar(1.0), x0, xs, t, eta, s).mean[0] -
                         k.posterior(scalar(0.0), x0, xs, t, eta, s).mean[0];
        const double den = 1 - s.alpha_bar[t] + (1 + 2 * s.alpha[t] - 3 * s.alpha_bar[t]) * eta;
        const double want = std::sqrt(s.alpha[t]) * (1 - s.alpha_bar[t - 1]) * (1 + eta) / den;
        err = std::max(err, rel_err(c, want));
      }
    out.push_back(make("posterior_xt_coefficient", err, 1e-12));
  }

  // Transition variance as the sum of its three independent noise terms.
  {
    double err = 0.0;
    for (int t = 1; t < T; t += cfg.t_stride)
      for (double eta : cfg.etas) {
        const double a = s.alpha[t], ab = s.alpha_bar[t], abp = s.alpha_bar[t - 1];
        const double want = a * (1 - abp) * eta + (1 - a) + (1 - ab) * eta;
        const Tensor zero = scalar(0.0);
        err = std::max(err, std::abs(k.transition(zero, zero, t, eta, s).variance - want));
      }
    out.push_back(make("transition_variance_terms", err, 1e-12));
  }

  // Pushing the t-1 marginal through the independent-noise transition
  // overshoots the t marginal variance by exactly 2 eta alpha_t (1 - abar_{t-1}).
  {
    double err = 0.0;
    for (int t = 1; t < T; t += cfg.t_stride)
      for (double eta : cfg.etas) {
        const Tensor zero = scalar(0.0), one = scalar(1.0);
        const double a = k.transition(one, zero, t, eta, s).mean[0] -
                         k.transition(zero, zero, t, eta, s).mean[0];
        const double composed = a * a * k.marginal(zero, zero, t - 1, eta, s).variance +
                                k.transition(zero, zero, t, eta, s).variance;
        const double excess = composed - k.marginal(zero, zero, t, eta, s).variance;
        const double want = 2 * eta * s.alpha[t] * (1 - s.alpha_bar[t - 1]);
        err = std::max(err, std::abs(excess - want));
      }
    out.push_back(make("transition_chain_excess", err, 1e-12));
  }

  // Simplified DDPM mean against the unsimplified posterior mean.
  {
    double err = 0.0;
    for (int t = 1; t < T; ++t) {
      const double xt = rng.normal(), eps = rng.normal();
      const double x0 = (xt - std::sqrt(1 - s.alpha_bar[t]) * eps) / std::sqrt(s.alpha_bar[t]);
      const double simple = ddpm_posterior_mean_simplified(scalar(xt), scalar(eps), t, s)[0];
      const double full = k.posterior(scalar(xt), scalar(x0), scalar(0.0), t, 0.0, s).mean[0];
      err = std::max(err, std::abs(simple - full) / std::max(std::abs(full), 1e-300));
    }
    out.push_back(make("ddpm_mean_simplified", err, 1e-9));
  }

  // Forward draw then inversion.
  {
    double err = 0.0;
    for (std::size_t i = 0; i < cfg.round_trips; ++i) {
      const int t = static_cast<int>(rng.index(T));
      const double eta = rng.uniform(0.0, 0.5);
      const Tensor x0 = scalar(rng.uniform(-1, 1)), xs = scalar(rng.uniform(-1, 1));
      const SmrDraw d = smr_forward_sample(x0, xs, t, eta, s, rng);
      const Tensor back = k.recover(d.x_t_prime, tau_target(d.combined_noise(), xs, eta).tau, t, s);
      err = std::max(err, std::abs(back[0] - x0[0]));
    }
    out.push_back(make("recover_x0_round_trip", err, 1e-10));
  }

  // Every posterior variance is positive.
  {
    double worst = 0.0;
    for (int t = 1; t < T; ++t)
      for (double eta : cfg.etas) {
        const double v = k.posterior(scalar(0.0), scalar(0.0), scalar(0.0), t, eta, s).variance;
        if (!(v > 0.0)) worst = std::max(worst, std::isfinite(v) ? -v + 1.0 : INFINITY);
      }
    out.push_back(make("posterior_variance_positive", worst, 0.0));
  }

  if (cfg.mc_draws > 0) {
    marginal_monte_carlo(cfg, k, out);
    chain_monte_carlo(s, cfg, k, out);
  }
  return out;
}

bool all_pass(const std::vector<IdentityResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.pass; });
}

void write_verify_csv(const std::filesystem::path& path, const std::vector<IdentityResult>& results) {
  std::ostringstream s;
  s << "identity,max_error,tolerance,status\n";
  for (const auto& r : results)
    s << r.identity << "," << io::format_double(r.max_error) << "," << io::format_double(r.tolerance)
      << "," << (r.pass ? "pass" : "fail") << "\n";
  io::write_text(path, s.str());
}

}  // namespace strokelab

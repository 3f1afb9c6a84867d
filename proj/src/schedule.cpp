#include "strokelab/schedule.hpp"

#include <cmath>

#include "strokelab/error.hpp"

namespace strokelab {

ScheduleMode parse_schedule_mode(const std::string& s) {
  if (s == "scaled_linear") return ScheduleMode::ScaledLinear;
  if (s == "linear") return ScheduleMode::Linear;
  fail(ErrorKind::Config, "unknown schedule mode '" + s + "'");
}

std::string to_string(ScheduleMode m) {
  return m == ScheduleMode::ScaledLinear ? "scaled_linear" : "linear";
}

NoiseSchedule NoiseSchedule::from_betas(std::span<const double> betas) {
  require(!betas.empty(), ErrorKind::Config, "schedule needs at least one step");
  NoiseSchedule s;
  s.beta.assign(betas.begin(), betas.end());
  s.alpha.resize(betas.size());
  s.alpha_bar.resize(betas.size());
  double prod = 1.0;
  for (std::size_t t = 0; t < betas.size(); ++t) {
    require(betas[t] > 0.0 && betas[t] < 1.0, ErrorKind::Config,
            "beta values must lie in (0, 1)");
    s.alpha[t] = 1.0 - betas[t];
    prod *= s.alpha[t];
    s.alpha_bar[t] = prod;
  }
  return s;
}

NoiseSchedule build_schedule(int steps, double beta_start, double beta_end,
                             ScheduleMode mode) {
  require(steps >= 1, ErrorKind::Config, "schedule needs T >= 1");
  require(beta_start > 0.0 && beta_start < 1.0 && beta_end > 0.0 && beta_end < 1.0,
          ErrorKind::Config, "beta endpoints must lie in (0, 1)");
  require(beta_end >= beta_start, ErrorKind::Config,
          "beta endpoints must be non-decreasing");

  std::vector<double> betas(steps);
  const double lo = mode == ScheduleMode::ScaledLinear ? std::sqrt(beta_start) : beta_start;
  const double hi = mode == ScheduleMode::ScaledLinear ? std::sqrt(beta_end) : beta_end;
  for (int t = 0; t < steps; ++t) {
    const double frac = steps == 1 ? 0.0 : static_cast<double>(t) / (steps - 1);
    const double v = lo + (hi - lo) * frac;
    betas[t] = mode == ScheduleMode::ScaledLinear ? v * v : v;
  }
  return NoiseSchedule::from_betas(betas);
}

NoiseSchedule default_schedule(int steps) {
  return build_schedule(steps, 0.00085, 0.012, ScheduleMode::ScaledLinear);
}

}  // namespace strokelab

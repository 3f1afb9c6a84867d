#pragma once

#include <span>
#include <string>
#include <vector>

namespace strokelab {

enum class ScheduleMode {
  ScaledLinear,  // sqrt(beta) linear in t (Stable Diffusion convention)
  Linear,        // beta linear in t
};

ScheduleMode parse_schedule_mode(const std::string& s);
std::string to_string(ScheduleMode m);

/// Per-step variance increments and their cumulative products. Step
/// indices are 0-based: alpha_bar[t] = prod_{i <= t} alpha[i].
struct NoiseSchedule {
  std::vector<double> beta;
  std::vector<double> alpha;
  std::vector<double> alpha_bar;

  int steps() const { return static_cast<int>(beta.size()); }

  /// Builds alpha and alpha_bar from explicit betas; each must lie in (0, 1).
  static NoiseSchedule from_betas(std::span<const double> betas);
};

/// `beta_start`/`beta_end` are the beta values at t = 0 and t = T-1. In
/// scaled-linear mode their square roots are interpolated.
NoiseSchedule build_schedule(int steps, double beta_start, double beta_end,
                             ScheduleMode mode);

/// The schedule used throughout: T steps of scaled-linear 0.00085 -> 0.012.
NoiseSchedule default_schedule(int steps);

}  // namespace strokelab

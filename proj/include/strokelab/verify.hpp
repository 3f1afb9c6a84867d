#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "strokelab/schedule.hpp"
#include "strokelab/smr.hpp"

namespace strokelab {

struct IdentityResult {
  std::string identity;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// The formulas under test. Tests swap one out for a corrupted version to
/// check that the suite notices.
struct VerifyKernels {
  std::function<GaussianMoments(TensorView, TensorView, int, double, const NoiseSchedule&)>
      marginal = smr_marginal_moments;
  std::function<GaussianMoments(TensorView, TensorView, int, double, const NoiseSchedule&)>
      transition = smr_transition_moments;
  std::function<GaussianMoments(TensorView, TensorView, TensorView, int, double,
                                const NoiseSchedule&)>
      posterior = smr_posterior_moments;
  std::function<Tensor(TensorView, TensorView, int, const NoiseSchedule&)> recover = recover_x0;
};

struct VerifyConfig {
  std::vector<double> etas{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  int t_stride = 50;            // denominator grid: t = 1, 1 + stride, ...
  std::size_t mc_draws = 1000000;
  std::size_t round_trips = 100;
  std::uint64_t seed = 0;
};

/// Runs every identity; single-threaded and deterministic.
std::vector<IdentityResult> run_identity_suite(const NoiseSchedule& sched, const VerifyConfig& cfg,
                                               const VerifyKernels& kernels = {});

bool all_pass(const std::vector<IdentityResult>& results);

/// CSV with columns identity,max_error,tolerance,status.
void write_verify_csv(const std::filesystem::path& path, const std::vector<IdentityResult>& results);

}  // namespace strokelab

#pragma once

#include <array>
#include <span>
#include <vector>

#include "strokelab/bezier.hpp"
#include "strokelab/hungarian.hpp"

namespace strokelab {

/// Length of the matched parameter vector: 13 stroke values plus two shifts.
inline constexpr int kMatchDims = kStrokeDims + 2;
/// Raw fields per prediction: c_p, x_shift, y_shift, scr, d.
inline constexpr int kPredictionFields = kStrokeDims + 4;

struct StrokePrediction {
  std::array<double, kStrokeDims> c_p{};  // pixel units
  double x_shift = 0.0;                    // normalized patch units
  double y_shift = 0.0;
  double scr = 0.5;  // ranking score in (0, 1)
  double d = 0.5;    // presence confidence in [0, 1]

  std::array<double, kPredictionFields> to_fields() const;
  static StrokePrediction from_fields(std::span<const double> f);
};

struct GroundTruthStroke {
  std::array<double, kStrokeDims> c_p{};
  double x_shift = 0.0;
  double y_shift = 0.0;
  int order_index = 1;  // 1 = painted first
  double d = 1.0;
};

struct MatchConfig {
  double lambda_l1 = 5.0;
  double lambda_cos = 10.0;
  double lambda_d = 10.0;
  double lambda_m = 1.0;
  double lambda_r = 5.0;
  double margin = 0.125;
  int max_strokes = 8;
  double canvas_side = 32.0;  // divides positions and width before comparison

  void validate() const;
};

using PredictionGrad = std::array<double, kPredictionFields>;

/// P^- scaled to comparable magnitudes: positions and width over the canvas
/// side, color over 255, opacity and shifts unchanged.
std::array<double, kMatchDims> normalized_params(std::span<const double> c_p, double x_shift,
                                                 double y_shift, double side);

/// Binary cross-entropy with the probability clamped to [1e-7, 1 - 1e-7].
double bce(double target, double prob);
/// d bce / d prob (zero inside the clamped region).
double bce_grad(double target, double prob);

/// lambda_l1 * L1 + lambda_cos * (1 - cos) + lambda_d * BCE(d, d_hat).
double pairwise_cost(const StrokePrediction& pred, const GroundTruthStroke& gt,
                     const MatchConfig& cfg, PredictionGrad* grad = nullptr);

struct MatchResult {
  double loss = 0.0;
  std::vector<int> gt_to_pred;  // index of the matched prediction per ground truth
};

/// Optimal-assignment matching loss; unmatched predictions pay
/// lambda_d * BCE(0, d_hat). Gradients are accumulated into `grads`.
MatchResult matching_loss(std::span<const StrokePrediction> preds,
                          std::span<const GroundTruthStroke> gts, const MatchConfig& cfg,
                          std::span<PredictionGrad> grads = {});

/// Hinge over every pair whose order index increases, normalized by C(n, 2).
/// Returns 0 for n < 2. Gradients are accumulated into `grad` when non-empty.
double ranking_loss(std::span<const double> scr, std::span<const int> order, double margin,
                    std::span<double> grad = {});

struct PredictorLoss {
  double total = 0.0;
  double match = 0.0;
  double rank = 0.0;
  std::vector<int> gt_to_pred;
};

/// lambda_m * L_match + lambda_r * L_rank over the matched scores.
PredictorLoss total_predictor_loss(std::span<const StrokePrediction> preds,
                                   std::span<const GroundTruthStroke> gts,
                                   const MatchConfig& cfg,
                                   std::span<PredictionGrad> grads = {});

/// Fraction of ground-truth pairs whose matched scores are out of order
/// (ties count one half). Zero when fewer than two pairs exist.
double pairwise_rank_error(std::span<const double> scr, std::span<const int> order);

}  // namespace strokelab

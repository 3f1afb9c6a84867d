#include "strokelab/losses.hpp"

#include <algorithm>
#include <cmath>

#include "strokelab/error.hpp"

namespace strokelab {

namespace {

constexpr double kProbEps = 1e-7;

double field_scale(int k, double side) {
  if (k >= kStrokeDims) return 1.0;
  if (is_positional(k)) return side;
  return k == kOpacityIndex ? 1.0 : 255.0;
}

}  // namespace

std::array<double, kPredictionFields> StrokePrediction::to_fields() const {
  std::array<double, kPredictionFields> f{};
  std::copy(c_p.begin(), c_p.end(), f.begin());
  f[kStrokeDims] = x_shift;
  f[kStrokeDims + 1] = y_shift;
  f[kStrokeDims + 2] = scr;
  f[kStrokeDims + 3] = d;
  return f;
}

StrokePrediction StrokePrediction::from_fields(std::span<const double> f) {
  require(f.size() == kPredictionFields, ErrorKind::Contract, "prediction needs 17 fields");
  StrokePrediction p;
  std::copy(f.begin(), f.begin() + kStrokeDims, p.c_p.begin());
  p.x_shift = f[kStrokeDims];
  p.y_shift = f[kStrokeDims + 1];
  p.scr = f[kStrokeDims + 2];
  p.d = f[kStrokeDims + 3];
  return p;
}

void MatchConfig::validate() const {
  require(lambda_l1 >= 0 && lambda_cos >= 0 && lambda_d >= 0 && lambda_m >= 0 && lambda_r >= 0,
          ErrorKind::Config, "loss weights must be nonnegative");
  require(margin > 0, ErrorKind::Config, "margin must be positive");
  require(max_strokes >= 1, ErrorKind::Config, "max_strokes must be positive");
  require(canvas_side > 0, ErrorKind::Config, "canvas side must be positive");
}

std::array<double, kMatchDims> normalized_params(std::span<const double> c_p, double x_shift,
                                                 double y_shift, double side) {
  std::array<double, kMatchDims> v{};
  for (int k = 0; k < kStrokeDims; ++k) v[k] = c_p[k] / field_scale(k, side);
  v[kStrokeDims] = x_shift;
  v[kStrokeDims + 1] = y_shift;
  return v;
}

double bce(double target, double prob) {
  const double p = std::clamp(prob, kProbEps, 1.0 - kProbEps);
  return -(target * std::log(p) + (1.0 - target) * std::log(1.0 - p));
}

double bce_grad(double target, double prob) {
  if (prob <= kProbEps || prob >= 1.0 - kProbEps) return 0.0;
  return -target / prob + (1.0 - target) / (1.0 - prob);
}

double pairwise_cost(const StrokePrediction& pred, const GroundTruthStroke& gt,
                     const MatchConfig& cfg, PredictionGrad* grad) {
  const auto a = normalized_params(gt.c_p, gt.x_shift, gt.y_shift, cfg.canvas_side);
  const auto b = normalized_params(pred.c_p, pred.x_shift, pred.y_shift, cfg.canvas_side);

  double l1 = 0.0, dot = 0.0, na2 = 0.0, nb2 = 0.0;
  for (int k = 0; k < kMatchDims; ++k) {
    l1 += std::abs(b[k] - a[k]);
    dot += a[k] * b[k];
    na2 += a[k] * a[k];
    nb2 += b[k] * b[k];
  }
  const double na = std::sqrt(na2), nb = std::sqrt(nb2);
  const bool degenerate = na == 0.0 || nb == 0.0;
  const double cos_dist = degenerate ? 1.0 : 1.0 - dot / (na * nb);

  const double cost =
      cfg.lambda_l1 * l1 + cfg.lambda_cos * cos_dist + cfg.lambda_d * bce(gt.d, pred.d);

  if (grad) {
    for (int k = 0; k < kMatchDims; ++k) {
      const double diff = b[k] - a[k];
      double g = cfg.lambda_l1 * (diff > 0 ? 1.0 : (diff < 0 ? -1.0 : 0.0));
      if (!degenerate)
        g -= cfg.lambda_cos * (a[k] / (na * nb) - dot * b[k] / (na * nb * nb2));
      (*grad)[k] += g / field_scale(k, cfg.canvas_side);
    }
    (*grad)[kStrokeDims + 3] += cfg.lambda_d * bce_grad(gt.d, pred.d);
  }
  return cost;
}

MatchResult matching_loss(std::span<const StrokePrediction> preds,
                          std::span<const GroundTruthStroke> gts, const MatchConfig& cfg,
                          std::span<PredictionGrad> grads) {
  require(gts.size() <= preds.size(), ErrorKind::Contract,
          "more ground-truth strokes than predictions");
  require(grads.empty() || grads.size() == preds.size(), ErrorKind::Contract,
          "gradient buffer does not match predictions");
  const int n = static_cast<int>(gts.size()), m = static_cast<int>(preds.size());

  // Matching j removes its unmatched penalty, so subtracting that penalty
  // makes the assignment optimal for the whole loss.
  CostMatrix cost(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      cost(i, j) = pairwise_cost(preds[j], gts[i], cfg) - cfg.lambda_d * bce(0.0, preds[j].d);

  MatchResult out;
  out.gt_to_pred = hungarian_assignment(cost).row_to_col;

  std::vector<char> matched(m, 0);
  for (int i = 0; i < n; ++i) {
    const int j = out.gt_to_pred[i];
    matched[j] = 1;
    out.loss += pairwise_cost(preds[j], gts[i], cfg, grads.empty() ? nullptr : &grads[j]);
  }
  for (int j = 0; j < m; ++j) {
    if (matched[j]) continue;
    out.loss += cfg.lambda_d * bce(0.0, preds[j].d);
    if (!grads.empty()) grads[j][kStrokeDims + 3] += cfg.lambda_d * bce_grad(0.0, preds[j].d);
  }
  return out;
}

double ranking_loss(std::span<const double> scr, std::span<const int> order, double margin,
                    std::span<double> grad) {
  require(scr.size() == order.size(), ErrorKind::Contract, "scores and orders differ in length");
  const std::size_t n = scr.size();
  if (n < 2) return 0.0;
  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (order[i] >= order[j]) continue;
      const double h = scr[i] - scr[j] + (order[j] - order[i]) * margin;
      if (h <= 0.0) continue;
      loss += h;
      if (!grad.empty()) {
        grad[i] += 1.0 / pairs;
        grad[j] -= 1.0 / pairs;
      }
    }
  return loss / pairs;
}

PredictorLoss total_predictor_loss(std::span<const StrokePrediction> preds,
                                   std::span<const GroundTruthStroke> gts,
                                   const MatchConfig& cfg, std::span<PredictionGrad> grads) {
  PredictorLoss out;
  std::vector<PredictionGrad> mg(preds.size(), PredictionGrad{});
  const MatchResult match = matching_loss(preds, gts, cfg, grads.empty() ? std::span<PredictionGrad>{} : mg);
  out.match = match.loss;
  out.gt_to_pred = match.gt_to_pred;

  std::vector<double> scr(gts.size()), rgrad(gts.size(), 0.0);
  std::vector<int> order(gts.size());
  for (std::size_t i = 0; i < gts.size(); ++i) {
    scr[i] = preds[match.gt_to_pred[i]].scr;
    order[i] = gts[i].order_index;
  }
  out.rank = ranking_loss(scr, order, cfg.margin, grads.empty() ? std::span<double>{} : rgrad);
  out.total = cfg.lambda_m * out.match + cfg.lambda_r * out.rank;

  if (!grads.empty()) {
    for (std::size_t j = 0; j < preds.size(); ++j)
      for (int k = 0; k < kPredictionFields; ++k) grads[j][k] += cfg.lambda_m * mg[j][k];
    for (std::size_t i = 0; i < gts.size(); ++i)
      grads[match.gt_to_pred[i]][kStrokeDims + 2] += cfg.lambda_r * rgrad[i];
  }
  return out;
}

double pairwise_rank_error(std::span<const double> scr, std::span<const int> order) {
  require(scr.size() == order.size(), ErrorKind::Contract, "scores and orders differ in length");
  double bad = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < scr.size(); ++i)
    for (std::size_t j = 0; j < scr.size(); ++j) {
      if (order[i] >= order[j]) continue;
      ++pairs;
      if (scr[i] > scr[j]) bad += 1.0;
      else if (scr[i] == scr[j]) bad += 0.5;
    }
  return pairs ? bad / static_cast<double>(pairs) : 0.0;
}

}  // namespace strokelab

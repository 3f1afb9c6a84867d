#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"
#include "strokelab/bezier.hpp"
#include "strokelab/image.hpp"
#include "strokelab/losses.hpp"
#include "strokelab/nn.hpp"
#include "strokelab/random.hpp"

namespace strokelab {

/// Two strided 3x3 convolutions over the stacked (current, target) RGB
/// canvases, then two dense layers emitting max_strokes x 17 raw values.
/// A small rank head shared across slots adds a term computed from each
/// slot's own 15 raw stroke outputs to that slot's score.
struct PredictorArch {
  int side = 32;
  int conv1 = 8;
  int conv2 = 16;
  int hidden = 128;
  int max_strokes = 8;

  nlohmann::json to_json() const;
  static PredictorArch from_json(const nlohmann::json& j);
};

/// Stroke placed on the canvas: c_p translated by the shifts times the side.
BezierStroke placed_stroke(const StrokePrediction& p, double side);

/// Inverse of placed_stroke: c_p centered on the canvas plus the shift.
GroundTruthStroke ground_truth_from(const BezierStroke& s, double side, int order_index);

class StrokePredictor {
 public:
  StrokePredictor(PredictorArch arch, Rng& rng);
  StrokePredictor(PredictorArch arch, std::vector<double> params);

  const PredictorArch& arch() const { return arch_; }
  std::span<const double> params() const { return params_; }
  std::span<double> params() { return params_; }

  /// Raw head outputs, max_strokes x 17.
  std::vector<double> forward_raw(const Canvas& current, const Canvas& target) const;

  /// Squashed predictions; throws Contract on mismatched canvas sizes.
  std::vector<StrokePrediction> predict(const Canvas& current, const Canvas& target) const;

  /// Loss for one scene; accumulates d(loss)/d(theta) into `grad`.
  PredictorLoss loss_gradient(const Canvas& current, const Canvas& target,
                              std::span<const GroundTruthStroke> gts, const MatchConfig& cfg,
                              std::span<double> grad) const;

 private:
  struct Cache;
  void build_layers();
  std::vector<double> pack_input(const Canvas& current, const Canvas& target) const;
  void run(std::span<const double> input, Cache& cache) const;
  StrokePrediction squash(std::span<const double> raw, PredictionGrad* dsquash) const;

  PredictorArch arch_;
  ParamRanges ranges_;
  nn::Conv3x3 c1_, c2_;
  nn::Dense f1_, f2_, rank_;
  std::vector<double> params_;
};

inline std::vector<StrokePrediction> predict_strokes(const StrokePredictor& model,
                                                     const Canvas& current,
                                                     const Canvas& target) {
  return model.predict(current, target);
}

/// One supervised sequence: strokes painted widest first onto `current`.
struct Scene {
  Canvas current;
  Canvas target;
  std::vector<GroundTruthStroke> strokes;
};

struct SceneConfig {
  int side = 32;
  int min_strokes = 2;
  int max_strokes = 5;
  double extent = 0.25;  // control-point spread around the centroid, fraction of side
  double min_width = 1.0;
  double max_width = 10.0;
};

Scene generate_scene(Rng& rng, const SceneConfig& cfg);
std::vector<Scene> generate_scenes(std::uint64_t seed, std::size_t count, const SceneConfig& cfg);

/// Pairwise rank error of one scene. With `slot_scores` the learned scores
/// are replaced by slot index times margin.
double scene_rank_error(const StrokePredictor& model, const Scene& scene, const MatchConfig& cfg,
                        bool slot_scores);
double mean_rank_error(const StrokePredictor& model, std::span<const Scene> scenes,
                       const MatchConfig& cfg, bool slot_scores);

struct PredictorTrainConfig {
  MatchConfig match;
  PredictorArch arch;
  int epochs = 8;
  int batch_size = 16;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
};

struct PredictorTrainResult {
  StrokePredictor model;
  std::vector<double> epoch_loss;
  std::vector<double> rank_error;  // held-out, one per epoch
};

/// Adam on total_predictor_loss. Rank error is measured with slot-index
/// scores when lambda_r is zero. NaN loss aborts with a Numerical error.
PredictorTrainResult train_predictor(std::span<const Scene> train, std::span<const Scene> heldout,
                                     const PredictorTrainConfig& cfg);

}  // namespace strokelab

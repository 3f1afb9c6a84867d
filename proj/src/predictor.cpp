#include "strokelab/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "strokelab/error.hpp"
#include "strokelab/raster.hpp"

namespace strokelab {

nlohmann::json PredictorArch::to_json() const {
  return {{"kind", "conv_stroke_predictor"}, {"side", side},     {"conv1", conv1},
          {"conv2", conv2},                  {"hidden", hidden}, {"max_strokes", max_strokes}};
}

PredictorArch PredictorArch::from_json(const nlohmann::json& j) {
  require(j.value("kind", "") == "conv_stroke_predictor", ErrorKind::Io,
          "checkpoint is not a stroke predictor");
  PredictorArch a;
  a.side = j.at("side").get<int>();
  a.conv1 = j.at("conv1").get<int>();
  a.conv2 = j.at("conv2").get<int>();
  a.hidden = j.at("hidden").get<int>();
  a.max_strokes = j.at("max_strokes").get<int>();
  return a;
}

BezierStroke placed_stroke(const StrokePrediction& p, double side) {
  return BezierStroke::from_array(p.c_p).translated(p.x_shift * side, p.y_shift * side);
}

GroundTruthStroke ground_truth_from(const BezierStroke& s, double side, int order_index) {
  double cx = 0, cy = 0;
  for (const auto& q : s.p) {
    cx += 0.25 * q.x;
    cy += 0.25 * q.y;
  }
  GroundTruthStroke g;
  g.x_shift = (cx - 0.5 * side) / side;
  g.y_shift = (cy - 0.5 * side) / side;
  g.c_p = s.translated(0.5 * side - cx, 0.5 * side - cy).to_array();
  g.order_index = order_index;
  g.d = 1.0;
  return g;
}

struct StrokePredictor::Cache {
  std::vector<double> input, a1, h1, a2, h2, a3, h3, out;
};

StrokePredictor::StrokePredictor(PredictorArch arch, Rng& rng) : arch_(arch) {
  build_layers();
  c1_.init(params_, rng);
  c2_.init(params_, rng);
  f1_.init(params_, rng, std::sqrt(2.0));
  f2_.init(params_, rng, 0.1);
  rank_.init(params_, rng, 0.1);
}

StrokePredictor::StrokePredictor(PredictorArch arch, std::vector<double> params) : arch_(arch) {
  build_layers();
  require(params.size() == params_.size(), ErrorKind::Io,
          "predictor parameter count does not match architecture");
  params_ = std::move(params);
}

void StrokePredictor::build_layers() {
  require(arch_.side >= 4 && arch_.conv1 > 0 && arch_.conv2 > 0 && arch_.hidden > 0 &&
              arch_.max_strokes > 0,
          ErrorKind::Config, "invalid predictor architecture");
  ranges_ = ParamRanges::reference().scaled_to(arch_.side);
  std::size_t off = 0;
  c1_ = nn::Conv3x3{6, arch_.conv1, arch_.side, arch_.side, 2, off};
  off += c1_.param_count();
  c2_ = nn::Conv3x3{arch_.conv1, arch_.conv2, c1_.out_h(), c1_.out_w(), 2, off};
  off += c2_.param_count();
  f1_ = nn::Dense{static_cast<int>(c2_.out_size()), arch_.hidden, off};
  off += f1_.param_count();
  f2_ = nn::Dense{arch_.hidden, arch_.max_strokes * kPredictionFields, off};
  off += f2_.param_count();
  rank_ = nn::Dense{kMatchDims, 1, off};
  off += rank_.param_count();
  params_.assign(off, 0.0);
}

std::vector<double> StrokePredictor::pack_input(const Canvas& current, const Canvas& target) const {
  require(current.same_shape(target), ErrorKind::Contract, "canvases differ in shape");
  require(current.width == arch_.side && current.height == arch_.side && current.channels == 3,
          ErrorKind::Contract, "predictor expects square RGB canvases of its side length");
  const std::size_t plane = static_cast<std::size_t>(arch_.side) * arch_.side;
  std::vector<double> in(6 * plane);
  for (std::size_t i = 0; i < plane; ++i)
    for (int c = 0; c < 3; ++c) {
      in[c * plane + i] = 2.0 * current.data[i * 3 + c] - 1.0;
      in[(3 + c) * plane + i] = 2.0 * target.data[i * 3 + c] - 1.0;
    }
  return in;
}

void StrokePredictor::run(std::span<const double> input, Cache& k) const {
  k.input.assign(input.begin(), input.end());
  k.a1.resize(c1_.out_size());
  c1_.forward(params_, k.input, k.a1);
  k.h1.resize(k.a1.size());
  for (std::size_t i = 0; i < k.a1.size(); ++i) k.h1[i] = nn::silu(k.a1[i]);
  k.a2.resize(c2_.out_size());
  c2_.forward(params_, k.h1, k.a2);
  k.h2.resize(k.a2.size());
  for (std::size_t i = 0; i < k.a2.size(); ++i) k.h2[i] = nn::silu(k.a2[i]);
  k.a3.resize(arch_.hidden);
  f1_.forward(params_, k.h2, k.a3);
  k.h3.resize(k.a3.size());
  for (std::size_t i = 0; i < k.a3.size(); ++i) k.h3[i] = nn::silu(k.a3[i]);
  k.out.resize(static_cast<std::size_t>(f2_.out));
  f2_.forward(params_, k.h3, k.out);
  for (int s = 0; s < arch_.max_strokes; ++s) {
    double r = 0.0;
    rank_.forward(params_, std::span<const double>(k.out).subspan(s * kPredictionFields, kMatchDims),
                  std::span(&r, 1));
    k.out[s * kPredictionFields + kMatchDims] += r;
  }
}

StrokePrediction StrokePredictor::squash(std::span<const double> raw, PredictionGrad* ds) const {
  std::array<double, kPredictionFields> f{};
  for (int k = 0; k < kStrokeDims; ++k) {
    const auto [lo, hi] = ranges_.bounds[k];
    const double s = nn::sigmoid(raw[k]);
    f[k] = lo + (hi - lo) * s;
    if (ds) (*ds)[k] = (hi - lo) * s * (1.0 - s);
  }
  for (int k = kStrokeDims; k < kStrokeDims + 2; ++k) {
    const double t = std::tanh(raw[k]);
    f[k] = 0.5 * t;
    if (ds) (*ds)[k] = 0.5 * (1.0 - t * t);
  }
  for (int k = kStrokeDims + 2; k < kPredictionFields; ++k) {
    const double s = nn::sigmoid(raw[k]);
    f[k] = s;
    if (ds) (*ds)[k] = s * (1.0 - s);
  }
  return StrokePrediction::from_fields(f);
}

std::vector<double> StrokePredictor::forward_raw(const Canvas& current, const Canvas& target) const {
  Cache k;
  run(pack_input(current, target), k);
  return k.out;
}

std::vector<StrokePrediction> StrokePredictor::predict(const Canvas& current,
                                                       const Canvas& target) const {
  const auto raw = forward_raw(current, target);
  std::vector<StrokePrediction> out;
  for (int s = 0; s < arch_.max_strokes; ++s)
    out.push_back(squash(std::span(raw).subspan(s * kPredictionFields, kPredictionFields), nullptr));
  return out;
}

PredictorLoss StrokePredictor::loss_gradient(const Canvas& current, const Canvas& target,
                                             std::span<const GroundTruthStroke> gts,
                                             const MatchConfig& cfg, std::span<double> grad) const {
  Cache k;
  run(pack_input(current, target), k);
  const int S = arch_.max_strokes;
  std::vector<StrokePrediction> preds;
  std::vector<PredictionGrad> dsq(S);
  for (int s = 0; s < S; ++s)
    preds.push_back(
        squash(std::span(k.out).subspan(s * kPredictionFields, kPredictionFields), &dsq[s]));

  std::vector<PredictionGrad> pg(S, PredictionGrad{});
  const PredictorLoss loss = total_predictor_loss(preds, gts, cfg, pg);
  if (grad.empty()) return loss;

  std::vector<double> dout(k.out.size());
  for (int s = 0; s < S; ++s)
    for (int f = 0; f < kPredictionFields; ++f)
      dout[s * kPredictionFields + f] = pg[s][f] * dsq[s][f];

  std::vector<double> dslot(kMatchDims);
  for (int s = 0; s < S; ++s) {
    const std::size_t base = static_cast<std::size_t>(s) * kPredictionFields;
    rank_.backward(params_, std::span<const double>(k.out).subspan(base, kMatchDims),
                   std::span<const double>(&dout[base + kMatchDims], 1), grad, dslot);
    for (int f = 0; f < kMatchDims; ++f) dout[base + f] += dslot[f];
  }

  std::vector<double> dh3(k.h3.size()), dh2(k.h2.size()), dh1(k.h1.size());
  f2_.backward(params_, k.h3, dout, grad, dh3);
  for (std::size_t i = 0; i < dh3.size(); ++i) dh3[i] *= nn::silu_grad(k.a3[i]);
  f1_.backward(params_, k.h2, dh3, grad, dh2);
  for (std::size_t i = 0; i < dh2.size(); ++i) dh2[i] *= nn::silu_grad(k.a2[i]);
  c2_.backward(params_, k.h1, dh2, grad, dh1);
  for (std::size_t i = 0; i < dh1.size(); ++i) dh1[i] *= nn::silu_grad(k.a1[i]);
  c1_.backward(params_, k.input, dh1, grad, {});
  return loss;
}

Scene generate_scene(Rng& rng, const SceneConfig& cfg) {
  require(cfg.min_strokes >= 1 && cfg.max_strokes >= cfg.min_strokes, ErrorKind::Config,
          "invalid stroke count range");
  const double side = cfg.side;
  const ParamRanges ranges = ParamRanges::reference().scaled_to(side);
  const int n = cfg.min_strokes + static_cast<int>(rng.index(cfg.max_strokes - cfg.min_strokes + 1));

  struct Drawn {
    BezierStroke s;
    double key;
  };
  std::vector<Drawn> drawn;
  for (int i = 0; i < n; ++i) {
    const double cx = rng.uniform(0.2, 0.8) * side, cy = rng.uniform(0.2, 0.8) * side;
    BezierStroke s;
    double mx = 0, my = 0;
    for (auto& q : s.p) {
      q = {rng.uniform(-cfg.extent, cfg.extent) * side, rng.uniform(-cfg.extent, cfg.extent) * side};
      mx += 0.25 * q.x;
      my += 0.25 * q.y;
    }
    for (auto& q : s.p) q = {q.x - mx + cx, q.y - my + cy};
    s.width = rng.uniform(cfg.min_width, cfg.max_width);
    s.opacity = 1.0;
    double luma;
    do {
      s.r = rng.uniform(0, 255);
      s.g = rng.uniform(0, 255);
      s.b = rng.uniform(0, 255);
      luma = (0.299 * s.r + 0.587 * s.g + 0.114 * s.b) / 255.0;
    } while (luma > 0.8);
    // Keep the stored parameters inside the value ranges once centered.
    GroundTruthStroke g = ground_truth_from(s, side, 0);
    const BezierStroke centered = clamp_params(BezierStroke::from_array(g.c_p), ranges);
    s = centered.translated(g.x_shift * side, g.y_shift * side);
    drawn.push_back({s, -s.width});
  }
  std::stable_sort(drawn.begin(), drawn.end(),
                   [](const Drawn& a, const Drawn& b) { return a.key < b.key; });

  Scene scene{blank_canvas(cfg.side, cfg.side, 3), blank_canvas(cfg.side, cfg.side, 3), {}};
  for (int i = 0; i < n; ++i) {
    const auto& s = drawn[i].s;
    const Image dist = distance_field_serial(s, cfg.side, cfg.side);
    composite_over(scene.target, coverage_from_distance(dist, s.opacity, s.width, kDefaultSoftness),
                   s);
    scene.strokes.push_back(ground_truth_from(s, side, i + 1));
  }
  return scene;
}

std::vector<Scene> generate_scenes(std::uint64_t seed, std::size_t count, const SceneConfig& cfg) {
  std::vector<Scene> out(count);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(count); ++i) {
    Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(i));
    out[i] = generate_scene(rng, cfg);
  }
  return out;
}

double scene_rank_error(const StrokePredictor& model, const Scene& scene, const MatchConfig& cfg,
                        bool slot_scores) {
  const auto preds = model.predict(scene.current, scene.target);
  const MatchResult m = matching_loss(preds, scene.strokes, cfg);
  std::vector<double> scr;
  std::vector<int> order;
  for (std::size_t i = 0; i < scene.strokes.size(); ++i) {
    const int j = m.gt_to_pred[i];
    scr.push_back(slot_scores ? j * cfg.margin : preds[j].scr);
    order.push_back(scene.strokes[i].order_index);
  }
  return pairwise_rank_error(scr, order);
}

double mean_rank_error(const StrokePredictor& model, std::span<const Scene> scenes,
                       const MatchConfig& cfg, bool slot_scores) {
  require(!scenes.empty(), ErrorKind::Contract, "no scenes to evaluate");
  double acc = 0.0;
  for (const auto& s : scenes) acc += scene_rank_error(model, s, cfg, slot_scores);
  return acc / static_cast<double>(scenes.size());
}

PredictorTrainResult train_predictor(std::span<const Scene> train, std::span<const Scene> heldout,
                                     const PredictorTrainConfig& cfg) {
  require(!train.empty(), ErrorKind::Contract, "empty training set");
  require(cfg.epochs >= 1 && cfg.batch_size >= 1 && cfg.learning_rate > 0, ErrorKind::Config,
          "invalid predictor training settings");
  cfg.match.validate();
  require(cfg.arch.max_strokes == cfg.match.max_strokes, ErrorKind::Config,
          "architecture and match config disagree on max_strokes");

  Rng init = Rng::derive(cfg.seed, 0);
  PredictorTrainResult res{StrokePredictor(cfg.arch, init), {}, {}};
  StrokePredictor& model = res.model;
  const std::size_t P = model.params().size();
  nn::Adam opt(P, cfg.learning_rate);
  const bool slot_scores = cfg.match.lambda_r == 0.0;

  constexpr std::size_t kChunks = 8;
  std::vector<double> grad(P), partial(kChunks * P);
  std::vector<double> losses(kChunks);
  std::vector<std::size_t> idx(train.size());

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng shuf = Rng::derive(cfg.seed, 1000 + static_cast<std::uint64_t>(epoch));
    std::shuffle(idx.begin(), idx.end(), shuf.engine());
    double epoch_loss = 0.0;

    for (std::size_t start = 0; start < idx.size(); start += cfg.batch_size) {
      const std::size_t n = std::min<std::size_t>(cfg.batch_size, idx.size() - start);
      const std::size_t chunks = std::min(kChunks, n);
      std::fill(partial.begin(), partial.end(), 0.0);
      std::fill(losses.begin(), losses.end(), 0.0);
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(chunks); ++c) {
        const std::size_t lo = c * n / chunks, hi = (c + 1) * n / chunks;
        std::span<double> g(partial.data() + c * P, P);
        for (std::size_t b = lo; b < hi; ++b) {
          const Scene& sc = train[idx[start + b]];
          losses[c] += model.loss_gradient(sc.current, sc.target, sc.strokes, cfg.match, g).total;
        }
      }
      std::fill(grad.begin(), grad.end(), 0.0);
      double batch_loss = 0.0;
      for (std::size_t c = 0; c < chunks; ++c) {
        batch_loss += losses[c];
        for (std::size_t p = 0; p < P; ++p) grad[p] += partial[c * P + p];
      }
      require(std::isfinite(batch_loss), ErrorKind::Numerical,
              "predictor loss diverged in epoch " + std::to_string(epoch));
      for (auto& g : grad) g /= static_cast<double>(n);
      opt.step(model.params(), grad);
      epoch_loss += batch_loss;
    }
    res.epoch_loss.push_back(epoch_loss / static_cast<double>(train.size()));
    if (!heldout.empty()) res.rank_error.push_back(mean_rank_error(model, heldout, cfg.match, slot_scores));
  }
  return res;
}

}  // namespace strokelab

#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "json.hpp"
#include "strokelab/image.hpp"
#include "strokelab/predictor.hpp"

namespace strokelab {

/// A predicted stroke mapped into full-canvas pixel coordinates.
struct PlacedStroke {
  StrokePrediction pred;
  BezierStroke stroke;
  int layer = 0;
  int patch_x = 0;
  int patch_y = 0;
  int patch_index = 0;  // raster order within its layer
  int slot = 0;
};

/// Optional appearance source: returns a luminance texture for a stroke,
/// which modulates its coverage (dark texels paint, white texels do not).
using TextureSource = std::function<Image(const PlacedStroke&)>;

/// Stable order by (scr, patch_index, slot).
std::vector<PlacedStroke> rank_order(std::vector<PlacedStroke> strokes);

/// Alpha-over fold of the strokes whose presence d exceeds `presence`,
/// in ascending score order. Output stays in [0, 1].
Canvas composite(const Canvas& canvas, const std::vector<PlacedStroke>& strokes,
                 double presence = 0.5, const TextureSource& texture = {},
                 double softness = 0.8);

struct PaintResult {
  Canvas final_canvas;
  std::vector<Canvas> layers;        // canvas after each layer
  std::vector<PlacedStroke> drawn;   // in draw order
};

/// Coarse-to-fine painting: layer k splits the (white-padded) target into
/// 2^k x 2^k patches, predicts strokes per patch on patches resized to the
/// model side, and composites the layer's strokes in rank order.
PaintResult layered_paint(const Canvas& target, const StrokePredictor& model, int layers,
                          double presence = 0.5, const TextureSource& texture = {});

/// Per-stroke record for the painting manifest.
nlohmann::json painting_manifest(const PaintResult& result);

}  // namespace strokelab

#include "strokelab/painting.hpp"

#include <algorithm>
#include <cmath>

#include "strokelab/error.hpp"
#include "strokelab/raster.hpp"

namespace strokelab {

std::vector<PlacedStroke> rank_order(std::vector<PlacedStroke> strokes) {
  std::stable_sort(strokes.begin(), strokes.end(), [](const PlacedStroke& a, const PlacedStroke& b) {
    if (a.pred.scr != b.pred.scr) return a.pred.scr < b.pred.scr;
    if (a.patch_index != b.patch_index) return a.patch_index < b.patch_index;
    return a.slot < b.slot;
  });
  return strokes;
}

Canvas composite(const Canvas& canvas, const std::vector<PlacedStroke>& strokes, double presence,
                 const TextureSource& texture, double softness) {
  Canvas out = canvas;
  for (const auto& ps : rank_order(strokes)) {
    if (!(ps.pred.d > presence)) continue;
    const BezierStroke& s = ps.stroke;
    const Image dist = distance_field(s, out.width, out.height);
    Image alpha = coverage_from_distance(dist, std::clamp(s.opacity, 0.0, 1.0), s.width, softness);
    if (texture) {
      // Stretch the texture over the stroke's control-point box.
      double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
      for (const auto& q : s.p) {
        x0 = std::min(x0, q.x);
        y0 = std::min(y0, q.y);
        x1 = std::max(x1, q.x);
        y1 = std::max(y1, q.y);
      }
      const double pad = 0.5 * s.width;
      const int bx0 = std::max(0, static_cast<int>(std::floor(x0 - pad)));
      const int by0 = std::max(0, static_cast<int>(std::floor(y0 - pad)));
      const int bx1 = std::min(out.width, static_cast<int>(std::ceil(x1 + pad)));
      const int by1 = std::min(out.height, static_cast<int>(std::ceil(y1 + pad)));
      if (bx1 > bx0 && by1 > by0) {
        const Image tex = resize_bilinear(to_luminance(texture(ps)), bx1 - bx0, by1 - by0);
        for (int y = by0; y < by1; ++y)
          for (int x = bx0; x < bx1; ++x)
            alpha.at(x, y) *= std::clamp(1.0 - tex.at(x - bx0, y - by0), 0.0, 1.0);
      }
    }
    composite_over(out, alpha, s);
  }
  for (auto& v : out.data) v = std::clamp(v, 0.0, 1.0);
  return out;
}

PaintResult layered_paint(const Canvas& target, const StrokePredictor& model, int layers,
                          double presence, const TextureSource& texture) {
  require(layers >= 1, ErrorKind::Config, "need at least one layer");
  require(layers <= 8, ErrorKind::Config, "too many layers");
  const Canvas rgb_target = target.channels == 3 ? target : [&] {
    Canvas c(target.width, target.height, 3);
    for (std::size_t i = 0; i < target.pixel_count(); ++i)
      for (int ch = 0; ch < 3; ++ch) c.data[i * 3 + ch] = target.data[i];
    return c;
  }();
  const int grid = 1 << (layers - 1);
  const int longest = std::max(target.width, target.height);
  const int padded = (longest + grid - 1) / grid * grid;
  const Canvas padded_target = crop(rgb_target, 0, 0, padded, padded, 1.0);
  const int side = model.arch().side;

  PaintResult res;
  Canvas current = blank_canvas(padded, padded, 3);
  for (int k = 0; k < layers; ++k) {
    const int n = 1 << k;
    const int ps = padded / n;
    const double scale = static_cast<double>(ps) / side;
    std::vector<std::vector<PlacedStroke>> per_patch(static_cast<std::size_t>(n) * n);
#pragma omp parallel for schedule(dynamic)
    for (int p = 0; p < n * n; ++p) {
      const int px = p % n, py = p / n;
      const Canvas cur = resize_bilinear(crop(current, px * ps, py * ps, ps, ps), side, side);
      const Canvas tgt = resize_bilinear(crop(padded_target, px * ps, py * ps, ps, ps), side, side);
      const auto preds = model.predict(cur, tgt);
      for (int slot = 0; slot < static_cast<int>(preds.size()); ++slot) {
        PlacedStroke st;
        st.pred = preds[slot];
        st.stroke = placed_stroke(preds[slot], side).scaled(scale).translated(px * ps, py * ps);
        st.layer = k;
        st.patch_x = px;
        st.patch_y = py;
        st.patch_index = p;
        st.slot = slot;
        per_patch[p].push_back(st);
      }
    }
    std::vector<PlacedStroke> layer_strokes;
    for (auto& v : per_patch) layer_strokes.insert(layer_strokes.end(), v.begin(), v.end());
    current = composite(current, layer_strokes, presence, texture);
    for (const auto& st : rank_order(layer_strokes))
      if (st.pred.d > presence) res.drawn.push_back(st);
    res.layers.push_back(crop(current, 0, 0, target.width, target.height));
  }
  res.final_canvas = res.layers.back();
  if (target.channels == 1) {
    res.final_canvas = to_luminance(res.final_canvas);
    for (auto& l : res.layers) l = to_luminance(l);
  }
  return res;
}

nlohmann::json painting_manifest(const PaintResult& result) {
  nlohmann::json strokes = nlohmann::json::array();
  for (const auto& st : result.drawn) {
    strokes.push_back({{"c_p", st.stroke.to_array()},
                       {"x_shift", st.pred.x_shift},
                       {"y_shift", st.pred.y_shift},
                       {"scr", st.pred.scr},
                       {"d", st.pred.d},
                       {"layer", st.layer},
                       {"patch", {st.patch_x, st.patch_y}},
                       {"slot", st.slot}});
  }
  return {{"layers", result.layers.size()}, {"strokes", strokes}};
}

}  // namespace strokelab

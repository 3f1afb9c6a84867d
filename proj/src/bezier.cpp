#include "strokelab/bezier.hpp"

#include <algorithm>

#include "strokelab/error.hpp"

namespace strokelab {

std::array<double, kStrokeDims> BezierStroke::to_array() const {
  return {p[0].x, p[0].y, p[1].x, p[1].y, p[2].x, p[2].y, p[3].x, p[3].y,
          r,      g,      b,      opacity, width};
}

BezierStroke BezierStroke::from_array(std::span<const double> v) {
  require(v.size() == kStrokeDims, ErrorKind::Contract, "stroke vector must have 13 entries");
  BezierStroke s;
  for (int i = 0; i < 4; ++i) s.p[i] = {v[2 * i], v[2 * i + 1]};
  s.r = v[8];
  s.g = v[9];
  s.b = v[10];
  s.opacity = v[11];
  s.width = v[12];
  return s;
}

BezierStroke BezierStroke::translated(double dx, double dy) const {
  BezierStroke s = *this;
  for (auto& q : s.p) {
    q.x += dx;
    q.y += dy;
  }
  return s;
}

BezierStroke BezierStroke::scaled(double k) const {
  BezierStroke s = *this;
  for (auto& q : s.p) {
    q.x *= k;
    q.y *= k;
  }
  s.width *= k;
  return s;
}

ParamRanges ParamRanges::reference() {
  ParamRanges r;
  r.side = kReferenceSide;
  r.bounds = {{{12, 268}, {22, 273}, {-100, 450}, {-195, 399}, {-84, 465}, {-140, 448},
               {-9, 267}, {22, 305}, {0, 255}, {0, 255}, {0, 255}, {0, 1}, {6, 106}}};
  return r;
}

ParamRanges ParamRanges::scaled_to(double new_side) const {
  require(new_side > 0.0, ErrorKind::Config, "canvas side must be positive");
  ParamRanges r = *this;
  const double k = new_side / side;
  for (int i = 0; i < kStrokeDims; ++i)
    if (is_positional(i)) r.bounds[i] = {bounds[i].first * k, bounds[i].second * k};
  r.side = new_side;
  return r;
}

Point eval_bezier(const BezierStroke& s, double u) {
  require(u >= 0.0 && u <= 1.0, ErrorKind::Contract, "curve parameter outside [0, 1]");
  const double v = 1.0 - u;
  const double b0 = v * v * v, b1 = 3 * v * v * u, b2 = 3 * v * u * u, b3 = u * u * u;
  return {b0 * s.p[0].x + b1 * s.p[1].x + b2 * s.p[2].x + b3 * s.p[3].x,
          b0 * s.p[0].y + b1 * s.p[1].y + b2 * s.p[2].y + b3 * s.p[3].y};
}

BezierStroke clamp_params(const BezierStroke& s, const ParamRanges& ranges) {
  auto v = s.to_array();
  for (int i = 0; i < kStrokeDims; ++i)
    v[i] = std::clamp(v[i], ranges.bounds[i].first, ranges.bounds[i].second);
  return BezierStroke::from_array(v);
}

BezierStroke generate_random_stroke(Rng& rng, const ParamRanges& ranges) {
  std::array<double, kStrokeDims> v{};
  for (int i = 0; i < kStrokeDims; ++i) {
    const auto [lo, hi] = ranges.bounds[i];
    v[i] = lo == hi ? lo : rng.uniform(lo, hi);
  }
  return BezierStroke::from_array(v);
}

BezierStroke flip_stroke_horizontal(const BezierStroke& s, double side) {
  BezierStroke o = s;
  for (auto& q : o.p) q.x = side - q.x;
  return o;
}

BezierStroke flip_stroke_vertical(const BezierStroke& s, double side) {
  BezierStroke o = s;
  for (auto& q : o.p) q.y = side - q.y;
  return o;
}

BezierStroke rotate_stroke90(const BezierStroke& s, double side) {
  // Pixel (x, y) maps to (H-1-y, x); in continuous coordinates with pixel
  // centers at +0.5 that is (side - y, x).
  BezierStroke o = s;
  for (auto& q : o.p) q = {side - q.y, q.x};
  return o;
}

}  // namespace strokelab

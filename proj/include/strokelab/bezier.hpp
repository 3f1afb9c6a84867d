#pragma once

#include <array>
#include <span>
#include <utility>

#include "strokelab/random.hpp"

namespace strokelab {

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

inline constexpr int kStrokeDims = 13;
inline constexpr double kReferenceSide = 295.0;

/// Single cubic Bezier stroke. Control points in pixels, color in [0, 255].
/// Serialized order: p0x p0y p1x p1y p2x p2y p3x p3y R G B opacity width.
struct BezierStroke {
  std::array<Point, 4> p{};
  double r = 0.0, g = 0.0, b = 0.0;
  double opacity = 1.0;
  double width = 1.0;

  std::array<double, kStrokeDims> to_array() const;
  static BezierStroke from_array(std::span<const double> v);

  /// Shifts every control point by (dx, dy).
  BezierStroke translated(double dx, double dy) const;
  /// Scales positions and width by `s`.
  BezierStroke scaled(double s) const;

  bool operator==(const BezierStroke&) const = default;
};

/// Per-dimension [min, max] at some canvas side length.
struct ParamRanges {
  std::array<std::pair<double, double>, kStrokeDims> bounds{};
  double side = kReferenceSide;

  /// Measured ranges at the 295 x 295 reference resolution.
  static ParamRanges reference();
  /// Positions and width rescale with side / 295; color and opacity do not.
  ParamRanges scaled_to(double new_side) const;
};

/// Index helpers into the 13-vector.
inline constexpr int kOpacityIndex = 11;
inline constexpr int kWidthIndex = 12;
inline constexpr bool is_positional(int k) { return k < 8 || k == kWidthIndex; }

Point eval_bezier(const BezierStroke& s, double u);

BezierStroke clamp_params(const BezierStroke& s, const ParamRanges& ranges);

BezierStroke generate_random_stroke(Rng& rng, const ParamRanges& ranges);

/// Image-space transforms with matching control-point transforms.
BezierStroke flip_stroke_horizontal(const BezierStroke& s, double side);
BezierStroke flip_stroke_vertical(const BezierStroke& s, double side);
/// Clockwise 90 degree rotation of a square canvas (matches rotate90 on images).
BezierStroke rotate_stroke90(const BezierStroke& s, double side);

}  // namespace strokelab

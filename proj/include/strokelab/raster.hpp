#pragma once

#include <vector>

#include "strokelab/bezier.hpp"
#include "strokelab/image.hpp"

namespace strokelab {

inline constexpr int kCurveSamples = 64;
inline constexpr double kDefaultSoftness = 0.8;

/// kCurveSamples points of eval_bezier at u = k / (K-1).
std::vector<Point> sample_curve(const BezierStroke& s, int samples = kCurveSamples);

/// Distance from every pixel center (x + 0.5, y + 0.5) to the sampled
/// polyline. Single-channel image of distances in pixels.
Image distance_field_serial(const BezierStroke& s, int width, int height);
Image distance_field_omp(const BezierStroke& s, int width, int height);
inline Image distance_field(const BezierStroke& s, int width, int height) {
  return distance_field_omp(s, width, height);
}

/// opacity * sigmoid((width/2 - d) / softness) per pixel.
Image coverage_from_distance(const Image& dist, double opacity, double width, double softness);

struct StrokeRender {
  Canvas canvas;  // stroke over a white background
  Image alpha;    // coverage in [0, 1]
};

StrokeRender rasterize_stroke(const BezierStroke& s, int width, int height,
                              double softness = kDefaultSoftness, int channels = 3);

/// Alpha-over: out = cover * color + (1 - cover) * under. Color is the
/// stroke's RGB / 255 (luma for single-channel canvases).
void composite_over(Canvas& canvas, const Image& alpha, const BezierStroke& color);

}  // namespace strokelab

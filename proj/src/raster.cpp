#include "strokelab/raster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "strokelab/error.hpp"

namespace strokelab {

namespace {

/// Segment table in structure-of-arrays form for the distance loops.
struct Segments {
  std::vector<double> ax, ay, dx, dy, inv_len2;

  explicit Segments(const std::vector<Point>& pts) {
    const std::size_t n = pts.size() < 2 ? 1 : pts.size() - 1;
    ax.resize(n);
    ay.resize(n);
    dx.resize(n);
    dy.resize(n);
    inv_len2.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Point a = pts[i];
      const Point b = pts.size() < 2 ? a : pts[i + 1];
      ax[i] = a.x;
      ay[i] = a.y;
      dx[i] = b.x - a.x;
      dy[i] = b.y - a.y;
      const double l2 = dx[i] * dx[i] + dy[i] * dy[i];
      inv_len2[i] = l2 > 0.0 ? 1.0 / l2 : 0.0;
    }
  }

  double min_dist2(double px, double py) const {
    double best = std::numeric_limits<double>::infinity();
    const std::size_t n = ax.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double rx = px - ax[i], ry = py - ay[i];
      double t = (rx * dx[i] + ry * dy[i]) * inv_len2[i];
      t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
      const double ex = rx - t * dx[i], ey = ry - t * dy[i];
      const double d2 = ex * ex + ey * ey;
      best = d2 < best ? d2 : best;
    }
    return best;
  }
};

void fill_row(const Segments& seg, Image& out, int y) {
  const double py = y + 0.5;
  for (int x = 0; x < out.width; ++x) out.at(x, y) = std::sqrt(seg.min_dist2(x + 0.5, py));
}

}  // namespace

std::vector<Point> sample_curve(const BezierStroke& s, int samples) {
  require(samples >= 2, ErrorKind::Contract, "need at least two curve samples");
  std::vector<Point> pts(samples);
  for (int k = 0; k < samples; ++k) pts[k] = eval_bezier(s, static_cast<double>(k) / (samples - 1));
  return pts;
}

Image distance_field_serial(const BezierStroke& s, int width, int height) {
  const Segments seg(sample_curve(s));
  Image out(width, height, 1);
  for (int y = 0; y < height; ++y) fill_row(seg, out, y);
  return out;
}

Image distance_field_omp(const BezierStroke& s, int width, int height) {
  const Segments seg(sample_curve(s));
  Image out(width, height, 1);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y) fill_row(seg, out, y);
  return out;
}

Image coverage_from_distance(const Image& dist, double opacity, double width, double softness) {
  require(softness > 0.0, ErrorKind::Contract, "softness must be positive");
  Image a(dist.width, dist.height, 1);
  const double half = 0.5 * width;
  const double inv = 1.0 / softness;
  for (std::size_t i = 0; i < dist.data.size(); ++i)
    a.data[i] = opacity / (1.0 + std::exp(-(half - dist.data[i]) * inv));
  return a;
}

StrokeRender rasterize_stroke(const BezierStroke& s, int width, int height, double softness,
                              int channels) {
  const Image dist = distance_field(s, width, height);
  StrokeRender r{blank_canvas(width, height, channels),
                 coverage_from_distance(dist, std::clamp(s.opacity, 0.0, 1.0), s.width, softness)};
  composite_over(r.canvas, r.alpha, s);
  return r;
}

void composite_over(Canvas& canvas, const Image& alpha, const BezierStroke& color) {
  require(canvas.width == alpha.width && canvas.height == alpha.height, ErrorKind::Contract,
          "alpha map and canvas differ in size");
  const double rgb[3] = {std::clamp(color.r / 255.0, 0.0, 1.0),
                         std::clamp(color.g / 255.0, 0.0, 1.0),
                         std::clamp(color.b / 255.0, 0.0, 1.0)};
  const double luma = 0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2];
  for (std::size_t i = 0; i < canvas.pixel_count(); ++i) {
    const double a = alpha.data[i];
    for (int c = 0; c < canvas.channels; ++c) {
      double& v = canvas.data[i * canvas.channels + c];
      const double src = canvas.channels == 3 ? rgb[c] : luma;
      v = a * src + (1.0 - a) * v;
    }
  }
}

}  // namespace strokelab

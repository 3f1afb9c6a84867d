#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "strokelab/bezier.hpp"
#include "strokelab/error.hpp"
#include "strokelab/fit.hpp"
#include "strokelab/image.hpp"
#include "strokelab/metrics.hpp"
#include "strokelab/raster.hpp"

using namespace strokelab;

namespace {

BezierStroke line_stroke(Point a, Point b, double width) {
  BezierStroke s;
  for (int k = 0; k < 4; ++k) s.p[k] = {a.x + (b.x - a.x) * k / 3.0, a.y + (b.y - a.y) * k / 3.0};
  s.width = width;
  s.r = 20;
  s.g = 40;
  s.b = 60;
  return s;
}

// Repeated linear interpolation of the control polygon.
Point de_casteljau(const BezierStroke& s, double u) {
  std::array<Point, 4> q = s.p;
  for (int level = 3; level > 0; --level)
    for (int i = 0; i < level; ++i)
      q[i] = {q[i].x + u * (q[i + 1].x - q[i].x), q[i].y + u * (q[i + 1].y - q[i].y)};
  return q[0];
}

double segment_distance(double px, double py, Point a, Point b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  double t = ((px - a.x) * dx + (py - a.y) * dy) / (dx * dx + dy * dy);
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(px - a.x - t * dx, py - a.y - t * dy);
}

}  // namespace

TEST_CASE("curve evaluation") {
  Rng rng(1);
  const auto ranges = ParamRanges::reference().scaled_to(64);
  for (int i = 0; i < 50; ++i) {
    const BezierStroke s = generate_random_stroke(rng, ranges);
    CHECK(eval_bezier(s, 0.0).x == s.p[0].x);
    CHECK(eval_bezier(s, 1.0).y == s.p[3].y);
    const double u = rng.uniform();
    const Point a = eval_bezier(s, u), b = de_casteljau(s, u);
    CHECK(a.x == doctest::Approx(b.x).epsilon(1e-12));
    CHECK(a.y == doctest::Approx(b.y).epsilon(1e-12));
  }
  const BezierStroke line = line_stroke({2, 3}, {14, 9}, 1);
  CHECK(eval_bezier(line, 0.5).x == doctest::Approx(8.0));
  CHECK(eval_bezier(line, 0.5).y == doctest::Approx(6.0));
  CHECK_THROWS_AS(eval_bezier(line, 1.5), Error);
}

TEST_CASE("parameter ranges") {
  const auto r32 = ParamRanges::reference().scaled_to(32);
  CHECK(r32.bounds[kWidthIndex].first == doctest::Approx(6.0 * 32 / 295));
  CHECK(r32.bounds[kWidthIndex].first == doctest::Approx(0.65).epsilon(0.01));
  CHECK(r32.bounds[kWidthIndex].second == doctest::Approx(11.5).epsilon(0.01));

  Rng rng(2);
  for (int i = 0; i < 10000; ++i) {
    const auto v = generate_random_stroke(rng, r32).to_array();
    for (int k = 0; k < kStrokeDims; ++k) {
      CHECK(v[k] >= r32.bounds[k].first);
      CHECK(v[k] <= r32.bounds[k].second);
    }
  }
  Rng a(7), b(7);
  CHECK(generate_random_stroke(a, r32) == generate_random_stroke(b, r32));
}

TEST_CASE("clamping") {
  const auto ref = ParamRanges::reference();
  Rng rng(3);
  const BezierStroke inside = generate_random_stroke(rng, ref);
  CHECK(clamp_params(inside, ref) == inside);

  BezierStroke s = inside;
  s.opacity = 1.5;
  s.width = -3;
  const BezierStroke c = clamp_params(s, ref);
  CHECK(c.opacity == 1.0);
  CHECK(c.width == 6.0);
}

TEST_CASE("serialization order") {
  BezierStroke s = line_stroke({1, 2}, {7, 8}, 3);
  s.opacity = 0.4;
  const auto v = s.to_array();
  CHECK(v[0] == 1);
  CHECK(v[1] == 2);
  CHECK(v[8] == 20);
  CHECK(v[kOpacityIndex] == 0.4);
  CHECK(v[kWidthIndex] == 3);
  CHECK(BezierStroke::from_array(v) == s);
}

TEST_CASE("rasterization") {
  SUBCASE("zero opacity leaves the canvas blank") {
    BezierStroke s = line_stroke({4, 4}, {28, 20}, 5);
    s.opacity = 0;
    const auto r = rasterize_stroke(s, 32, 32);
    for (double v : r.canvas.data) CHECK(v == 1.0);
  }
  SUBCASE("covered area of a straight stroke") {
    const Point a{10, 32}, b{54, 32};
    const double w = 4.0;
    const auto r = rasterize_stroke(line_stroke(a, b, w), 64, 64, 1e-3);
    int covered = 0;
    for (double v : r.alpha.data) covered += v >= 0.5;

    // Dense supersampling of the capsule around the segment.
    const int sub = 16;
    double area = 0;
    for (int y = 0; y < 64 * sub; ++y)
      for (int x = 0; x < 64 * sub; ++x)
        area += segment_distance((x + 0.5) / sub, (y + 0.5) / sub, a, b) < w / 2;
    area /= sub * sub;

    CHECK(std::abs(covered - area) / area < 0.10);
    CHECK(std::abs(covered - 44.0 * w) / (44.0 * w) < 0.10);
  }
  SUBCASE("coverage falls off with distance") {
    const BezierStroke s = line_stroke({3, 11}, {29, 17}, 6);
    const Image d = distance_field(s, 32, 32);
    const Image a = coverage_from_distance(d, 1.0, s.width, kDefaultSoftness);
    std::vector<std::pair<double, double>> pairs;
    for (std::size_t i = 0; i < d.data.size(); ++i) pairs.emplace_back(d.data[i], a.data[i]);
    std::sort(pairs.begin(), pairs.end());
    for (std::size_t i = 1; i < pairs.size(); ++i) CHECK(pairs[i].second <= pairs[i - 1].second);
  }
  SUBCASE("parallel distance field equals the serial one") {
    Rng rng(4);
    const auto ranges = ParamRanges::reference().scaled_to(48);
    for (int i = 0; i < 10; ++i) {
      const BezierStroke s = generate_random_stroke(rng, ranges);
      CHECK(distance_field_serial(s, 48, 40).data == distance_field_omp(s, 48, 40).data);
    }
  }
  SUBCASE("grayscale canvases use luma") {
    const BezierStroke s = line_stroke({2, 8}, {14, 8}, 6);
    const auto rgb = rasterize_stroke(s, 16, 16, kDefaultSoftness, 3);
    const auto gray = rasterize_stroke(s, 16, 16, kDefaultSoftness, 1);
    const Image lum = to_luminance(rgb.canvas);
    for (std::size_t i = 0; i < lum.data.size(); ++i)
      CHECK(gray.canvas.data[i] == doctest::Approx(lum.data[i]).epsilon(1e-12));
  }
}

TEST_CASE("image transforms match stroke transforms") {
  Rng rng(5);
  const auto ranges = ParamRanges::reference().scaled_to(24);
  for (int i = 0; i < 10; ++i) {
    const BezierStroke s = generate_random_stroke(rng, ranges);
    const Canvas img = rasterize_stroke(s, 24, 24).canvas;
    const auto close = [](const Image& a, const Image& b) {
      for (std::size_t k = 0; k < a.data.size(); ++k)
        if (std::abs(a.data[k] - b.data[k]) > 1e-9) return false;
      return true;
    };
    CHECK(close(flip_horizontal(img), rasterize_stroke(flip_stroke_horizontal(s, 24), 24, 24).canvas));
    CHECK(close(flip_vertical(img), rasterize_stroke(flip_stroke_vertical(s, 24), 24, 24).canvas));
    CHECK(close(rotate90(img), rasterize_stroke(rotate_stroke90(s, 24), 24, 24).canvas));
  }
}

TEST_CASE("fit initialization") {
  Rng rng(6);
  const auto ranges = ParamRanges::reference().scaled_to(32);
  for (int i = 0; i < 50; ++i) {
    BezierStroke s = generate_random_stroke(rng, ranges);
    s.opacity = rng.uniform(0.6, 1.0);
    const Canvas target = rasterize_stroke(s, 32, 32).canvas;
    if (connected_regions(target).region_count == 0) continue;
    const Box box = foreground_box(target, 0.05);
    const BezierStroke init = initialize_from_foreground(target, 0.05, rng);
    for (const Point& p : init.p) CHECK(box.contains(p));
  }
  CHECK_THROWS_AS(initialize_from_foreground(blank_canvas(16, 16), 0.05, rng), Error);
}

TEST_CASE("fitting") {
  Rng rng(8);
  BezierStroke s = line_stroke({6, 8}, {26, 22}, 4);
  s.p[1] = {10, 22};
  s.opacity = 0.8;
  const Canvas target = rasterize_stroke(s, 32, 32).canvas;

  const FitResult first = fit_stroke(target, rng);
  CHECK(first.best_loss_history.size() == 300);
  for (std::size_t i = 1; i < first.best_loss_history.size(); ++i)
    CHECK(first.best_loss_history[i] <= first.best_loss_history[i - 1]);
  CHECK(first.loss == doctest::Approx(render_loss(first.stroke, target, kDefaultSoftness)));
  CHECK(first.loss <= first.best_loss_history.front());

  BezierStroke a = s, b = first.stroke;
  a.opacity = b.opacity = 1.0;
  CHECK(alpha_iou(rasterize_stroke(a, 32, 32).alpha, rasterize_stroke(b, 32, 32).alpha) >= 0.85);

  // Over white only opacity * (1 - color) is observable; ink is reported at opacity 1.
  CHECK(first.stroke.opacity == 1.0);
  CHECK(255.0 - first.stroke.r == doctest::Approx(0.8 * (255.0 - s.r)).epsilon(0.02));

  // Refitting the fitted render does not lose ground.
  const Canvas again = rasterize_stroke(first.stroke, 32, 32).canvas;
  Rng rng2(9);
  const FitResult second = fit_stroke(again, rng2);
  CHECK(second.loss <= first.loss + 1e-12);

  FitOptions bad;
  bad.iterations = 0;
  CHECK_THROWS_AS(fit_stroke(target, rng, bad), Error);
}

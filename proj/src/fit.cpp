#include "strokelab/fit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "strokelab/error.hpp"
#include "strokelab/metrics.hpp"
#include "strokelab/nn.hpp"

namespace strokelab {

namespace {

std::vector<std::uint8_t> white_foreground(const Canvas& target, double threshold) {
  const Image lum = to_luminance(target);
  std::vector<std::uint8_t> mask(lum.pixel_count());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = 1.0 - lum.data[i] > threshold;
  return mask;
}

Canvas render_from_distance(const Image& dist, const BezierStroke& s, int channels,
                            double softness) {
  Canvas c = blank_canvas(dist.width, dist.height, channels);
  const Image a =
      coverage_from_distance(dist, std::clamp(s.opacity, 0.0, 1.0), s.width, softness);
  composite_over(c, a, s);
  return c;
}

}  // namespace

Box foreground_box(const Canvas& target, double threshold) {
  const auto mask = white_foreground(target, threshold);
  Box b{1e300, 1e300, -1e300, -1e300};
  bool any = false;
  for (int y = 0; y < target.height; ++y)
    for (int x = 0; x < target.width; ++x)
      if (mask[static_cast<std::size_t>(y) * target.width + x]) {
        any = true;
        b.x0 = std::min(b.x0, x + 0.5);
        b.x1 = std::max(b.x1, x + 0.5);
        b.y0 = std::min(b.y0, y + 0.5);
        b.y1 = std::max(b.y1, y + 0.5);
      }
  require(any, ErrorKind::Contract, "target has no foreground pixels");
  return b;
}

BezierStroke initialize_from_foreground(const Canvas& target, double threshold, Rng& rng) {
  const auto mask = white_foreground(target, threshold);
  const Box box = foreground_box(target, threshold);

  double n = 0, mx = 0, my = 0;
  std::size_t darkest = 0;
  double darkest_lum = 2.0;
  const Image lum = to_luminance(target);
  for (int y = 0; y < target.height; ++y)
    for (int x = 0; x < target.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * target.width + x;
      if (!mask[i]) continue;
      n += 1;
      mx += x + 0.5;
      my += y + 0.5;
      if (lum.data[i] < darkest_lum) {
        darkest_lum = lum.data[i];
        darkest = i;
      }
    }
  mx /= n;
  my /= n;
  double sxx = 0, syy = 0, sxy = 0;
  for (int y = 0; y < target.height; ++y)
    for (int x = 0; x < target.width; ++x) {
      if (!mask[static_cast<std::size_t>(y) * target.width + x]) continue;
      const double dx = x + 0.5 - mx, dy = y + 0.5 - my;
      sxx += dx * dx;
      syy += dy * dy;
      sxy += dx * dy;
    }
  const double theta = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
  const double ax = std::cos(theta), ay = std::sin(theta);
  double tmin = 0, tmax = 0;
  for (int y = 0; y < target.height; ++y)
    for (int x = 0; x < target.width; ++x) {
      if (!mask[static_cast<std::size_t>(y) * target.width + x]) continue;
      const double t = (x + 0.5 - mx) * ax + (y + 0.5 - my) * ay;
      tmin = std::min(tmin, t);
      tmax = std::max(tmax, t);
    }
  const double length = std::max(tmax - tmin, 1.0);

  // Darkness-weighted centroids of slices across the axis trace the ridge of
  // the stroke; a least-squares cubic through them captures its bend.
  constexpr int kBins = 8;
  std::array<double, kBins> bw{}, bx{}, by{};
  for (int y = 0; y < target.height; ++y)
    for (int x = 0; x < target.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * target.width + x;
      if (!mask[i]) continue;
      const double t = (x + 0.5 - mx) * ax + (y + 0.5 - my) * ay;
      const int b = std::clamp(static_cast<int>((t - tmin) / length * kBins), 0, kBins - 1);
      const double w = 1.0 - lum.data[i];
      bw[b] += w;
      bx[b] += w * (x + 0.5);
      by[b] += w * (y + 0.5);
    }
  std::vector<Point> ridge;
  for (int b = 0; b < kBins; ++b)
    if (bw[b] > 0) ridge.push_back({bx[b] / bw[b], by[b] / bw[b]});
  // Extend the ridge to the extreme projections so the curve spans the stroke.
  ridge.insert(ridge.begin(), Point{mx + tmin * ax, my + tmin * ay});
  ridge.push_back(Point{mx + tmax * ax, my + tmax * ay});
  std::vector<double> u(ridge.size(), 0.0);
  for (std::size_t i = 1; i < ridge.size(); ++i)
    u[i] = u[i - 1] + std::hypot(ridge[i].x - ridge[i - 1].x, ridge[i].y - ridge[i - 1].y);
  for (auto& v : u) v /= std::max(u.back(), 1e-12);

  BezierStroke s;
  for (int k = 0; k < 4; ++k) {
    const double t = tmin + (tmax - tmin) * k / 3.0;
    double jitter = k == 1 || k == 2 ? rng.uniform(-0.25, 0.25) : 0.0;
    s.p[k] = Point{mx + t * ax - jitter * ay, my + t * ay + jitter * ax};
  }
  // Endpoints stay at the extremes; solve the 2x2 normal equations for the
  // inner control points.
  double a11 = 0, a12 = 0, a22 = 0, rx1 = 0, ry1 = 0, rx2 = 0, ry2 = 0;
  for (std::size_t i = 0; i < ridge.size(); ++i) {
    const double t = u[i], m = 1.0 - t;
    const double b0 = m * m * m, b1 = 3 * m * m * t, b2 = 3 * m * t * t, b3 = t * t * t;
    const double qx = ridge[i].x - b0 * s.p[0].x - b3 * s.p[3].x;
    const double qy = ridge[i].y - b0 * s.p[0].y - b3 * s.p[3].y;
    a11 += b1 * b1;
    a12 += b1 * b2;
    a22 += b2 * b2;
    rx1 += b1 * qx;
    ry1 += b1 * qy;
    rx2 += b2 * qx;
    ry2 += b2 * qy;
  }
  const double det = a11 * a22 - a12 * a12;
  if (std::abs(det) > 1e-9) {
    s.p[1] = {(a22 * rx1 - a12 * rx2) / det, (a22 * ry1 - a12 * ry2) / det};
    s.p[2] = {(a11 * rx2 - a12 * rx1) / det, (a11 * ry2 - a12 * ry1) / det};
  }
  for (auto& p : s.p) {
    p.x = std::clamp(p.x, box.x0, box.x1);
    p.y = std::clamp(p.y, box.y0, box.y1);
  }
  double arc = 0;
  Point prev = eval_bezier(s, 0.0);
  for (int k = 1; k <= 32; ++k) {
    const Point q = eval_bezier(s, k / 32.0);
    arc += std::hypot(q.x - prev.x, q.y - prev.y);
    prev = q;
  }
  const double side = std::max(target.width, target.height);
  s.width = std::clamp(n / std::max(arc, 1.0), 1.0, side / 3.0);
  s.opacity = 1.0;
  const std::size_t c = darkest * target.channels;
  if (target.channels == 3) {
    s.r = 255.0 * target.data[c];
    s.g = 255.0 * target.data[c + 1];
    s.b = 255.0 * target.data[c + 2];
  } else {
    s.r = s.g = s.b = 255.0 * target.data[c];
  }
  return s;
}

double render_loss(const BezierStroke& s, const Canvas& target, double softness) {
  const Image dist = distance_field(s, target.width, target.height);
  return mse_serial(render_from_distance(dist, s, target.channels, softness), target);
}

FitResult fit_stroke(const Canvas& target, Rng& rng, const FitOptions& opts) {
  require(opts.iterations >= 1, ErrorKind::Config, "fit needs at least one iteration");
  FitResult result;
  result.initial = initialize_from_foreground(target, opts.foreground_threshold, rng);

  const double side = std::max(target.width, target.height);
  const ParamRanges ranges = ParamRanges::reference().scaled_to(side);
  const std::size_t npix = target.pixel_count();
  const int nch = target.channels;

  // Over a white canvas a pixel is 1 - coverage * opacity * (1 - color), so
  // only the product k = opacity * (1 - color) per channel is observable.
  // For fixed geometry k has a closed-form least-squares solution; the
  // search runs over geometry alone and reports opacity 1.
  auto project = [&](BezierStroke& s, const Image& dist, double softness) {
    const Image cov = coverage_from_distance(dist, 1.0, s.width, softness);
    std::array<double, 3> num{}, k{};
    double den = 0;
    for (std::size_t i = 0; i < npix; ++i) {
      den += cov.data[i] * cov.data[i];
      for (int c = 0; c < nch; ++c) num[c] += cov.data[i] * (1.0 - target.data[i * nch + c]);
    }
    for (int c = 0; c < nch; ++c) k[c] = den > 0 ? std::clamp(num[c] / den, 0.0, 1.0) : 0.0;
    if (nch == 1) k[1] = k[2] = k[0];
    s.opacity = 1.0;
    s.r = 255.0 * (1.0 - k[0]);
    s.g = 255.0 * (1.0 - k[1]);
    s.b = 255.0 * (1.0 - k[2]);
    double loss = 0;
    for (std::size_t i = 0; i < npix; ++i)
      for (int c = 0; c < nch; ++c) {
        const double d = 1.0 - cov.data[i] * k[c] - target.data[i * nch + c];
        loss += d * d;
      }
    return loss / static_cast<double>(npix * nch);
  };

  // Geometry in units of the canvas side: eight coordinates, then width.
  constexpr int kGeom = 9;
  using Geom = std::array<double, kGeom>;
  auto to_geom = [&](const BezierStroke& s) {
    Geom g{};
    const auto v = s.to_array();
    for (int k = 0; k < 8; ++k) g[k] = v[k] / side;
    g[8] = s.width / side;
    return g;
  };
  auto evaluate = [&](const Geom& g, BezierStroke* out, double softness) {
    BezierStroke s = result.initial;
    for (int k = 0; k < 4; ++k) s.p[k] = {g[2 * k] * side, g[2 * k + 1] * side};
    s.width = g[8] * side;
    const double loss = project(s, distance_field_serial(s, target.width, target.height), softness);
    if (out) *out = s;
    return loss;
  };

  auto from_geom = [&](const Geom& g) {
    BezierStroke s = result.initial;
    for (int k = 0; k < 4; ++k) s.p[k] = {g[2 * k] * side, g[2 * k + 1] * side};
    s.width = g[8] * side;
    s = clamp_params(s, ranges);
    s.width = std::max(s.width, 0.25);
    return to_geom(s);
  };

  // Adam on central differences with a cosine learning-rate decay. Returns
  // the best geometry seen and its loss; `history` gets one entry per step.
  const double h = opts.fd_step;
  auto descend = [&](Geom g, int iterations, std::vector<double>* history) {
    Geom best = g;
    double best_loss = evaluate(g, nullptr, opts.softness);
    std::vector<double> grad(kGeom), params(kGeom);
    nn::Adam opt(kGeom, opts.learning_rate);
    for (int it = 0; it < iterations; ++it) {
      if (it > 0) {
        const double loss = evaluate(g, nullptr, opts.softness);
        if (loss < best_loss) {
          best_loss = loss;
          best = g;
        }
      }
      if (history) history->push_back(best_loss);
      for (int k = 0; k < kGeom; ++k) {
        Geom up = g, dn = g;
        up[k] += h;
        dn[k] -= h;
        grad[k] = (evaluate(up, nullptr, opts.softness) - evaluate(dn, nullptr, opts.softness)) /
                  (2.0 * h);
      }
      const double frac = static_cast<double>(it) / iterations;
      const double lr_scale = opts.final_lr_fraction + (1.0 - opts.final_lr_fraction) * 0.5 *
                                                           (1.0 + std::cos(std::numbers::pi * frac));
      opt.set_lr(opts.learning_rate * lr_scale);
      std::copy(g.begin(), g.end(), params.begin());
      opt.step(params, grad);
      std::copy(params.begin(), params.end(), g.begin());
      g = from_geom(g);
    }
    const double last = evaluate(g, nullptr, opts.softness);
    if (last < best_loss) {
      best_loss = last;
      best = g;
      if (history && !history->empty()) history->back() = last;
    }
    return std::pair{best, best_loss};
  };

  const Geom start = to_geom(result.initial);
  evaluate(start, &result.initial, opts.softness);

  // Folded shapes (hooks, loops) sit in basins the principal-axis start
  // cannot reach. Random curves anchored on foreground pixels are scored
  // first; the best few get a short descent and the winner a full one.
  std::vector<std::pair<double, Geom>> pool{{evaluate(start, nullptr, opts.softness), start}};
  if (opts.candidates > 0) {
    const auto mask = white_foreground(target, opts.foreground_threshold);
    std::vector<Point> fg;
    for (int y = 0; y < target.height; ++y)
      for (int x = 0; x < target.width; ++x)
        if (mask[static_cast<std::size_t>(y) * target.width + x]) fg.push_back({x + 0.5, y + 0.5});
    for (int c = 0; c < opts.candidates; ++c) {
      BezierStroke s = result.initial;
      s.p[0] = fg[rng.index(fg.size())];
      s.p[3] = fg[rng.index(fg.size())];
      for (int k = 1; k <= 2; ++k)
        s.p[k] = {rng.uniform(ranges.bounds[2 * k].first, ranges.bounds[2 * k].second),
                  rng.uniform(ranges.bounds[2 * k + 1].first, ranges.bounds[2 * k + 1].second)};
      s.width = std::clamp(result.initial.width * std::exp(rng.uniform(-1.0, 1.0)),
                           ranges.bounds[kWidthIndex].first, ranges.bounds[kWidthIndex].second);
      const Geom g = to_geom(s);
      pool.emplace_back(evaluate(g, nullptr, opts.softness), g);
    }
    const std::size_t keep = std::min<std::size_t>(pool.size(), 1 + opts.restarts);
    std::partial_sort(pool.begin() + 1, pool.begin() + keep, pool.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
    pool.resize(keep);
    for (auto& [loss, g] : pool) std::tie(g, loss) = descend(g, opts.restart_iterations, nullptr);
  }
  const auto winner = std::min_element(pool.begin(), pool.end(), [](const auto& a, const auto& b) {
    return a.first < b.first;
  });

  const Geom best = descend(winner->second, opts.iterations, &result.best_loss_history).first;
  result.loss = evaluate(best, &result.stroke, opts.softness);
  return result;
}

}  // namespace strokelab

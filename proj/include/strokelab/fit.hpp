#pragma once

#include <vector>

#include "strokelab/bezier.hpp"
#include "strokelab/image.hpp"
#include "strokelab/random.hpp"
#include "strokelab/raster.hpp"

namespace strokelab {

struct FitOptions {
  int iterations = 300;
  double softness = kDefaultSoftness;
  double learning_rate = 0.01;   // in units of canvas side (positions, width)
  double final_lr_fraction = 0.1;
  double fd_step = 1e-3;
  int candidates = 2000;         // random curves scored before descending
  int restarts = 3;              // best candidates given a short descent
  int restart_iterations = 25;
  double foreground_threshold = 0.05;
};

struct FitResult {
  BezierStroke stroke;   // best parameters seen
  double loss = 0.0;     // their mean squared pixel error
  BezierStroke initial;
  std::vector<double> best_loss_history;  // one entry per iteration
};

/// Places the curve along the principal axis of the foreground pixels,
/// inside their bounding box. Throws Contract if the target is blank.
BezierStroke initialize_from_foreground(const Canvas& target, double threshold, Rng& rng);

/// Mean squared error between the rendered stroke and `target`.
double render_loss(const BezierStroke& s, const Canvas& target, double softness);

/// Central-difference Adam descent on the control points and width, with
/// per-channel ink solved in closed form for each geometry (the result has
/// opacity 1; over white, opacity and color are confounded). The start is the
/// best of initialize_from_foreground and a screened set of random curves.
FitResult fit_stroke(const Canvas& target, Rng& rng, const FitOptions& opts = {});

/// Foreground bounding box in pixel-center coordinates: {xmin, ymin, xmax, ymax}.
struct Box {
  double x0, y0, x1, y1;
  bool contains(Point p, double tol = 1e-9) const {
    return p.x >= x0 - tol && p.x <= x1 + tol && p.y >= y0 - tol && p.y <= y1 + tol;
  }
};
Box foreground_box(const Canvas& target, double threshold);

}  // namespace strokelab

#pragma once

#include <cstdint>
#include <vector>

#include "strokelab/bezier.hpp"
#include "strokelab/diffusion.hpp"
#include "strokelab/image.hpp"

namespace strokelab {

struct AugmentOptions {
  bool flip_horizontal = false;
  bool flip_vertical = false;
  bool rotate = false;
};

struct StrokeSample {
  BezierStroke stroke;
  Canvas image;
};

/// Random single strokes on white, redrawn until the render forms exactly
/// one closed region. Each sample uses its own stream keyed by (seed, index);
/// enabled augmentations are applied with probability 1/2 (rotations by a
/// uniform multiple of 90 degrees) to both image and control points.
std::vector<StrokeSample> generate_stroke_dataset(std::size_t count, int side, std::uint64_t seed,
                                                  int channels = 3,
                                                  const AugmentOptions& augment = {});

/// Luminance mapped to [-1, 1]; with `with_condition` the normalized c_p
/// vector (positions and width over side, color over 255) is attached.
std::vector<TrainingImage> to_training_images(const std::vector<StrokeSample>& samples,
                                              bool with_condition = false);

/// [-1, 1] tensor back to a single-channel canvas.
Canvas tensor_to_canvas(TensorView x, int side);

}  // namespace strokelab

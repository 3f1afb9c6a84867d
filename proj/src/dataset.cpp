#include "strokelab/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "strokelab/error.hpp"
#include "strokelab/metrics.hpp"
#include "strokelab/raster.hpp"

namespace strokelab {

std::vector<StrokeSample> generate_stroke_dataset(std::size_t count, int side, std::uint64_t seed,
                                                  int channels, const AugmentOptions& augment) {
  require(count >= 1, ErrorKind::Config, "count must be at least 1");
  require(side >= 8, ErrorKind::Config, "canvas size must be at least 8");
  const ParamRanges ranges = ParamRanges::reference().scaled_to(side);
  std::vector<StrokeSample> out(count);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(count); ++i) {
    Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(i));
    StrokeSample smp;
    for (;;) {
      smp.stroke = generate_random_stroke(rng, ranges);
      smp.image = rasterize_stroke(smp.stroke, side, side, kDefaultSoftness, channels).canvas;
      if (connected_regions(smp.image).region_count == 1) break;
    }
    if (augment.flip_horizontal && rng.uniform() < 0.5) {
      smp.stroke = flip_stroke_horizontal(smp.stroke, side);
      smp.image = flip_horizontal(smp.image);
    }
    if (augment.flip_vertical && rng.uniform() < 0.5) {
      smp.stroke = flip_stroke_vertical(smp.stroke, side);
      smp.image = flip_vertical(smp.image);
    }
    if (augment.rotate) {
      const std::size_t turns = rng.index(4);
      for (std::size_t k = 0; k < turns; ++k) {
        smp.stroke = rotate_stroke90(smp.stroke, side);
        smp.image = rotate90(smp.image);
      }
    }
    out[i] = std::move(smp);
  }
  return out;
}

std::vector<TrainingImage> to_training_images(const std::vector<StrokeSample>& samples,
                                              bool with_condition) {
  std::vector<TrainingImage> out;
  for (const auto& s : samples) {
    const Image lum = to_luminance(s.image);
    TrainingImage t;
    t.pixels.resize(lum.data.size());
    for (std::size_t i = 0; i < lum.data.size(); ++i) t.pixels[i] = 2.0 * lum.data[i] - 1.0;
    if (with_condition) {
      const auto v = s.stroke.to_array();
      for (int k = 0; k < kStrokeDims; ++k)
        t.cond_features.push_back(v[k] / (is_positional(k) ? s.image.width
                                                           : (k == kOpacityIndex ? 1.0 : 255.0)));
    }
    out.push_back(std::move(t));
  }
  return out;
}

Canvas tensor_to_canvas(TensorView x, int side) {
  require(x.size() == static_cast<std::size_t>(side) * side, ErrorKind::Contract,
          "tensor size does not match canvas side");
  Canvas c(side, side, 1);
  for (std::size_t i = 0; i < x.size(); ++i) c.data[i] = std::clamp(0.5 * (x[i] + 1.0), 0.0, 1.0);
  return c;
}

}  // namespace strokelab

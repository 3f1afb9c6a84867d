#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "strokelab/image.hpp"

namespace strokelab {

struct CrdResult {
  int region_count = 0;
  double area_ratio = 0.0;
};

/// 8-connected component labels (0 = background, 1..n in first-seen raster
/// order) via two-pass union-find.
std::vector<int> label_components(std::span<const std::uint8_t> mask, int width, int height,
                                  int* count = nullptr);

/// Median of the border pixels of a single-channel image.
double border_median(const Image& luminance);

/// Pixels whose luminance differs from the border-median background by
/// more than `threshold`.
std::vector<std::uint8_t> foreground_mask(const Image& img, double threshold);

/// Closed-region detection: count of 8-connected foreground regions and
/// the foreground fraction of the image.
CrdResult connected_regions(const Image& img, double threshold = 0.1);

double mse_serial(const Image& a, const Image& b);
double mse_omp(const Image& a, const Image& b);
inline double mse(const Image& a, const Image& b) { return mse_omp(a, b); }

/// |A n B| / |A u B| of masks thresholded at `threshold`; 1 when both are empty.
double alpha_iou(const Image& a, const Image& b, double threshold = 0.5);

}  // namespace strokelab

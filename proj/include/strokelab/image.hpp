#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "strokelab/error.hpp"

namespace strokelab {

/// Interleaved (row-major, channel-last) image of doubles.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<double> data;

  Image() = default;
  Image(int w, int h, int c, double fill = 0.0)
      : width(w), height(h), channels(c),
        data(static_cast<std::size_t>(w) * h * c, fill) {
    require(w > 0 && h > 0 && (c == 1 || c == 3), ErrorKind::Contract,
            "image dimensions must be positive with 1 or 3 channels");
  }

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  std::size_t size() const { return data.size(); }

  double& at(int x, int y, int c = 0) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  double at(int x, int y, int c = 0) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  bool same_shape(const Image& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }
};

/// A canvas is an image whose values lie in [0, 1]; white is 1.
using Canvas = Image;

inline Canvas blank_canvas(int w, int h, int channels = 3) {
  return Canvas(w, h, channels, 1.0);
}

/// Rec.601 luma; single-channel images are returned unchanged.
Image to_luminance(const Image& img);

/// Bilinear resample to a new size (pixel-center aligned).
Image resize_bilinear(const Image& img, int new_w, int new_h);

/// Copy of the rectangle [x0, x0+w) x [y0, y0+h); out-of-range pixels take `pad`.
Image crop(const Image& img, int x0, int y0, int w, int h, double pad = 1.0);

/// Horizontal / vertical mirror and 90-degree clockwise rotation.
Image flip_horizontal(const Image& img);
Image flip_vertical(const Image& img);
Image rotate90(const Image& img);

}  // namespace strokelab
